"""Exception types shared across the package."""


class CircleRdsError(Exception):
    """Base class for all package errors."""


class DuplicatePoint(CircleRdsError):
    """Two points that were required to be distinct coincide."""


class LengthMismatch(CircleRdsError):
    """Sampled values and partition have different lengths."""


class EverywhereFixed(CircleRdsError):
    """Fixed-point query on a map that fixes a whole arc (e.g. the identity)."""


class InvalidWeights(CircleRdsError):
    """System weights are not strictly positive rationals summing to one."""


class BudgetExceeded(CircleRdsError):
    """A bounded search exhausted its node budget before finishing."""


class NoBottomSCC(CircleRdsError):
    """Transition graph has no terminal strongly-connected component (bug guard)."""


class UnstableCount(CircleRdsError):
    """Minimal-set count changed between grid resolutions."""


class DegenerateClassification(CircleRdsError):
    """More than half of the sampled orbits could not be classified."""


class MissingMinimalSet(CircleRdsError):
    """A level-one interval family does not contain its minimal set."""


class CardinalityViolation(CircleRdsError):
    """Some intervals of a family split while others did not (at explored depth)."""


class SupportLeak(CircleRdsError):
    """A stationary measure has too much mass outside its minimal set."""


class NondisjointSupports(CircleRdsError):
    """Measure decomposition requires pairwise disjoint supports."""


class SpecFormatError(CircleRdsError):
    """A system spec file is malformed."""
