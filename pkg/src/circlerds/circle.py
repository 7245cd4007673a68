"""Exact arithmetic and order predicates on the circle.

The circle is modelled as [0, 1) with counterclockwise orientation.  Points
are exact rationals, so every order predicate is decided without ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DuplicatePoint, LengthMismatch

RationalLike = Fraction | int | str | tuple


def _to_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, tuple):
        return Fraction(*x)
    return Fraction(x)


@dataclass(frozen=True, slots=True)
class CirclePoint:
    """A point of the circle, stored as an exact rational in [0, 1)."""

    value: Fraction

    def __post_init__(self):
        v = _to_fraction(self.value)
        object.__setattr__(self, "value", v % 1)

    def __add__(self, other: "CirclePoint | RationalLike") -> "CirclePoint":
        o = other.value if isinstance(other, CirclePoint) else _to_fraction(other)
        return CirclePoint(self.value + o)

    def __sub__(self, other: "CirclePoint | RationalLike") -> "CirclePoint":
        o = other.value if isinstance(other, CirclePoint) else _to_fraction(other)
        return CirclePoint(self.value - o)

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"CirclePoint({self.value})"


def pt(x: RationalLike | CirclePoint) -> CirclePoint:
    """Coerce a rational-like value to a CirclePoint (mod 1)."""
    if isinstance(x, CirclePoint):
        return x
    return CirclePoint(_to_fraction(x))


@dataclass(frozen=True, slots=True)
class Arc:
    """A circle arc traversed counterclockwise from ``lo`` to ``hi``.

    ``[a, a]`` is the singleton {a}.  The open arc (a, a) is rejected: the
    whole circle is the separate ``FULL_CIRCLE`` value, never a degenerate
    arc.
    """

    lo: CirclePoint
    hi: CirclePoint
    closed: bool = True
    full: bool = False

    def __post_init__(self):
        if self.full:
            return
        if not self.closed and self.lo == self.hi:
            raise ValueError("open arc (a, a) is invalid; use FULL_CIRCLE")

    @staticmethod
    def closed_arc(lo, hi) -> "Arc":
        return Arc(pt(lo), pt(hi), closed=True)

    @staticmethod
    def open_arc(lo, hi) -> "Arc":
        return Arc(pt(lo), pt(hi), closed=False)

    def length(self) -> Fraction:
        if self.full:
            return Fraction(1)
        return (self.hi.value - self.lo.value) % 1


FULL_CIRCLE = Arc(CirclePoint(Fraction(0)), CirclePoint(Fraction(0)), closed=True, full=True)


@dataclass(frozen=True)
class Partition:
    """Circularly ordered distinct points x_0, ..., x_{n-1} (cyclically closed)."""

    points: tuple[CirclePoint, ...]

    def __post_init__(self):
        pts = tuple(pt(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("a partition needs at least two points")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            if a == b:
                raise DuplicatePoint("consecutive partition points coincide")
        if len(pts) >= 3 and not is_circularly_ordered(pts):
            raise ValueError("partition points are not circularly ordered")

    def __len__(self) -> int:
        return len(self.points)


def co3(a: CirclePoint, b: CirclePoint, c: CirclePoint) -> bool:
    """True iff the triple (a, b, c) appears in counterclockwise order.

    Lifting a to 0, this asks 0 < b' < c' < 1 for the lifted images.
    """
    a, b, c = pt(a), pt(b), pt(c)
    if a == b or b == c or a == c:
        raise DuplicatePoint(f"co3 needs distinct points, got {a}, {b}, {c}")
    bb = (b.value - a.value) % 1
    cc = (c.value - a.value) % 1
    return bb < cc


def is_circularly_ordered(points: Sequence[CirclePoint]) -> bool:
    """True iff every cyclically consecutive triple satisfies co3."""
    pts = [pt(p) for p in points]
    n = len(pts)
    if n < 3:
        raise ValueError("need at least three points")
    if len({p.value for p in pts}) != n:
        raise DuplicatePoint("points must be pairwise distinct")
    for i in range(n):
        if not co3(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]):
            return False
    return True


def arc_contains(arc: Arc, x: CirclePoint) -> bool:
    """Membership of x in the arc; endpoints included iff the arc is closed."""
    x = pt(x)
    if arc.full:
        return True
    if x == arc.lo or x == arc.hi:
        return arc.closed
    if arc.lo == arc.hi:  # singleton [a, a]
        return False
    return co3(arc.lo, x, arc.hi)


def circle_dist(x: CirclePoint, y: CirclePoint) -> Fraction:
    """Shorter-way distance on the circle; lies in [0, 1/2]."""
    d = (pt(x).value - pt(y).value) % 1
    return min(d, 1 - d)


def total_variation(values: Sequence[float], partition: Partition | None = None) -> float:
    """Cyclic sum of |φ(x_i) − φ(x_{i+1})| over a partition's sample values.

    This is a lower bound for the true total variation of φ.
    """
    if partition is not None and len(partition) != len(values):
        raise LengthMismatch(
            f"{len(values)} values for a partition of {len(partition)} points"
        )
    n = len(values)
    if n == 0:
        return 0.0
    return float(sum(abs(values[i] - values[(i + 1) % n]) for i in range(n)))


def sort_circular(points: Iterable[CirclePoint]) -> list[CirclePoint]:
    """Distinct points sorted counterclockwise starting at the smallest value."""
    uniq = sorted({pt(p).value for p in points})
    return [CirclePoint(v) for v in uniq]
