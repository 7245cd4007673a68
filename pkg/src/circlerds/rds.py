"""The random system (F, ν): spec, validation, word sampling, random walks.

Words are consumed left to right: walk(x, (i_1, ..., i_n)) applies map i_1
first, matching the composition convention f_n ∘ ... ∘ f_1.  All modules go
through :func:`walk`; nothing composes ad hoc.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .circle import CirclePoint, pt
from .errors import BudgetExceeded, InvalidWeights, SpecFormatError
from .homeo import (
    Homeo,
    PiecewiseLinear,
    Reflection,
    Rotation,
    compose,
    eval_fraction,
    fixed_points,
    invert,
)
from .errors import EverywhereFixed

Word = tuple[int, ...]
EMPTY_WORD: Word = ()


@dataclass(frozen=True)
class SystemSpec:
    """A finite family of circle homeomorphisms with strictly positive weights."""

    maps: tuple[Homeo, ...]
    weights: tuple[Fraction, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.maps) == 0:
            raise InvalidWeights("a system needs at least one map")
        ws = tuple(Fraction(w) for w in self.weights)
        if len(ws) != len(self.maps):
            raise InvalidWeights("one weight per map required")
        if any(w <= 0 for w in ws):
            raise InvalidWeights("weights must be strictly positive")
        if sum(ws) != 1:
            raise InvalidWeights(f"weights sum to {sum(ws)}, not 1")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def size(self) -> int:
        return len(self.maps)


@dataclass(frozen=True)
class Trajectory:
    start: CirclePoint
    word: Word
    points: tuple[CirclePoint, ...]


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    max_period: int
    witness: tuple[CirclePoint, ...] = ()
    note: str = ""


def walk(system: SystemSpec, x: CirclePoint, word: Word) -> Trajectory:
    """Exact trajectory x, f_{i1}(x), f_{i2}(f_{i1}(x)), ..."""
    x = pt(x)
    v = x.value
    points = [x]
    for i in word:
        v = eval_fraction(system.maps[i], v)
        points.append(CirclePoint(v))
    return Trajectory(start=x, word=tuple(word), points=tuple(points))


def invert_system(system: SystemSpec) -> SystemSpec:
    """The inverse system: every map inverted, weights carried over."""
    return SystemSpec(
        maps=tuple(invert(f) for f in system.maps),
        weights=system.weights,
        label=system.label + "^-" if system.label else "",
    )


# ---------------------------------------------------------------------------
# Counter-based word sampling
# ---------------------------------------------------------------------------

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, sample_index, position) -> np.ndarray:
    """U(0,1) variates keyed on (seed, sample_index, position).

    Pure counter-based function: any entry can be regenerated in isolation,
    so results never depend on evaluation order or worker count.
    """
    with np.errstate(over="ignore"):
        s = np.asarray(sample_index, dtype=np.uint64)
        t = np.asarray(position, dtype=np.uint64)
        key = _mix64(_mix64(np.uint64(seed) + _GOLDEN) + _GOLDEN)
        z = _mix64(((s << np.uint64(21)) + t) ^ key)
    return ((z >> np.uint64(11)).astype(np.float64)) * (2.0**-53)


def letter_cdf(system: SystemSpec) -> np.ndarray:
    """Cumulative weights as floats, for inverse-CDF letter draws."""
    return np.cumsum([float(w) for w in system.weights])[:-1]


def sample_word(system: SystemSpec, rng_seed: int, sample_index: int, length: int) -> Word:
    """Reproducible i.i.d. ν-word for the given (seed, sample index)."""
    if length < 0:
        raise ValueError("length must be non-negative")
    if length == 0:
        return EMPTY_WORD
    u = uniforms(rng_seed, np.full(length, sample_index, dtype=np.uint64),
                 np.arange(length, dtype=np.uint64))
    cdf = letter_cdf(system)
    return tuple(int(k) for k in np.searchsorted(cdf, u, side="right"))


# ---------------------------------------------------------------------------
# No-finite-orbit validation
# ---------------------------------------------------------------------------


def _periodic_points(f: Homeo, max_period: int, budget: int) -> set[Fraction] | None:
    """Points of period ≤ max_period under f alone; None means 'everything'."""
    pts: set[Fraction] = set()
    g = f
    for k in range(1, max_period + 1):
        try:
            fixed = fixed_points(g)
        except EverywhereFixed:
            # f^k = id: every point is k-periodic
            return None
        pts.update(p.value for p, _ in fixed)
        if len(pts) > budget:
            raise BudgetExceeded("periodic candidate set exceeded budget")
        if k < max_period:
            g = compose(f, g)
    return pts


def _orbit_closure(system: SystemSpec, start: Fraction, budget: int) -> set[Fraction] | None:
    """Finite orbit of a point under the whole family, or None past budget."""
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for f in system.maps:
            w = eval_fraction(f, v)
            if w not in seen:
                seen.add(w)
                if len(seen) > budget:
                    return None
                frontier.append(w)
    return seen


def validate_no_finite_orbit(
    system: SystemSpec, max_period: int = 6, node_budget: int = 10**6
) -> ValidationReport:
    """Search for a finite set invariant under every map, up to a bound.

    PASS means no invariant set of size ≤ max_period was found; it is a
    bounded search, not a certificate that none exists.  FAIL carries an
    invariant finite set as witness.
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    candidate_sets = []
    all_periodic = True
    for f in system.maps:
        pts = _periodic_points(f, max_period, node_budget)
        if pts is not None:
            all_periodic = False
            candidate_sets.append(pts)
    if all_periodic:
        # Every map has a power equal to the identity (finite-order
        # isometries): grow orbits from each map's fixed points and 0.
        starts = {Fraction(0)}
        for f in system.maps:
            try:
                starts.update(p.value for p, _ in fixed_points(f))
            except EverywhereFixed:
                pass
        best: set[Fraction] | None = None
        for s in sorted(starts):
            orbit = _orbit_closure(system, s, node_budget)
            if orbit is not None and (best is None or len(orbit) < len(best)):
                best = orbit
        if best is not None:
            witness = tuple(CirclePoint(v) for v in sorted(best))
            return ValidationReport(
                False, max_period, witness,
                note="finite orbit of an isometry family",
            )
        return ValidationReport(
            True, max_period,
            note="no finite orbit found within the node budget",
        )
    candidates = set.intersection(*candidate_sets) if candidate_sets else set()
    # a finite invariant set is permuted by every map, so each of its points
    # is ≤ max_period-periodic under every single map; peel candidates whose
    # image leaves the candidate set
    cand = set(candidates)
    changed = True
    while changed and cand:
        changed = False
        for v in list(cand):
            for f in system.maps:
                if eval_fraction(f, v) not in cand:
                    cand.discard(v)
                    changed = True
                    break
    if cand:
        witness = tuple(CirclePoint(v) for v in sorted(cand))
        return ValidationReport(False, max_period, witness)
    return ValidationReport(
        True, max_period,
        note=f"no invariant set of size ≤ {max_period} exists; hypothesis "
             "holds up to this bound only",
    )


# ---------------------------------------------------------------------------
# JSON system-spec files
# ---------------------------------------------------------------------------

_MAP_KEYS = {
    "pl": {"type", "orientation", "breakpoints"},
    "rotation": {"type", "angle"},
    "reflection": {"type", "c"},
}


def _frac(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    raise SpecFormatError(f"rationals must be strings like '1/3', got {s!r}")


def _map_to_json(f: Homeo) -> dict:
    if isinstance(f, Rotation):
        return {"type": "rotation", "angle": str(f.angle)}
    if isinstance(f, Reflection):
        return {"type": "reflection", "c": str(f.c)}
    return {
        "type": "pl",
        "orientation": "reversing" if f.reversing else "preserving",
        "breakpoints": [[str(x), str(y)] for x, y in zip(f.xs, f.ys)],
    }


def _map_from_json(obj: dict) -> Homeo:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SpecFormatError(f"bad map object: {obj!r}")
    kind = obj["type"]
    if kind not in _MAP_KEYS:
        raise SpecFormatError(f"unknown map type {kind!r}")
    extra = set(obj) - _MAP_KEYS[kind]
    if extra:
        raise SpecFormatError(f"unknown keys {sorted(extra)} in map object")
    try:
        if kind == "rotation":
            return Rotation(_frac(obj["angle"]))
        if kind == "reflection":
            return Reflection(_frac(obj["c"]))
        orientation = obj["orientation"]
        if orientation not in ("preserving", "reversing"):
            raise SpecFormatError(f"bad orientation {orientation!r}")
        bps = obj["breakpoints"]
        xs = tuple(_frac(p[0]) for p in bps)
        ys = tuple(_frac(p[1]) for p in bps)
        return PiecewiseLinear(xs, ys, reversing=orientation == "reversing")
    except SpecFormatError:
        raise
    except (KeyError, IndexError, TypeError, ValueError, ZeroDivisionError) as e:
        raise SpecFormatError(f"bad map object: {e}") from e


def system_to_json(system: SystemSpec) -> dict:
    return {
        "label": system.label,
        "maps": [_map_to_json(f) for f in system.maps],
        "weights": [str(w) for w in system.weights],
    }


def system_from_json(obj: dict) -> SystemSpec:
    if not isinstance(obj, dict):
        raise SpecFormatError("top level must be an object")
    extra = set(obj) - {"label", "maps", "weights"}
    if extra:
        raise SpecFormatError(f"unknown top-level keys {sorted(extra)}")
    try:
        maps = tuple(_map_from_json(m) for m in obj["maps"])
        weights = tuple(_frac(w) for w in obj["weights"])
        label = obj.get("label", "")
        if not isinstance(label, str):
            raise SpecFormatError("label must be a string")
        return SystemSpec(maps=maps, weights=weights, label=label)
    except SpecFormatError:
        raise
    except InvalidWeights:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise SpecFormatError(f"bad system spec: {e}") from e


def load_system(path: str | Path) -> SystemSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
        obj = json.loads(text)
    except (OSError, json.JSONDecodeError) as e:
        raise SpecFormatError(f"cannot read system spec {path}: {e}") from e
    return system_from_json(obj)


def save_system(system: SystemSpec, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(system_to_json(system), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
