"""Circle homeomorphisms with exact evaluation, inversion and composition.

Three representations: piecewise-linear maps with rational breakpoints,
rotations, and reflections.  Isometries compose among themselves in closed
form; anything involving a PL map goes through an exact PL composite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .circle import Arc, CirclePoint, FULL_CIRCLE, is_circularly_ordered, pt
from .errors import EverywhereFixed

Stability = str  # "attracting" | "repelling" | "neutral" | "one-sided"


@dataclass(frozen=True)
class Rotation:
    """x ↦ (x + angle) mod 1."""

    angle: Fraction

    def __post_init__(self):
        object.__setattr__(self, "angle", Fraction(self.angle) % 1)

    @property
    def orientation_reversing(self) -> bool:
        return False


@dataclass(frozen=True)
class Reflection:
    """x ↦ (c − x) mod 1; fixes c/2 and c/2 + 1/2."""

    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c) % 1)

    @property
    def orientation_reversing(self) -> bool:
        return True


@dataclass(frozen=True)
class PiecewiseLinear:
    """PL circle homeomorphism given by breakpoint pairs (x_k, y_k).

    Breakpoints are normalized so the x's are sorted increasingly in [0, 1).
    Between consecutive breakpoints the map interpolates linearly on lifts;
    an orientation-reversing map traverses the y's clockwise.
    """

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]
    reversing: bool = False

    def __post_init__(self):
        xs = tuple(Fraction(x) % 1 for x in self.xs)
        ys = tuple(Fraction(y) % 1 for y in self.ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise ValueError("need at least two breakpoint pairs")
        order = sorted(range(len(xs)), key=lambda k: xs[k])
        xs = tuple(xs[k] for k in order)
        ys = tuple(ys[k] for k in order)
        if len(set(xs)) != len(xs):
            raise ValueError("duplicate breakpoint x-coordinates")
        if len(set(ys)) != len(ys):
            raise ValueError("duplicate breakpoint y-coordinates")
        seq = ys if not self.reversing else tuple(reversed(ys))
        if len(xs) >= 3 and not is_circularly_ordered([pt(y) for y in seq]):
            raise ValueError("breakpoint images violate the orientation flag")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def orientation_reversing(self) -> bool:
        return self.reversing


Homeo = Union[PiecewiseLinear, Rotation, Reflection]


def orientation_reversing(f: Homeo) -> bool:
    return f.orientation_reversing


def as_pl(f: Homeo) -> PiecewiseLinear:
    """Exact PL form of any homeomorphism (isometries get two breakpoints)."""
    if isinstance(f, PiecewiseLinear):
        return f
    if isinstance(f, Rotation):
        return PiecewiseLinear(
            (Fraction(0), Fraction(1, 2)),
            (f.angle, (f.angle + Fraction(1, 2)) % 1),
            reversing=False,
        )
    return PiecewiseLinear(
        (Fraction(0), Fraction(1, 2)),
        (f.c, (f.c - Fraction(1, 2)) % 1),
        reversing=True,
    )


def _pl_eval_fraction(f: PiecewiseLinear, x: Fraction) -> Fraction:
    x = x % 1
    xs, ys = f.xs, f.ys
    m = len(xs)
    # piece index: largest k with xs[k] <= x, wrapping below xs[0]
    lo, hi = 0, m - 1
    if x < xs[0]:
        k = m - 1
    else:
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        k = lo
    k2 = (k + 1) % m
    lx = (xs[k2] - xs[k]) % 1
    t = (x - xs[k]) % 1
    if not f.reversing:
        ly = (ys[k2] - ys[k]) % 1
        return (ys[k] + t * ly / lx) % 1
    ly = (ys[k] - ys[k2]) % 1
    return (ys[k] - t * ly / lx) % 1


def evaluate(f: Homeo, x: CirclePoint) -> CirclePoint:
    """Exact image of a point."""
    v = pt(x).value
    if isinstance(f, Rotation):
        return CirclePoint(v + f.angle)
    if isinstance(f, Reflection):
        return CirclePoint(f.c - v)
    return CirclePoint(_pl_eval_fraction(f, v))


def eval_fraction(f: Homeo, v: Fraction) -> Fraction:
    """Exact image of a rational, as a rational (hot-path helper)."""
    if isinstance(f, Rotation):
        return (v + f.angle) % 1
    if isinstance(f, Reflection):
        return (f.c - v) % 1
    return _pl_eval_fraction(f, v)


def invert(f: Homeo) -> Homeo:
    """Exact inverse; a reflection is its own inverse."""
    if isinstance(f, Rotation):
        return Rotation(-f.angle)
    if isinstance(f, Reflection):
        return f
    pairs = sorted(zip(f.ys, f.xs))
    return PiecewiseLinear(
        tuple(y for y, _ in pairs), tuple(x for _, x in pairs), reversing=f.reversing
    )


def _simplify_pl(f: PiecewiseLinear) -> PiecewiseLinear:
    """Drop breakpoints where adjacent pieces share their slope."""
    m = len(f.xs)
    if m <= 2:
        return f
    keep = []
    for k in range(m):
        prv, nxt = (k - 1) % m, (k + 1) % m
        lx1 = (f.xs[k] - f.xs[prv]) % 1
        lx2 = (f.xs[nxt] - f.xs[k]) % 1
        if not f.reversing:
            ly1 = (f.ys[k] - f.ys[prv]) % 1
            ly2 = (f.ys[nxt] - f.ys[k]) % 1
        else:
            ly1 = (f.ys[prv] - f.ys[k]) % 1
            ly2 = (f.ys[k] - f.ys[nxt]) % 1
        if ly1 * lx2 != ly2 * lx1:
            keep.append(k)
    if len(keep) < 2:
        keep = [0, m // 2]
    if len(keep) == m:
        return f
    return PiecewiseLinear(
        tuple(f.xs[k] for k in keep), tuple(f.ys[k] for k in keep), reversing=f.reversing
    )


def compose(f: Homeo, g: Homeo) -> Homeo:
    """Exact composite f∘g (g applied first)."""
    if isinstance(f, Rotation) and isinstance(g, Rotation):
        return Rotation(f.angle + g.angle)
    if isinstance(f, Rotation) and isinstance(g, Reflection):
        return Reflection(g.c + f.angle)
    if isinstance(f, Reflection) and isinstance(g, Rotation):
        return Reflection(f.c - g.angle)
    if isinstance(f, Reflection) and isinstance(g, Reflection):
        return Rotation(f.c - g.c)
    fp, gp = as_pl(f), as_pl(g)
    ginv = invert(gp)
    breaks = set(gp.xs)
    for bx in fp.xs:
        breaks.add(_pl_eval_fraction(ginv, bx))
    xs = tuple(sorted(breaks))
    ys = tuple(_pl_eval_fraction(fp, _pl_eval_fraction(gp, x)) for x in xs)
    return _simplify_pl(
        PiecewiseLinear(xs, ys, reversing=fp.reversing != gp.reversing)
    )


def image_arc(f: Homeo, arc: Arc) -> Arc:
    """Exact image of an arc; endpoints swap when f reverses orientation."""
    if arc.full:
        return FULL_CIRCLE
    a = evaluate(f, arc.lo)
    b = evaluate(f, arc.hi)
    if orientation_reversing(f):
        a, b = b, a
    return Arc(a, b, closed=arc.closed)


def _classify(slope_left: Fraction, slope_right: Fraction, reversing: bool) -> Stability:
    sl, sr = abs(slope_left), abs(slope_right)
    if sl < 1 and sr < 1:
        return "attracting"
    if sl > 1 and sr > 1:
        return "repelling"
    if sl == 1 and sr == 1:
        return "neutral"
    return "one-sided"


def fixed_points(f: Homeo) -> list[tuple[CirclePoint, Stability]]:
    """Exact fixed points with one-sided-slope stability classification.

    Raises EverywhereFixed for the identity (or any map fixing a whole
    piece on every piece).  A PL map fixing a proper sub-arc pointwise has
    that arc's endpoints reported as "one-sided".
    """
    if isinstance(f, Rotation):
        if f.angle == 0:
            raise EverywhereFixed("identity rotation")
        return []
    if isinstance(f, Reflection):
        half = f.c / 2
        return [
            (CirclePoint(half), "neutral"),
            (CirclePoint(half + Fraction(1, 2)), "neutral"),
        ]
    m = len(f.xs)
    found: set[Fraction] = set()
    segment_ends: set[Fraction] = set()
    fixed_piece_count = 0
    for k in range(m):
        k2 = (k + 1) % m
        lx = (f.xs[k2] - f.xs[k]) % 1
        if not f.reversing:
            ly = (f.ys[k2] - f.ys[k]) % 1
            slope = ly / lx
        else:
            ly = (f.ys[k] - f.ys[k2]) % 1
            slope = -ly / lx
        # on the piece, displacement h(t) = (y_k - x_k) + t (slope - 1) mod 1
        h0 = (f.ys[k] - f.xs[k]) % 1
        if h0 > Fraction(1, 2):
            h0 -= 1  # symmetric representative keeps candidates small
        if slope == 1:
            if h0 % 1 == 0:
                fixed_piece_count += 1
                segment_ends.update({f.xs[k], f.xs[k2]})
            continue
        hmin = min(h0, h0 + lx * (slope - 1))
        hmax = max(h0, h0 + lx * (slope - 1))
        z = -(-hmin // 1)  # ceil
        while z <= hmax:
            t = (z - h0) / (slope - 1)
            if 0 <= t <= lx:
                found.add((f.xs[k] + t) % 1)
            z += 1
    if fixed_piece_count == m:
        raise EverywhereFixed("map is the identity")
    found |= segment_ends
    out = []
    for v in sorted(found):
        sl = _slope_at(f, v, side=-1)
        sr = _slope_at(f, v, side=+1)
        out.append((CirclePoint(v), _classify(sl, sr, f.reversing)))
    return out


def _slope_at(f: PiecewiseLinear, v: Fraction, side: int) -> Fraction:
    """Signed slope of the piece just clockwise (side<0) or ccw (side>0) of v."""
    m = len(f.xs)
    idx = None
    for k in range(m):
        k2 = (k + 1) % m
        lx = (f.xs[k2] - f.xs[k]) % 1
        d = (v - f.xs[k]) % 1
        interior = d < lx if side > 0 else (0 < d <= lx)
        if (d == 0 and side > 0) or interior:
            idx = k
            break
    assert idx is not None
    k2 = (idx + 1) % m
    lx = (f.xs[k2] - f.xs[idx]) % 1
    if not f.reversing:
        return ((f.ys[k2] - f.ys[idx]) % 1) / lx
    return -((f.ys[idx] - f.ys[k2]) % 1) / lx
