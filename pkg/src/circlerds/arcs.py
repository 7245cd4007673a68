"""Finite unions of closed arcs with exact rational endpoints.

The canonical form is a sorted tuple of pairwise disjoint, non-touching
closed arcs, each stored as (start, length) with start in [0, 1).  Arcs that
touch at an endpoint are merged, so membership and containment queries are
unambiguous.  The full circle is its own canonical value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circle import FULL_CIRCLE, Arc, CirclePoint, pt

_ONE = Fraction(1)


@dataclass(frozen=True)
class ArcUnion:
    """Union of finitely many closed arcs (possibly empty, possibly all of S¹)."""

    segments: tuple[tuple[Fraction, Fraction], ...]  # (start, length), canonical
    full: bool = False

    # -- constructors ------------------------------------------------------

    @staticmethod
    def empty() -> "ArcUnion":
        return ArcUnion((), full=False)

    @staticmethod
    def full_circle() -> "ArcUnion":
        return ArcUnion((), full=True)

    @staticmethod
    def from_arcs(arcs) -> "ArcUnion":
        segs = []
        for a in arcs:
            if isinstance(a, Arc):
                if a.full:
                    return ArcUnion.full_circle()
                lo, hi = a.lo.value, a.hi.value
            else:
                lo, hi = Fraction(a[0]) % 1, Fraction(a[1]) % 1
            length = (hi - lo) % 1
            segs.append((lo, length))
        return ArcUnion._canonical(segs)

    @staticmethod
    def from_endpoints(lo, hi) -> "ArcUnion":
        return ArcUnion.from_arcs([(lo, hi)])

    @staticmethod
    def _canonical(segs: list[tuple[Fraction, Fraction]]) -> "ArcUnion":
        if not segs:
            return ArcUnion.empty()
        if any(ln >= 1 for _, ln in segs):
            return ArcUnion.full_circle()
        segs = sorted((s % 1, ln) for s, ln in segs)
        merged: list[list[Fraction]] = []
        for s, ln in segs:
            if merged and s <= merged[-1][0] + merged[-1][1]:
                end = max(merged[-1][0] + merged[-1][1], s + ln)
                merged[-1][1] = end - merged[-1][0]
            else:
                merged.append([s, ln])
        # wrap: last segment may reach past 1 into the first ones
        while len(merged) > 1 and merged[-1][0] + merged[-1][1] >= merged[0][0] + 1:
            first = merged.pop(0)
            end = max(merged[-1][0] + merged[-1][1], first[0] + first[1] + 1)
            merged[-1][1] = end - merged[-1][0]
        if merged[0][1] >= 1:
            return ArcUnion.full_circle()
        return ArcUnion(tuple((s, ln) for s, ln in merged))

    # -- queries -----------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.full and not self.segments

    def total_length(self) -> Fraction:
        if self.full:
            return _ONE
        return sum((ln for _, ln in self.segments), Fraction(0))

    def arcs(self) -> list[Arc]:
        if self.full:
            return [FULL_CIRCLE]
        return [Arc.closed_arc(s, (s + ln) % 1) for s, ln in self.segments]

    def contains_point(self, x) -> bool:
        if self.full:
            return True
        v = pt(x).value if not isinstance(x, Fraction) else x % 1
        if isinstance(x, CirclePoint):
            v = x.value
        for s, ln in self.segments:
            d = (v - s) % 1
            if d <= ln:
                return True
        return False

    def contains_arc(self, arc: Arc) -> bool:
        """True iff the (closed) arc lies inside a single segment."""
        if self.full:
            return True
        if arc.full:
            return False
        lo, length = arc.lo.value, arc.length()
        for s, ln in self.segments:
            d = (lo - s) % 1
            if d <= ln and d + length <= ln:
                return True
        return False

    def contains_union(self, other: "ArcUnion") -> bool:
        if self.full:
            return True
        if other.full:
            return False
        return all(self.contains_arc(a) for a in other.arcs())

    # -- set operations ----------------------------------------------------

    def union(self, other: "ArcUnion") -> "ArcUnion":
        if self.full or other.full:
            return ArcUnion.full_circle()
        return ArcUnion._canonical(list(self.segments) + list(other.segments))

    def intersect(self, other: "ArcUnion") -> "ArcUnion":
        if self.full:
            return other
        if other.full:
            return self
        out = []
        for s1, l1 in self.segments:
            for s2, l2 in other.segments:
                # compare on the universal cover; other segment may sit one
                # turn to either side
                for shift in (-1, 0, 1):
                    a, b = s2 + shift, s2 + shift + l2
                    lo = max(s1, a)
                    hi = min(s1 + l1, b)
                    if lo <= hi:
                        out.append((lo % 1, hi - lo))
        return ArcUnion._canonical(out)

    def dilate(self, eps: Fraction) -> "ArcUnion":
        if self.full:
            return self
        return ArcUnion._canonical(
            [((s - eps) % 1, ln + 2 * eps) for s, ln in self.segments]
        )

    def gaps(self) -> "list[Arc]":
        """Closed arcs between consecutive segments (complement closure)."""
        if self.full or not self.segments:
            return [] if self.full else [FULL_CIRCLE]
        out = []
        n = len(self.segments)
        for i in range(n):
            s, ln = self.segments[i]
            t, _ = self.segments[(i + 1) % n]
            out.append(Arc.closed_arc((s + ln) % 1, t))
        return out

    def __iter__(self):
        return iter(self.arcs())
