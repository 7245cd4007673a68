"""Vectorized Monte Carlo orbit engine.

Orbits are simulated in float64 batches; the structural layers (arc images,
interval families, graphs) stay in exact rational arithmetic.  For the
shipped systems all map data is dyadic, so the float dynamics is exact
until values leave the 53-bit range, far below the classification scale.

Letters come from the same counter-based generator as
:func:`circlerds.rds.sample_word`, keyed on (seed, trajectory stream id,
position), so batch results are reproducible point functions of the seed
and never depend on chunking or evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arcs import ArcUnion
from .homeo import PiecewiseLinear, Reflection, Rotation, orientation_reversing
from .minimal import MinimalSetApprox
from .rds import SystemSpec, letter_cdf, uniforms

_MAX_TABLE = 2**16


def _table_resolution(system: SystemSpec, region_n: int) -> int | None:
    """Smallest power-of-two grid aligned with every PL breakpoint, or None."""
    t = region_n
    while t <= _MAX_TABLE:
        ok = True
        for f in system.maps:
            if isinstance(f, PiecewiseLinear):
                if any((x * t).denominator != 1 for x in f.xs):
                    ok = False
                    break
        if ok:
            return t
        t *= 2
    return None


@dataclass
class RegionTables:
    """Cell-aligned lookup tables for the ε-neighbourhoods of the minimal sets."""

    resolution: int
    owner: np.ndarray          # int8, -1 outside every region
    arc_bit: np.ndarray        # uint64 component bit, 0 outside
    required: np.ndarray       # uint64 per owner: all component bits
    unions: list[ArcUnion]     # exact dilated unions, one per minimal set


def build_regions(ks: list[MinimalSetApprox], eps: Fraction) -> RegionTables:
    """ε-dilated minimal-set neighbourhoods as exact cell-aligned tables."""
    n = ks[0].resolution
    r = n
    while (eps * r).denominator != 1:
        r *= 2
        if r > _MAX_TABLE:
            raise ValueError("eps_cluster is not dyadic at a usable table size")
    owner = np.full(r, -1, dtype=np.int8)
    arc_bit = np.zeros(r, dtype=np.uint64)
    required = np.zeros(len(ks), dtype=np.uint64)
    unions = []
    bit = 0
    for i, ms in enumerate(ks):
        dil = ms.arcs.dilate(eps)
        unions.append(dil)
        for j, other in enumerate(unions[:-1]):
            if not dil.intersect(other).is_empty():
                raise ValueError(
                    f"ε-neighbourhoods of minimal sets {j + 1} and {i + 1} "
                    "overlap; decrease eps_cluster or refine the grid"
                )
        if dil.full:
            comps = [dil]
        else:
            comps = [ArcUnion.from_arcs([a]) for a in dil.arcs()]
        for comp in comps:
            if bit >= 64:
                raise ValueError("more than 64 region components")
            if comp.full:
                cells = np.arange(r)
            else:
                cells = []
                for s, ln in comp.segments:
                    first = int(s * r)
                    cells.extend(k % r for k in range(first, first + int(ln * r)))
                cells = np.array(sorted(set(cells)), dtype=np.int64)
            owner[cells] = i
            arc_bit[cells] |= np.uint64(1 << bit)
            required[i] |= np.uint64(1 << bit)
            bit += 1
    return RegionTables(r, owner, arc_bit, required, unions)


class OrbitEngine:
    """Batch evaluator for one system at a fixed region/table resolution."""

    def __init__(self, system: SystemSpec, regions: RegionTables | None, seed: int):
        self.system = system
        self.regions = regions
        self.seed = seed
        self.cdf = letter_cdf(system)
        base = regions.resolution if regions is not None else 4096
        self.table_n = _table_resolution(system, base)
        if self.table_n is not None:
            self._build_tables(self.table_n)
        else:
            self._prep_fallback()

    def _build_tables(self, t: int) -> None:
        m = len(self.system.maps)
        slope = np.empty((m, t))
        icept = np.empty((m, t))
        for k, f in enumerate(self.system.maps):
            if isinstance(f, Rotation):
                slope[k] = 1.0
                icept[k] = float(f.angle)
            elif isinstance(f, Reflection):
                slope[k] = -1.0
                icept[k] = float(f.c)
            else:
                slope[k], icept[k] = self._pl_cellwise(f, t)
        self.slope = slope.reshape(-1)
        self.icept = icept.reshape(-1)

    @staticmethod
    def _pl_cellwise(f: PiecewiseLinear, t: int):
        sl = np.empty(t)
        ic = np.empty(t)
        m = len(f.xs)
        for k in range(m):
            k2 = (k + 1) % m
            x0, y0 = f.xs[k], f.ys[k]
            lx = (f.xs[k2] - f.xs[k]) % 1
            if not f.reversing:
                s = ((f.ys[k2] - f.ys[k]) % 1) / lx
            else:
                s = -((f.ys[k] - f.ys[k2]) % 1) / lx
            first = int(x0 * t)
            count = int(lx * t)
            for j in range(count):
                cell = (first + j) % t
                # cells past the wrap see x one turn below the lift of x0
                shift = 1 if first + j >= t else 0
                sl[cell] = float(s)
                ic[cell] = float(y0 - s * x0 + s * shift)
        return sl, ic

    def _prep_fallback(self) -> None:
        self._fb = []
        for f in self.system.maps:
            if isinstance(f, Rotation):
                self._fb.append(("rot", float(f.angle)))
            elif isinstance(f, Reflection):
                self._fb.append(("ref", float(f.c)))
            else:
                m = len(f.xs)
                xs = np.array([float(x) for x in f.xs])
                sl = np.empty(m)
                ic = np.empty(m)
                for k in range(m):
                    k2 = (k + 1) % m
                    lx = float((f.xs[k2] - f.xs[k]) % 1)
                    if not f.reversing:
                        s = float((f.ys[k2] - f.ys[k]) % 1) / lx
                    else:
                        s = -float((f.ys[k] - f.ys[k2]) % 1) / lx
                    sl[k] = s
                    ic[k] = float(f.ys[k]) - s * float(f.xs[k])
                self._fb.append(("pl", (xs, sl, ic)))

    def letters(self, stream_ids: np.ndarray, t: int) -> np.ndarray:
        u = uniforms(self.seed, stream_ids, np.uint64(t))
        out = np.zeros(len(stream_ids), dtype=np.int64)
        for c in self.cdf:
            out += u > c
        return out

    def step(self, x: np.ndarray, letters: np.ndarray) -> np.ndarray:
        if self.table_n is not None:
            idx = (x * self.table_n).astype(np.int64)
            np.clip(idx, 0, self.table_n - 1, out=idx)
            flat = letters * self.table_n + idx
            y = self.icept[flat] + self.slope[flat] * x
        else:
            y = np.empty_like(x)
            for k, (kind, data) in enumerate(self._fb):
                mask = letters == k
                if not mask.any():
                    continue
                xv = x[mask]
                if kind == "rot":
                    y[mask] = xv + data
                elif kind == "ref":
                    y[mask] = data - xv
                else:
                    xs, sl, ic = data
                    piece = np.searchsorted(xs, xv, side="right") - 1
                    y[mask] = ic[piece] + sl[piece] * xv
        y -= np.floor(y)
        return y

    def run(
        self,
        probe_values: np.ndarray,
        samples: int,
        n_steps: int,
        burn: int,
        stream_base: int = 0,
        chunk: int = 1 << 20,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Classify `samples` random orbits from every probe point.

        Returns (counts, unclassified): counts has shape (probes, d).
        Stream ids are stream_base + probe_slot * samples + sample.
        """
        if self.regions is None:
            raise ValueError("classification run needs region tables")
        n_probes = len(probe_values)
        d = len(self.regions.required)
        counts = np.zeros((n_probes, d), dtype=np.int64)
        uncl = np.zeros(n_probes, dtype=np.int64)
        total = n_probes * samples
        for lo in range(0, total, chunk):
            hi = min(lo + chunk, total)
            self._run_chunk(lo, hi, probe_values, samples, n_steps, burn,
                            stream_base, counts, uncl)
        return counts, uncl

    def _run_chunk(self, lo, hi, probe_values, samples, n_steps, burn,
                   stream_base, counts, uncl) -> None:
        reg = self.regions
        idx_all = np.arange(lo, hi, dtype=np.int64)
        probe_ids = idx_all // samples
        x = probe_values[probe_ids].astype(np.float64)
        streams = (idx_all + stream_base).astype(np.uint64)
        own0 = np.full(len(x), -2, dtype=np.int8)
        bad = np.zeros(len(x), dtype=bool)
        visited = np.zeros(len(x), dtype=np.uint64)

        def observe(xv, sel=slice(None)):
            ridx = (xv * reg.resolution).astype(np.int64)
            np.clip(ridx, 0, reg.resolution - 1, out=ridx)
            o = reg.owner[ridx]
            fresh = own0[sel] == -2
            if fresh.any():
                tmp = own0[sel]
                tmp[fresh] = o[fresh]
                own0[sel] = tmp
            bad[sel] |= (o != own0[sel]) | (o < 0)
            visited[sel] |= reg.arc_bit[ridx]

        if burn == 0:
            observe(x)
        compact_every = 32
        active = np.arange(len(x), dtype=np.int64)
        for t in range(n_steps):
            lets = self.letters(streams[active], t)
            x[active] = self.step(x[active], lets)
            if t + 1 >= burn:
                observe(x[active], active)
                if (t + 1 - burn) % compact_every == compact_every - 1:
                    need = reg.required[np.maximum(own0[active], 0)]
                    done = bad[active] | (
                        (own0[active] >= 0)
                        & ((visited[active] & need) == need)
                    )
                    active = active[~done]
                    if len(active) == 0:
                        break
        ok = (~bad) & (own0 >= 0)
        need = reg.required[np.maximum(own0, 0)]
        ok &= (visited & need) == need
        for i in range(len(reg.required)):
            sel = ok & (own0 == i)
            np.add.at(counts[:, i], probe_ids[sel], 1)
        np.add.at(uncl, probe_ids[~ok], 1)
