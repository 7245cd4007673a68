"""Minimal invariant sets via a grid transition graph and its bottom SCCs.

Cells are the n closed dyadic arcs [k/n, (k+1)/n].  An edge c → c' exists
when some map's exact image of cell c meets cell c' (shared endpoints
count), so the graph outer-approximates the set-valued dynamics: the count
of bottom components can over-merge at coarse resolution but never
over-split.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .arcs import ArcUnion
from .circle import Arc
from .errors import NoBottomSCC
from .rds import SystemSpec
from .homeo import eval_fraction, orientation_reversing


@dataclass(frozen=True)
class GridApprox:
    """Uniform dyadic grid of n = 2^k ≥ 64 cells."""

    resolution: int

    def __post_init__(self):
        n = self.resolution
        if n < 64 or n & (n - 1):
            raise ValueError("resolution must be a power of two, at least 2^6")


@dataclass(frozen=True)
class MinimalSetApprox:
    """Outer approximation of one minimal set as a union of grid cells."""

    index: int                      # 1-based, ordered by smallest cell
    resolution: int
    cells: tuple[int, ...]          # sorted cell indices
    arcs: ArcUnion                  # the same cells as merged dyadic arcs

    @property
    def cell_count(self) -> int:
        return len(self.cells)


def cell_arcs(cells, resolution: int) -> ArcUnion:
    n = resolution
    return ArcUnion.from_arcs(
        [(Fraction(int(c), n), Fraction(int(c) + 1, n)) for c in cells]
    )


def _covering_cells(lo: Fraction, hi: Fraction, n: int) -> range:
    """Cells sharing a positive-length sub-arc with the arc [lo, hi].

    Positive overlap (rather than point contact at a shared boundary) keeps
    the union of target cells a cover of the image arc, so the graph still
    outer-approximates the dynamics, but an exact fixed cell boundary does
    not leak edges across itself.
    """
    lo, hi = lo % 1, hi % 1
    lon, hin = lo * n, hi * n
    first = int(lon)
    last = int(hin) - 1 if hin.denominator == 1 else int(hin)
    if hi <= lo:
        last += n
    if last < first:
        last += n
    if last - first >= n:
        return range(0, n)
    return range(first, last + 1)


def build_transition_graph(system: SystemSpec, grid: GridApprox) -> sparse.csr_matrix:
    """Boolean adjacency of the outer-approximating cell dynamics."""
    n = grid.resolution
    bounds = [Fraction(k, n) for k in range(n + 1)]
    rows, cols = [], []
    for f in system.maps:
        images = [eval_fraction(f, b) for b in bounds]
        rev = orientation_reversing(f)
        for c in range(n):
            lo, hi = images[c], images[c + 1]
            if rev:
                lo, hi = hi, lo
            for cc in _covering_cells(lo, hi, n):
                rows.append(c)
                cols.append(cc % n)
    data = np.ones(len(rows), dtype=bool)
    g = sparse.csr_matrix(
        (data, (np.array(rows), np.array(cols))), shape=(n, n), dtype=bool
    )
    g.sum_duplicates()
    return g


def _bottom_components(graph: sparse.csr_matrix) -> list[np.ndarray]:
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    coo = graph.tocoo()
    leaves_comp = np.ones(n_comp, dtype=bool)
    cross = labels[coo.row] != labels[coo.col]
    leaves_comp[labels[coo.row[cross]]] = False
    out = []
    for comp in np.flatnonzero(leaves_comp):
        out.append(np.flatnonzero(labels == comp))
    if not out:
        raise NoBottomSCC("graph has no terminal strongly-connected component")
    out.sort(key=lambda cells: int(cells[0]))
    return out


def minimal_sets(system: SystemSpec, grid: GridApprox) -> list[MinimalSetApprox]:
    """Bottom SCCs of the transition graph, labelled counterclockwise from 0."""
    graph = build_transition_graph(system, grid)
    comps = _bottom_components(graph)
    return [
        MinimalSetApprox(
            index=i + 1,
            resolution=grid.resolution,
            cells=tuple(int(c) for c in cells),
            arcs=cell_arcs(cells, grid.resolution),
        )
        for i, cells in enumerate(comps)
    ]


def _subgrid_minimal_sets(
    system: SystemSpec, coarse: list[MinimalSetApprox], fine_n: int
) -> list[MinimalSetApprox]:
    """Bottom SCCs of the fine graph restricted to the coarse cell union."""
    factor = fine_n // coarse[0].resolution
    fine_cells = sorted(
        c * factor + j for ms in coarse for c in ms.cells for j in range(factor)
    )
    pos = {c: k for k, c in enumerate(fine_cells)}
    m = len(fine_cells)
    rows, cols = [], []
    for f in system.maps:
        rev = orientation_reversing(f)
        for c in fine_cells:
            lo = eval_fraction(f, Fraction(c, fine_n))
            hi = eval_fraction(f, Fraction(c + 1, fine_n))
            if rev:
                lo, hi = hi, lo
            for cc in _covering_cells(lo, hi, fine_n):
                k = pos.get(cc % fine_n)
                if k is not None:
                    rows.append(pos[c])
                    cols.append(k)
    graph = sparse.csr_matrix(
        (np.ones(len(rows), dtype=bool), (np.array(rows), np.array(cols))),
        shape=(m, m), dtype=bool,
    )
    comps = _bottom_components(graph)
    cell_arr = np.array(fine_cells)
    return [
        MinimalSetApprox(
            index=i + 1,
            resolution=fine_n,
            cells=tuple(int(c) for c in cell_arr[cells]),
            arcs=cell_arcs(cell_arr[cells], fine_n),
        )
        for i, cells in enumerate(comps)
    ]


def refine(
    system: SystemSpec, coarse: list[MinimalSetApprox], target_resolution: int
) -> tuple[list[MinimalSetApprox], bool]:
    """Recompute inside the coarse approximation at a finer grid.

    Returns (fine sets, stable).  Stable means the count is unchanged and
    every fine set nests inside a coarse one; an unstable count signals the
    coarse resolution over-merged distinct minimal sets.
    """
    coarse_n = coarse[0].resolution
    if target_resolution % coarse_n or target_resolution <= coarse_n:
        raise ValueError("target must be a power-of-two multiple of the coarse grid")
    fine = _subgrid_minimal_sets(system, coarse, target_resolution)
    stable = len(fine) == len(coarse)
    if stable:
        for fs in fine:
            if not any(cs.arcs.contains_union(fs.arcs) for cs in coarse):
                stable = False
                break
    return fine, stable


def invariant_cell_check(system: SystemSpec, ms: MinimalSetApprox) -> bool:
    """Exact check that every map sends the cell-union arcs into themselves."""
    for f in system.maps:
        rev = orientation_reversing(f)
        for arc in ms.arcs.arcs():
            lo = eval_fraction(f, arc.lo.value)
            hi = eval_fraction(f, arc.hi.value)
            if rev:
                lo, hi = hi, lo
            if not ms.arcs.contains_arc(Arc.closed_arc(lo, hi)):
                return False
    return True


def grid_minimality_check(
    system: SystemSpec, graph: sparse.csr_matrix, ms: MinimalSetApprox, rng_seed: int = 0
) -> bool:
    """No proper sub-collection of the set's cells is graph-invariant.

    Brute force for ≤ 20 cells, otherwise one reachability probe from a
    deterministic start cell (strong connectivity implies the probe covers
    the whole component).
    """
    cells = np.array(ms.cells)
    sub = graph[cells][:, cells].tocsr()
    m = len(cells)
    if m == 1:
        return True
    if m <= 20:
        full = frozenset(range(m))
        for start in range(m):
            reach = {start}
            frontier = [start]
            while frontier:
                v = frontier.pop()
                for w in sub.indices[sub.indptr[v]:sub.indptr[v + 1]]:
                    if w not in reach:
                        reach.add(int(w))
                        frontier.append(int(w))
            if frozenset(reach) != full:
                return False
        return True
    start = rng_seed % m
    reach = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in sub.indices[sub.indptr[v]:sub.indptr[v + 1]]:
            if w not in reach:
                reach.add(int(w))
                frontier.append(int(w))
    return len(reach) == m
