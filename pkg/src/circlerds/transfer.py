"""Grid-discretized transfer operator and stationary measures.

The pushforward splits each cell's mass over the cells covering its exact
image arc, proportionally to overlap length (Ulam-type discretization):
deterministic, linear and mass-preserving up to float rounding, which is
renormalized away after every step and logged as drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse

from .circle import CirclePoint, pt
from .errors import NondisjointSupports, SupportLeak
from .homeo import eval_fraction, orientation_reversing
from .minimal import MinimalSetApprox
from .rds import SystemSpec

_MASS_TOL = 1e-12


@dataclass
class GridMeasure:
    """Probability vector over the n grid cells [k/n, (k+1)/n]."""

    resolution: int
    mass: np.ndarray
    drift_log: list = field(default_factory=list)

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        if len(self.mass) != self.resolution:
            raise ValueError("mass vector length must equal the resolution")
        if (self.mass < 0).any():
            raise ValueError("mass must be non-negative")
        total = self.mass.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mass sums to {total}, not 1")

    @staticmethod
    def point_mass(x: CirclePoint, resolution: int) -> "GridMeasure":
        m = np.zeros(resolution)
        cell = int(pt(x).value * resolution) % resolution
        m[cell] = 1.0
        return GridMeasure(resolution, m)

    @staticmethod
    def uniform(resolution: int) -> "GridMeasure":
        return GridMeasure(resolution, np.full(resolution, 1.0 / resolution))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def support_cells(self, threshold: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.mass > threshold)


def sup_cdf_distance(a: GridMeasure, b: GridMeasure) -> float:
    """Kolmogorov distance of the cellwise CDFs, anchored at cell 0."""
    if a.resolution != b.resolution:
        raise ValueError("resolutions differ")
    return float(np.max(np.abs(a.cdf() - b.cdf())))


def transfer_matrix(system: SystemSpec, resolution: int) -> sparse.csr_matrix:
    """Row-stochastic matrix M with (f_* μ)[c'] = Σ_c μ[c] M[c, c']."""
    n = resolution
    rows, cols, vals = [], [], []
    bounds = [Fraction(k, n) for k in range(n + 1)]
    for f, w in zip(system.maps, system.weights):
        images = [eval_fraction(f, b) for b in bounds]
        rev = orientation_reversing(f)
        wf = float(w)
        for c in range(n):
            lo, hi = images[c], images[c + 1]
            if rev:
                lo, hi = hi, lo
            length = (hi - lo) % 1
            start = lo * n
            first = int(start)
            offset = start - first
            remaining = length * n
            cell = first
            while remaining > 0:
                room = 1 - offset
                take = min(room, remaining)
                rows.append(c)
                cols.append(cell % n)
                vals.append(wf * float(take / (length * n)))
                remaining -= take
                offset = 0
                cell += 1
    m = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    m.sum_duplicates()
    return m


class TransferOperator:
    """Cached pushforward for one system at one resolution."""

    def __init__(self, system: SystemSpec, resolution: int):
        self.system = system
        self.resolution = resolution
        self.matrix = transfer_matrix(system, resolution)

    def push(self, mu: GridMeasure) -> GridMeasure:
        if mu.resolution != self.resolution:
            raise ValueError("measure resolution mismatch")
        out = self.matrix.T @ mu.mass
        total = out.sum()
        drift = abs(total - 1.0)
        out = out / total
        log = list(mu.drift_log)
        log.append(drift)
        return GridMeasure(self.resolution, out, drift_log=log)

    def cesaro_average(self, x: CirclePoint, n_steps: int) -> GridMeasure:
        """(1/N) Σ_{n<N} Pⁿ δ_x, iterated from the cell of x."""
        if n_steps < 1:
            raise ValueError("n_steps must be positive")
        cur = GridMeasure.point_mass(x, self.resolution)
        acc = cur.mass.copy()
        drift = []
        for _ in range(n_steps - 1):
            cur = self.push(cur)
            acc += cur.mass
            drift.extend(cur.drift_log[-1:])
        acc /= n_steps
        return GridMeasure(self.resolution, acc / acc.sum(), drift_log=drift)


def push_measure(system: SystemSpec, mu: GridMeasure) -> GridMeasure:
    return TransferOperator(system, mu.resolution).push(mu)


def cesaro_average(
    system: SystemSpec, x: CirclePoint, n_steps: int,
    resolution: int = 4096, operator: TransferOperator | None = None,
) -> GridMeasure:
    op = operator or TransferOperator(system, resolution)
    return op.cesaro_average(x, n_steps)


def stationary_measures(
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    n_steps: int = 4000,
    operator: TransferOperator | None = None,
) -> list[GridMeasure]:
    """One Cesàro limit per minimal set, started inside that set.

    Raises SupportLeak when less than 1 − 10⁻³ of the mass stays inside the
    set's arcs (a resolution or step-count problem).
    """
    resolution = operator.resolution if operator else ks[0].resolution
    op = operator or TransferOperator(system, resolution)
    out = []
    for ms in ks:
        start_cell = ms.cells[0]
        scale = resolution // ms.resolution
        start = CirclePoint(
            Fraction(2 * start_cell * scale + 1, 2 * resolution)
        )
        mu = op.cesaro_average(start, n_steps)
        inside = 0.0
        for cell in mu.support_cells():
            mid = Fraction(2 * int(cell) + 1, 2 * resolution)
            if ms.arcs.contains_point(CirclePoint(mid)):
                inside += mu.mass[cell]
        if inside < 1 - 1e-3:
            raise SupportLeak(
                f"only {inside:.6f} of the mass of μ_{ms.index} lies in its "
                "minimal set"
            )
        out.append(mu)
    return out


def decompose(m: GridMeasure, mus: list[GridMeasure]) -> tuple[np.ndarray, float]:
    """Coefficients t_i = mass of m on each μ_i's support; residual reported."""
    supports = [mu.support_cells() for mu in mus]
    taken = np.zeros(m.resolution, dtype=bool)
    for cells in supports:
        if taken[cells].any():
            raise NondisjointSupports("stationary measure supports overlap")
        taken[cells] = True
    t = np.array([m.mass[cells].sum() for cells in supports])
    residual = float(1.0 - t.sum())
    return t, residual
