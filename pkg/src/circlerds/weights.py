"""Monte Carlo estimation of the weight maps and their structural checks.

An orbit is assigned to minimal set i when every post-burn-in point stays
within ε of that set's arcs and the orbit visits the ε-neighbourhood of
every component; anything else is counted as unclassified, never
redistributed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arcs import ArcUnion
from .circle import CirclePoint, pt, total_variation
from .errors import DegenerateClassification
from .homeo import image_arc
from .mc import OrbitEngine, build_regions
from .minimal import MinimalSetApprox
from .rds import SystemSpec, Word, walk


@dataclass(frozen=True)
class MCConfig:
    """Orbit-sampling configuration (defaults sized for the shipped systems)."""

    n_steps: int = 2000
    burn: int = 1000
    eps_cluster: Fraction = Fraction(1, 1024)
    samples: int = 4000

    def as_dict(self) -> dict:
        return {
            "n_steps": self.n_steps,
            "burn": self.burn,
            "eps_cluster": str(self.eps_cluster),
            "samples": self.samples,
        }


@dataclass(frozen=True)
class WeightEstimate:
    point: CirclePoint
    counts: tuple[int, ...]
    unclassified_count: int
    samples: int

    @property
    def values(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.samples

    @property
    def stderr(self) -> np.ndarray:
        v = self.values
        return np.sqrt(v * (1 - v) / self.samples)

    @property
    def unclassified(self) -> float:
        return self.unclassified_count / self.samples


@dataclass
class WeightProfile:
    d: int
    grid: tuple[CirclePoint, ...]
    estimates: list[WeightEstimate]
    config: MCConfig
    seed: int
    slots_used: int

    def value_matrix(self) -> np.ndarray:
        return np.stack([e.values for e in self.estimates])

    def stderr_matrix(self) -> np.ndarray:
        return np.stack([e.stderr for e in self.estimates])


def classify_orbit(
    system: SystemSpec,
    x: CirclePoint,
    word: Word,
    ks: list[MinimalSetApprox],
    burn: int,
    eps: Fraction,
) -> int | None:
    """Exact single-orbit classification; returns a 1-based index or None.

    Reference semantics for the vectorized estimator: the trajectory is
    computed in exact arithmetic and compared against the exact ε-dilated
    arc unions.
    """
    if len(word) <= burn:
        return None
    dilated = [ms.arcs.dilate(eps) for ms in ks]
    traj = walk(system, x, word)
    tail = traj.points[burn:]
    owner = None
    for p in tail:
        here = [i for i, u in enumerate(dilated) if u.contains_point(p)]
        if len(here) != 1:
            return None
        if owner is None:
            owner = here[0]
        elif owner != here[0]:
            return None
    comps = dilated[owner]
    targets = [comps] if comps.full else [
        ArcUnion.from_arcs([a]) for a in comps.arcs()
    ]
    for target in targets:
        if not any(target.contains_point(p) for p in tail):
            return None
    return owner + 1


def _engine(system: SystemSpec, ks, config: MCConfig, seed: int) -> OrbitEngine:
    regions = build_regions(ks, config.eps_cluster)
    return OrbitEngine(system, regions, seed)


def estimate_weights(
    system: SystemSpec,
    x: CirclePoint,
    ks: list[MinimalSetApprox],
    config: MCConfig = MCConfig(),
    seed: int = 0,
    probe_slot: int = 0,
    engine: OrbitEngine | None = None,
) -> WeightEstimate:
    """Empirical weight frequencies at one point over config.samples orbits."""
    eng = engine or _engine(system, ks, config, seed)
    counts, uncl = eng.run(
        np.array([float(pt(x).value)]),
        samples=config.samples,
        n_steps=config.n_steps,
        burn=config.burn,
        stream_base=probe_slot * config.samples,
    )
    est = WeightEstimate(
        point=pt(x),
        counts=tuple(int(c) for c in counts[0]),
        unclassified_count=int(uncl[0]),
        samples=config.samples,
    )
    if est.unclassified > 0.5:
        raise DegenerateClassification(
            f"{est.unclassified:.0%} of orbits from {x} unclassified; "
            "increase n_steps/burn or loosen eps_cluster"
        )
    return est


def probe_points(ks: list[MinimalSetApprox], probe_count: int) -> list[CirclePoint]:
    """Equispaced dyadic probes plus every arc endpoint of every minimal set."""
    vals = {Fraction(k, probe_count) for k in range(probe_count)}
    for ms in ks:
        if not ms.arcs.full:
            for s, ln in ms.arcs.segments:
                vals.add(s % 1)
                vals.add((s + ln) % 1)
    return [CirclePoint(v) for v in sorted(vals)]


def weight_profile(
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    probe_count: int = 512,
    config: MCConfig = MCConfig(),
    seed: int = 0,
) -> WeightProfile:
    """Weight estimates along the probe grid (one batch, deterministic)."""
    d = len(ks)
    if probe_count < 8 * d:
        raise ValueError("probe_count must be at least 8 per minimal set")
    probes = probe_points(ks, probe_count)
    eng = _engine(system, ks, config, seed)
    counts, uncl = eng.run(
        np.array([float(p.value) for p in probes]),
        samples=config.samples,
        n_steps=config.n_steps,
        burn=config.burn,
    )
    estimates = []
    for i, p in enumerate(probes):
        est = WeightEstimate(
            point=p,
            counts=tuple(int(c) for c in counts[i]),
            unclassified_count=int(uncl[i]),
            samples=config.samples,
        )
        if est.unclassified > 0.5:
            raise DegenerateClassification(
                f"{est.unclassified:.0%} of orbits from probe {p} unclassified"
            )
        estimates.append(est)
    return WeightProfile(
        d=d,
        grid=tuple(probes),
        estimates=estimates,
        config=config,
        seed=seed,
        slots_used=len(probes),
    )


# ---------------------------------------------------------------------------
# Plateau and transition-zone detection
# ---------------------------------------------------------------------------


def level_one_mask(profile: WeightProfile, i: int, delta_one: float) -> np.ndarray:
    """Probes statistically at level one for index i (0-based)."""
    v = profile.value_matrix()[:, i]
    se = profile.stderr_matrix()[:, i]
    return (v >= 1 - delta_one) & (v + 3 * se >= 1)


def plateau_owner(profile: WeightProfile, delta_one: float) -> np.ndarray:
    """Per-probe level-one owner (0-based), -1 where no index is at level one."""
    owner = np.full(len(profile.grid), -1, dtype=int)
    for i in range(profile.d):
        mask = level_one_mask(profile, i, delta_one)
        owner[mask] = i
    return owner


@dataclass(frozen=True)
class TransitionZone:
    """Maximal circular probe run strictly between two level-one plateaus."""

    probe_indices: tuple[int, ...]
    left_owner: int
    right_owner: int


def transition_zones(profile: WeightProfile, delta_one: float) -> list[TransitionZone]:
    owner = plateau_owner(profile, delta_one)
    n = len(owner)
    if (owner >= 0).all() or (owner < 0).all():
        return []
    zones = []
    k = 0
    while k < n:
        if owner[k] < 0 and owner[k - 1] >= 0:
            idxs = []
            j = k
            while owner[j % n] < 0:
                idxs.append(j % n)
                j += 1
            zones.append(TransitionZone(
                probe_indices=tuple(idxs),
                left_owner=int(owner[k - 1]),
                right_owner=int(owner[j % n]),
            ))
            k = j
        else:
            k += 1
    return zones


# ---------------------------------------------------------------------------
# Theorem checks over a profile
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class TheoremReport:
    checks: list[CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            c.name: {"passed": c.passed, **c.details} for c in self.checks
        }


def _check_support(profile: WeightProfile, tol_sigma: float) -> CheckResult:
    v = profile.value_matrix()
    se = profile.stderr_matrix()
    above = v > tol_sigma * se
    counts = above.sum(axis=1)
    bad = np.flatnonzero(counts > 2)
    return CheckResult(
        "support_at_most_two",
        len(bad) == 0,
        {"witnesses": [str(profile.grid[k].value) for k in bad[:5]],
         "max_support": int(counts.max())},
    )


def _check_sum(profile: WeightProfile) -> CheckResult:
    exact = all(
        sum(e.counts) + e.unclassified_count == e.samples
        for e in profile.estimates
    )
    max_uncl = max(e.unclassified for e in profile.estimates)
    return CheckResult(
        "weights_sum_to_one",
        exact and max_uncl <= 0.01,
        {"max_unclassified": max_uncl, "bookkeeping_exact": exact},
    )


def _check_p_invariance(
    profile: WeightProfile,
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    tol_sigma: float,
    n_probes: int,
    engine: OrbitEngine,
) -> CheckResult:
    from .rds import uniforms

    n = len(profile.grid)
    u = uniforms(profile.seed ^ 0x5EED, np.arange(n_probes, dtype=np.uint64),
                 np.uint64(0))
    chosen = sorted({int(k) for k in (u * n).astype(int)})
    # one batch for all image points, stream slots after the profile's
    probe_vals = np.array(
        [float(_image_point(f, profile.grid[k]).value)
         for k in chosen for f in system.maps]
    )
    counts, uncl = engine.run(
        probe_vals,
        samples=profile.config.samples,
        n_steps=profile.config.n_steps,
        burn=profile.config.burn,
        stream_base=profile.slots_used * profile.config.samples,
    )
    m = len(system.maps)
    nu = np.array([float(w) for w in system.weights])
    samples = profile.config.samples
    failures = []
    for row, k in enumerate(chosen):
        base = profile.estimates[k]
        img_counts = counts[row * m:(row + 1) * m]
        img_v = img_counts / samples
        img_se = np.sqrt(img_v * (1 - img_v) / samples)
        lhs = (nu[:, None] * img_v).sum(axis=0)
        comb = np.sqrt(((nu[:, None] ** 2) * img_se**2).sum(axis=0)
                       + base.stderr**2)
        diff = np.abs(lhs - base.values)
        if (diff > tol_sigma * np.maximum(comb, 1e-12)).any():
            failures.append(str(profile.grid[k].value))
    frac = 1 - len(failures) / max(len(chosen), 1)
    return CheckResult(
        "transfer_operator_invariance",
        frac >= 0.95,
        {"probes": len(chosen), "pass_fraction": frac,
         "witnesses": failures[:5]},
    )


def _image_point(f, x: CirclePoint) -> CirclePoint:
    from .homeo import evaluate
    return evaluate(f, x)


def _zone_monotone_violations(
    profile: WeightProfile, zone: TransitionZone, tol_sigma: float
) -> list[tuple[int, int]]:
    """Pairs of zone probes whose ordering exceeds the noise band."""
    out = []
    v = profile.value_matrix()
    se = profile.stderr_matrix()
    idxs = list(zone.probe_indices)
    for owner, direction in ((zone.left_owner, -1), (zone.right_owner, +1)):
        if zone.left_owner == zone.right_owner:
            continue
        vals = v[idxs, owner]
        errs = se[idxs, owner]
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                drift = (vals[b] - vals[a]) * direction
                band = tol_sigma * (errs[a] + errs[b])
                if drift < -band:
                    out.append((idxs[a], idxs[b]))
    return out


def _check_monotone(
    profile: WeightProfile, zones: list[TransitionZone], tol_sigma: float
) -> CheckResult:
    witnesses = []
    for z in zones:
        for a, b in _zone_monotone_violations(profile, z, tol_sigma):
            witnesses.append(
                (str(profile.grid[a].value), str(profile.grid[b].value))
            )
    return CheckResult(
        "monotone_transitions",
        len(witnesses) == 0,
        {"zones": len(zones), "witnesses": witnesses[:5]},
    )


def _check_bv(
    profile: WeightProfile, zones: list[TransitionZone]
) -> CheckResult:
    k = len(zones)
    bound = 2 * k + 0.1
    worst = 0.0
    v = profile.value_matrix()
    for i in range(profile.d):
        tv = total_variation(list(v[:, i]))
        worst = max(worst, tv)
    return CheckResult(
        "bounded_variation",
        worst <= bound or k == 0,
        {"max_total_variation": worst, "bound": bound, "zones": k},
    )


def _check_level_set_invariance(
    profile: WeightProfile,
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    delta_one: float,
    noise: float,
) -> CheckResult:
    """Exact invariance of the level-one and level-zero sets of each index.

    The sets come from the transition graph ({u_i = 1}: cells from which no
    other minimal set is reachable; {u_i = 0}: cells from which K_i is not
    reachable), so the image containment is exact with zero tolerance.  The
    profile enters as a statistical consistency check: probes inside the
    level-one set must be statistically at one, probes inside the
    level-zero set statistically at zero.
    """
    from .minimal import GridApprox, build_transition_graph, cell_arcs

    d = profile.d
    if d == 1:
        return CheckResult("level_set_invariance", True,
                           {"note": "single minimal set, level sets trivial"})
    n = ks[0].resolution
    graph = build_transition_graph(system, GridApprox(n))
    gt = graph.T.tocsr()
    reach = []
    for ms in ks:
        mask = np.zeros(n, dtype=bool)
        mask[list(ms.cells)] = True
        stack = list(ms.cells)
        while stack:
            vtx = stack.pop()
            for w in gt.indices[gt.indptr[vtx]:gt.indptr[vtx + 1]]:
                if not mask[w]:
                    mask[w] = True
                    stack.append(int(w))
        reach.append(mask)
    v = profile.value_matrix()
    se = profile.stderr_matrix()
    witnesses = []
    for i in range(d):
        one_mask = ~np.logical_or.reduce(
            [reach[j] for j in range(d) if j != i]
        )
        zero_mask = ~reach[i]
        for level, cells in ((1, one_mask), (0, zero_mask)):
            union = cell_arcs(np.flatnonzero(cells), n)
            if union.is_empty() or union.full:
                continue
            for f in system.maps:
                for arc in union.arcs():
                    if not union.contains_arc(image_arc(f, arc)):
                        witnesses.append(
                            {"index": i + 1, "level": level, "kind": "image",
                             "arc": [str(arc.lo.value), str(arc.hi.value)]}
                        )
            for k, p in enumerate(profile.grid):
                if not union.contains_point(p):
                    continue
                if level == 1 and v[k, i] < 1 - delta_one:
                    witnesses.append({"index": i + 1, "level": 1,
                                      "kind": "profile", "probe": str(p.value)})
                if level == 0 and v[k, i] > max(noise, 4 * se[k, i]):
                    witnesses.append({"index": i + 1, "level": 0,
                                      "kind": "profile", "probe": str(p.value)})
    return CheckResult(
        "level_set_invariance", len(witnesses) == 0, {"witnesses": witnesses[:5]}
    )


def verify_weight_theorems(
    profile: WeightProfile,
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    tol_sigma: float = 4.0,
    delta_one: float = 0.02,
    pinv_probes: int = 100,
    noise: float = 0.01,
    engine: OrbitEngine | None = None,
) -> TheoremReport:
    """Run the profile-level structure checks; failures carry witnesses."""
    eng = engine or _engine(system, ks, profile.config, profile.seed)
    zones = transition_zones(profile, delta_one)
    checks = [
        _check_support(profile, tol_sigma),
        _check_sum(profile),
        _check_p_invariance(profile, system, ks, tol_sigma, pinv_probes, eng),
        _check_monotone(profile, zones, tol_sigma),
        _check_bv(profile, zones),
        _check_level_set_invariance(profile, system, ks, delta_one, noise),
    ]
    return TheoremReport(checks)
