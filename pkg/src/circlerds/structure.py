"""Interval families, hat points, neighbor graph and the inverse comparison.

The level-one families are computed from the exact transition graph (cells
from which no other minimal set is reachable), so their unions are exactly
invariant under every map; the Monte Carlo profile serves as a statistical
cross-check.  Hat points combine bounded word exploration with an
attracting-fixed-point closure: the explored supremum can only grow, and
snapping it to the binding generator's fixed point makes the crossing test
decidable at finite depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arcs import ArcUnion
from .circle import Arc, CirclePoint, FULL_CIRCLE
from .errors import EverywhereFixed, MissingMinimalSet
from .homeo import (
    compose,
    eval_fraction,
    fixed_points,
    image_arc,
    invert,
    orientation_reversing,
)
from .mc import OrbitEngine
from .minimal import (
    GridApprox,
    MinimalSetApprox,
    build_transition_graph,
    minimal_sets,
    refine,
)
from .rds import SystemSpec, invert_system, uniforms
from .weights import CheckResult, WeightProfile, level_one_mask, plateau_owner


@dataclass(frozen=True)
class IntervalFamily:
    kind: str                     # "A" | "E" | "B" | "C" | "C_ordered"
    owner: object                 # index (1-based) or ordered/unordered pair
    arcs: tuple[Arc, ...]         # circularly ordered, pairwise disjoint

    def union(self) -> ArcUnion:
        return ArcUnion.from_arcs(self.arcs)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "owner": list(self.owner) if isinstance(self.owner, tuple) else self.owner,
            "arcs": [["full", "full"] if a.full else
                     [str(a.lo.value), str(a.hi.value)] for a in self.arcs],
        }


# ---------------------------------------------------------------------------
# Level-one families (A) and endpoint families (E)
# ---------------------------------------------------------------------------


def _reaching_cells(graph, targets: np.ndarray) -> np.ndarray:
    """Cells with a graph path into `targets` (multi-source reverse BFS)."""
    n = graph.shape[0]
    gt = graph.T.tocsr()
    mask = np.zeros(n, dtype=bool)
    mask[targets] = True
    stack = [int(t) for t in targets]
    while stack:
        v = stack.pop()
        for w in gt.indices[gt.indptr[v]:gt.indptr[v + 1]]:
            if not mask[w]:
                mask[w] = True
                stack.append(int(w))
    return mask


def level_one_families(
    system: SystemSpec,
    ks: list[MinimalSetApprox],
    graph=None,
) -> list[IntervalFamily]:
    """A_i = cells from which no other minimal set is reachable.

    Exactly invariant by construction; raises MissingMinimalSet when the
    reachability computation fails to cover K_i (a grid defect).
    """
    d = len(ks)
    n = ks[0].resolution
    if d == 1:
        return [IntervalFamily("A", 1, (FULL_CIRCLE,))]
    if graph is None:
        graph = build_transition_graph(system, GridApprox(n))
    reach = [
        _reaching_cells(graph, np.array(ms.cells, dtype=np.int64)) for ms in ks
    ]
    fams = []
    for i, ms in enumerate(ks):
        forbidden = np.zeros(n, dtype=bool)
        for j in range(d):
            if j != i:
                forbidden |= reach[j]
        cells = np.flatnonzero(~forbidden)
        union = ArcUnion.from_arcs(
            [(Fraction(int(c), n), Fraction(int(c) + 1, n)) for c in cells]
        )
        if not union.contains_union(ks[i].arcs):
            raise MissingMinimalSet(
                f"level-one family {i + 1} does not contain its minimal set"
            )
        fams.append(IntervalFamily("A", i + 1, tuple(union.arcs())))
    return fams


def profile_agreement(
    fams: list[IntervalFamily], profile: WeightProfile, delta_one: float = 0.02
) -> CheckResult:
    """Statistical consistency of the profile with the exact families.

    Probes inside an exact level-one family must be statistically at level
    one (a failure signals a broken configuration).  Level-one probes
    outside the family are only reported: near a slowly repelling boundary
    the true weight approaches 1 and finitely many samples cannot separate
    it from 1, so an overhang of a few probes is expected behaviour.
    """
    n = len(profile.grid)
    gap = max(
        (profile.grid[(k + 1) % n].value - profile.grid[k].value) % 1
        for k in range(n)
    )
    inside_bad = []
    overhang = []
    for fam in fams:
        i = fam.owner - 1
        union = fam.union()
        mask = level_one_mask(profile, i, delta_one)
        wide = union.dilate(gap)
        for k, p in enumerate(profile.grid):
            if union.contains_point(p) and not mask[k]:
                inside_bad.append({"owner": fam.owner, "probe": str(p.value)})
            elif mask[k] and not wide.contains_point(p):
                overhang.append({"owner": fam.owner, "probe": str(p.value)})
    return CheckResult(
        "level_one_profile_agreement",
        len(inside_bad) == 0,
        {"inside_disagreements": inside_bad[:5],
         "statistical_overhang_probes": len(overhang)},
    )


def e_family(
    system: SystemSpec, ks: list[MinimalSetApprox], i: int
) -> IntervalFamily:
    """Maximal arcs with endpoints in K_i avoiding the other minimal sets.

    Computed purely from the minimal-set arcs: consecutive K_i arcs merge
    when no foreign arc separates them.  For d = 1 the family is the whole
    circle.
    """
    d = len(ks)
    if d == 1:
        return IntervalFamily("E", 1, (FULL_CIRCLE,))
    labelled = []
    for j, ms in enumerate(ks):
        for s, ln in ms.arcs.segments:
            labelled.append((s, ln, j))
    labelled.sort()
    owner_seq = [j for _, _, j in labelled]
    target = i - 1
    arcs = []
    m = len(labelled)
    k = 0
    while k < m:
        if owner_seq[k] == target and owner_seq[k - 1] != target:
            j = k
            while owner_seq[j % m] == target:
                j += 1
            first = labelled[k]
            last = labelled[(j - 1) % m]
            arcs.append(Arc.closed_arc(first[0], (last[0] + last[1]) % 1))
            k = j
        else:
            k += 1
    if not arcs:  # single run covering everything of this owner
        if all(o == target for o in owner_seq):
            return IntervalFamily("E", i, (FULL_CIRCLE,))
    return IntervalFamily("E", i, tuple(arcs))


# ---------------------------------------------------------------------------
# Permutation property
# ---------------------------------------------------------------------------


def check_permutation_property(
    system: SystemSpec, family: IntervalFamily
) -> CheckResult:
    """Each map sends every family arc into exactly one arc, bijectively."""
    arcs = family.arcs
    union = family.union()
    witnesses = []
    perms = []
    for fi, f in enumerate(system.maps):
        targets = []
        for j, arc in enumerate(arcs):
            img = image_arc(f, arc)
            hit = None
            for k, other in enumerate(arcs):
                if other.full or ArcUnion.from_arcs([other]).contains_arc(img):
                    hit = k
                    break
            if hit is None:
                witnesses.append({"map": fi, "arc": j, "reason": "escapes"})
            targets.append(hit)
        if None not in targets and sorted(set(targets)) != list(range(len(arcs))):
            witnesses.append({"map": fi, "reason": "not a permutation",
                              "targets": targets})
        perms.append(targets)
    return CheckResult(
        f"permutation_{family.kind}_{family.owner}",
        len(witnesses) == 0,
        {"witnesses": witnesses[:5], "permutations": perms},
    )


# ---------------------------------------------------------------------------
# Hat points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HatPoints:
    interval: Arc
    a_hat: CirclePoint
    b_hat: CirclePoint
    case: str                     # "proximal_whole" | "split"
    word_length_bound: int
    budget_exhausted: bool = False
    snapped: bool = False

    def as_dict(self) -> dict:
        return {
            "interval": [str(self.interval.lo.value), str(self.interval.hi.value)],
            "a_hat": str(self.a_hat.value),
            "b_hat": str(self.b_hat.value),
            "case": self.case,
            "word_length_bound": self.word_length_bound,
            "budget_exhausted": self.budget_exhausted,
            "snapped": self.snapped,
        }


def _interval_generators(system: SystemSpec, interval: Arc, depth: int = 3):
    """Composite maps up to the given word length that keep the arc inside
    itself and preserve orientation."""
    out = []
    m = len(system.maps)
    for length in range(1, depth + 1):
        for word in itertools.product(range(m), repeat=length):
            g = system.maps[word[0]]
            for idx in word[1:]:
                g = compose(system.maps[idx], g)
            if orientation_reversing(g):
                continue
            img = image_arc(g, interval)
            if ArcUnion.from_arcs([interval]).contains_arc(img):
                out.append(g)
    return out


def _snap_up(generators, interval: Arc, x: Fraction) -> Fraction:
    """Limit of iterating improving generators upward from x, inside [a, b]."""
    a = interval.lo.value
    length = interval.length()
    pos = lambda v: (v - a) % 1
    for _ in range(64):
        improved = False
        for g in generators:
            gx = eval_fraction(g, x)
            if pos(gx) > length:
                continue
            if pos(gx) > pos(x):
                try:
                    fps = fixed_points(g)
                except EverywhereFixed:
                    continue
                cands = [p.value for p, _ in fps
                         if pos(p.value) > pos(x) and pos(p.value) <= length]
                x = min(cands, key=pos) if cands else gx
                improved = True
        if not improved:
            return x
    return x


def _snap_down(generators, interval: Arc, y: Fraction) -> Fraction:
    a = interval.lo.value
    length = interval.length()
    pos = lambda v: (v - a) % 1
    for _ in range(64):
        improved = False
        for g in generators:
            gy = eval_fraction(g, y)
            if pos(gy) > length:
                continue
            if pos(gy) < pos(y):
                try:
                    fps = fixed_points(g)
                except EverywhereFixed:
                    continue
                cands = [p.value for p, _ in fps if pos(p.value) < pos(y)]
                y = max(cands, key=pos) if cands else gy
                improved = True
        if not improved:
            return y
    return y


def _explore(system, interval: Arc, cand_a: Fraction, cand_b: Fraction,
             l_max: int, budget: int):
    """BFS over deduplicated image states; tracks images of the candidates.

    Returns (best_a, best_b, exhausted): the extremal candidate images over
    surviving orientation-preserving explored words.
    """
    a, b = interval.lo.value, interval.hi.value
    length = interval.length()
    pos = lambda v: (v - a) % 1
    best_a, best_b = pos(cand_a), pos(cand_b)
    root = (a, b, cand_a, cand_b, False)
    seen = {root}
    frontier = [root]
    nodes = 0
    exhausted = False
    for _ in range(l_max):
        nxt = []
        for state in frontier:
            va, vb, vx, vy, rev = state
            for f in system.maps:
                wa, wb = eval_fraction(f, va), eval_fraction(f, vb)
                r2 = rev != orientation_reversing(f)
                lo, hi = (wa, wb) if not r2 else (wb, wa)
                if not (pos(lo) <= pos(hi) <= length):
                    continue
                wx, wy = eval_fraction(f, vx), eval_fraction(f, vy)
                st = (wa, wb, wx, wy, r2)
                nodes += 1
                if nodes > budget:
                    exhausted = True
                    break
                if st in seen:
                    continue
                seen.add(st)
                nxt.append(st)
                if not r2:
                    best_a = max(best_a, pos(wa), pos(wx))
                    best_b = min(best_b, pos(wb), pos(wy))
            if exhausted:
                break
        if exhausted or not nxt:
            break
        frontier = nxt
    return best_a, best_b, exhausted


def hat_points(
    system: SystemSpec, interval: Arc, l_max: int = 12, budget: int = 10**6
) -> HatPoints:
    """Extremal endpoint images over words keeping the arc inside itself.

    Word exploration gives certified inner bounds that only grow with the
    depth; the attracting-fixed-point closure then snaps each bound to the
    limit of its binding generator, which decides the crossing case at
    finite depth.  The two phases iterate until they agree.
    """
    a = interval.lo.value
    pos = lambda v: (v - a) % 1
    gens = _interval_generators(system, interval, depth=3)
    cand_a, cand_b = a, interval.hi.value
    exhausted = False
    snapped = False
    for _ in range(8):
        best_a, best_b, ex = _explore(system, interval, cand_a, cand_b,
                                      l_max, budget)
        exhausted |= ex
        explored_a = (a + best_a) % 1
        explored_b = (a + best_b) % 1
        new_a = _snap_up(gens, interval, explored_a)
        new_b = _snap_down(gens, interval, explored_b)
        snapped |= new_a != explored_a or new_b != explored_b
        if new_a == cand_a and new_b == cand_b:
            break
        cand_a, cand_b = new_a, new_b
    case = "proximal_whole" if pos(cand_a) >= pos(cand_b) else "split"
    return HatPoints(
        interval=interval,
        a_hat=CirclePoint(cand_a),
        b_hat=CirclePoint(cand_b),
        case=case,
        word_length_bound=l_max,
        budget_exhausted=exhausted,
        snapped=snapped,
    )


def routing_audit(
    system: SystemSpec,
    interval: Arc,
    hats: HatPoints,
    l_max: int = 12,
    budget: int = 10**5,
) -> CheckResult:
    """Check the orientation routing of every explored word on the sub-arcs.

    A word keeping the arc inside itself must map [a, â] and [b̂, b] into
    themselves when orientation-preserving and swap them when reversing.
    """
    a, b = interval.lo.value, interval.hi.value
    length = interval.length()
    pos = lambda v: (v - a) % 1
    pa, pb = pos(hats.a_hat.value), pos(hats.b_hat.value)
    root = (a, b, hats.a_hat.value, hats.b_hat.value, False)
    frontier = [root]
    words = 0
    violations = 0
    exhausted = False
    for _ in range(l_max):
        nxt = []
        for va, vb, vx, vy, rev in frontier:
            for f in system.maps:
                wa, wb = eval_fraction(f, va), eval_fraction(f, vb)
                r2 = rev != orientation_reversing(f)
                lo, hi = (wa, wb) if not r2 else (wb, wa)
                if not (pos(lo) <= pos(hi) <= length):
                    continue
                wx, wy = eval_fraction(f, vx), eval_fraction(f, vy)
                words += 1
                if words > budget:
                    exhausted = True
                    break
                if not r2:
                    ok = (pos(wa) <= pos(wx) <= pa) and \
                         (pb <= pos(wy) <= pos(wb) <= length)
                else:
                    ok = (pb <= pos(wx) <= pos(wa) <= length) and \
                         (pos(wb) <= pos(wy) <= pa)
                if not ok:
                    violations += 1
                nxt.append((wa, wb, wx, wy, r2))
            if exhausted:
                break
        if exhausted or not nxt:
            break
        frontier = nxt
    return CheckResult(
        "hat_routing",
        violations == 0,
        {"words_checked": words, "violations": violations,
         "budget_exhausted": exhausted},
    )


def proximal_decomposition(
    system: SystemSpec,
    a_family: IntervalFamily,
    ks: list[MinimalSetApprox] | None = None,
    l_max: int = 12,
    budget: int = 10**6,
) -> tuple[IntervalFamily, list[HatPoints], CheckResult]:
    """Split every arc at its hat points when they do not cross.

    Verifies the all-or-none cardinality law and, when the minimal sets are
    supplied, the containment K_i ⊆ ∪B ⊆ ∪A.
    """
    i = a_family.owner
    if len(a_family.arcs) == 1 and a_family.arcs[0].full:
        fam = IntervalFamily("B", i, a_family.arcs)
        return fam, [], CheckResult(f"b_family_{i}", True, {"note": "full circle"})
    hats = [hat_points(system, arc, l_max, budget) for arc in a_family.arcs]
    split_flags = [h.case == "split" for h in hats]
    arcs: list[Arc] = []
    for arc, h in zip(a_family.arcs, hats):
        if h.case == "split":
            arcs.append(Arc.closed_arc(arc.lo.value, h.a_hat.value))
            arcs.append(Arc.closed_arc(h.b_hat.value, arc.hi.value))
        else:
            arcs.append(arc)
    fam = IntervalFamily("B", i, tuple(arcs))
    details: dict = {
        "cases": [h.case for h in hats],
        "n_a": len(a_family.arcs),
        "n_b": len(arcs),
    }
    passed = len(set(split_flags)) <= 1
    if not passed:
        details["cardinality_violation"] = (
            "mixed split/whole at explored depth; the limit law forbids this"
        )
    if ks is not None:
        k_arcs = ks[i - 1].arcs
        details["contains_minimal_set"] = fam.union().contains_union(k_arcs)
        details["inside_level_one"] = a_family.union().contains_union(fam.union())
        passed = passed and details["contains_minimal_set"] \
            and details["inside_level_one"]
    return fam, hats, CheckResult(f"b_family_{i}", passed, details)


# ---------------------------------------------------------------------------
# Synchronization
# ---------------------------------------------------------------------------


def synchronization_test(
    system: SystemSpec,
    interval: Arc,
    pairs: int = 200,
    n_steps: int = 2000,
    eps: Fraction = Fraction(1, 1024),
    seed: int = 0,
) -> dict:
    """Fraction of random pairs whose orbits meet within ε under one word."""
    engine = OrbitEngine(system, regions=None, seed=seed)
    lo = float(interval.lo.value)
    length = float(interval.length()) if not interval.full else 1.0
    ux = uniforms(seed ^ 0xA11CE, np.arange(pairs, dtype=np.uint64), np.uint64(0))
    uy = uniforms(seed ^ 0xA11CE, np.arange(pairs, dtype=np.uint64), np.uint64(1))
    x = (lo + ux * length) % 1.0
    y = (lo + uy * length) % 1.0
    streams = np.arange(pairs, dtype=np.uint64)
    eps_f = float(eps)
    d0 = np.abs(x - y)
    best = np.minimum(d0, 1 - d0)
    met = best <= eps_f
    for t in range(n_steps):
        lets = engine.letters(streams, t)
        x = engine.step(x, lets)
        y = engine.step(y, lets)
        d = np.abs(x - y)
        d = np.minimum(d, 1 - d)
        met |= d <= eps_f
        if met.all():
            break
    return {
        "pairs": pairs,
        "fraction_synchronized": float(met.mean()),
        "eps": str(eps),
        "n_steps": n_steps,
    }


# ---------------------------------------------------------------------------
# Neighbor graph
# ---------------------------------------------------------------------------


@dataclass
class NeighborGraph:
    d: int
    pairs: set[frozenset]
    v_sets: dict[int, set[int]]    # 1-based index -> neighbor indices
    plateau_sequence: list[int]    # circular owner sequence (1-based)
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "pairs": sorted(sorted(p) for p in self.pairs),
            "neighbor_sets": {str(i): sorted(v) for i, v in self.v_sets.items()},
            "plateau_sequence": self.plateau_sequence,
            "checks": {c.name: {"passed": c.passed, **c.details}
                       for c in self.checks},
        }


def neighbor_analysis(
    profile: WeightProfile, noise: float = 0.01, delta_one: float = 0.02
) -> NeighborGraph:
    """Neighbor pairs from co-positive probes, with the path-structure checks."""
    d = profile.d
    v = profile.value_matrix()
    positive = v > noise
    pairs = set()
    for k in range(len(profile.grid)):
        idx = np.flatnonzero(positive[k])
        for i, j in itertools.combinations(idx, 2):
            pairs.add(frozenset((int(i) + 1, int(j) + 1)))
    v_sets = {i + 1: set() for i in range(d)}
    for p in pairs:
        i, j = sorted(p)
        v_sets[i].add(j)
        v_sets[j].add(i)
    owner = plateau_owner(profile, delta_one)
    seq = []
    for k in range(len(owner)):
        o = int(owner[k])
        if o >= 0 and (not seq or seq[-1] != o + 1):
            seq.append(o + 1)
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq.pop()
    checks = []
    if d == 1:
        checks.append(CheckResult("neighbor_counts", v_sets[1] == set(),
                                  {"note": "d = 1, vacuous"}))
    else:
        sizes = {i: len(v_sets[i]) for i in v_sets}
        ok_counts = all(1 <= s <= 2 for s in sizes.values())
        checks.append(CheckResult("neighbor_counts", ok_counts,
                                  {"sizes": {str(k): v for k, v in sizes.items()}}))
        singles = [i for i, s in sizes.items() if s == 1]
        checks.append(CheckResult("at_most_two_single_neighbor_indices",
                                  len(singles) <= 2, {"singles": singles}))
        seq_pairs = {
            frozenset((seq[k], seq[(k + 1) % len(seq)]))
            for k in range(len(seq))
            if seq[k] != seq[(k + 1) % len(seq)]
        }
        checks.append(CheckResult(
            "plateau_adjacency_matches_pairs", seq_pairs == pairs,
            {"sequence_pairs": sorted(sorted(p) for p in seq_pairs)},
        ))
        checks.append(CheckResult(
            "plateau_sequence_covers_indices",
            set(seq) == set(range(1, d + 1)), {"sequence": seq},
        ))
        per_probe_ok = True
        witnesses = []
        for k in range(len(profile.grid)):
            idx = np.flatnonzero(positive[k])
            if len(idx) > 2:
                per_probe_ok = False
                witnesses.append(str(profile.grid[k].value))
        checks.append(CheckResult(
            "support_within_single_pair", per_probe_ok,
            {"witnesses": witnesses[:5]},
        ))
    return NeighborGraph(d=d, pairs=pairs, v_sets=v_sets,
                         plateau_sequence=seq, checks=checks)


# ---------------------------------------------------------------------------
# Gap families and the inverse comparison
# ---------------------------------------------------------------------------


def check_gap_property(
    a_families: list[IntervalFamily],
    profile: WeightProfile,
    delta_one: float = 0.02,
) -> CheckResult:
    """Between consecutive arcs of one family some other index reaches one.

    Vacuously true when every family is a single arc; a violation signals
    an under-resolved family (two arcs of one index with nothing between).
    """
    labelled = []
    for fam in a_families:
        for arc in fam.arcs:
            if arc.full:
                return CheckResult("same_owner_gap_property", True,
                                   {"note": "full circle, vacuous"})
            labelled.append((arc.lo.value, arc.length(), fam.owner))
    labelled.sort()
    v = profile.value_matrix()
    witnesses = []
    m = len(labelled)
    for k in range(m):
        s, ln, i = labelled[k]
        t, _, j = labelled[(k + 1) % m]
        if i != j:
            continue
        gap = ArcUnion.from_endpoints((s + ln) % 1, t)
        hit = any(
            gap.contains_point(p) and v[pk, o] >= 1 - delta_one
            for pk, p in enumerate(profile.grid)
            for o in range(profile.d) if o != i - 1
        )
        if not hit:
            witnesses.append({"owner": i, "gap_start": str((s + ln) % 1)})
    return CheckResult("same_owner_gap_property", len(witnesses) == 0,
                       {"witnesses": witnesses[:5]})


def gap_families(
    a_families: list[IntervalFamily], ordered: bool
) -> list[IntervalFamily]:
    """Closed gaps between consecutive level-one arcs, keyed by owner pair."""
    labelled = []
    for fam in a_families:
        for arc in fam.arcs:
            if arc.full:
                return []
            labelled.append((arc.lo.value, arc.length(), fam.owner))
    labelled.sort()
    m = len(labelled)
    grouped: dict = {}
    for k in range(m):
        s, ln, i = labelled[k]
        t, _, j = labelled[(k + 1) % m]
        gap = Arc.closed_arc((s + ln) % 1, t)
        key = (i, j) if ordered else tuple(sorted((i, j)))
        grouped.setdefault(key, []).append(gap)
    kind = "C_ordered" if ordered else "C"
    return [
        IntervalFamily(kind, key, tuple(arcs))
        for key, arcs in sorted(grouped.items())
    ]


def check_gap_inverse_invariance(
    system: SystemSpec, gaps: list[IntervalFamily]
) -> CheckResult:
    """f⁻¹ maps the union of all gap arcs into itself, exactly."""
    union = ArcUnion.empty()
    for fam in gaps:
        union = union.union(fam.union())
    witnesses = []
    for fi, f in enumerate(system.maps):
        g = invert(f)
        for fam in gaps:
            for arc in fam.arcs:
                img = image_arc(g, arc)
                if not union.contains_arc(img):
                    witnesses.append({"map": fi,
                                      "arc": [str(arc.lo.value),
                                              str(arc.hi.value)]})
    return CheckResult("gap_inverse_invariance", len(witnesses) == 0,
                       {"witnesses": witnesses[:5]})


@dataclass
class InverseComparison:
    d_plus: int
    d_minus: int
    forward_sets: list[MinimalSetApprox]
    backward_sets: list[MinimalSetApprox]
    gaps: list[IntervalFamily]
    ordered_gaps: list[IntervalFamily]
    checks: list[CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "d_plus": self.d_plus,
            "d_minus": self.d_minus,
            "gap_families": [f.as_dict() for f in self.gaps],
            "ordered_gap_families": [f.as_dict() for f in self.ordered_gaps],
            "checks": {c.name: {"passed": c.passed, **c.details}
                       for c in self.checks},
        }


def inverse_comparison(
    system: SystemSpec, grid: GridApprox, refine_target: int | None = None
) -> InverseComparison:
    """Minimal-set counts of the system and its inverse, with the gap tests."""
    fwd = minimal_sets(system, grid)
    bwd = minimal_sets(invert_system(system), grid)
    if refine_target:
        fwd_f, st_f = refine(system, fwd, refine_target)
        bwd_f, st_b = refine(invert_system(system), bwd, refine_target)
        if st_f:
            fwd = fwd_f
        if st_b:
            bwd = bwd_f
        stable = st_f and st_b
    else:
        stable = True
    d_plus, d_minus = len(fwd), len(bwd)
    a_fams = level_one_families(system, fwd)
    preserving = all(not orientation_reversing(f) for f in system.maps)
    gaps = gap_families(a_fams, ordered=False)
    ordered_gaps = gap_families(a_fams, ordered=True) if preserving else []
    checks = [
        CheckResult("count_difference_at_most_one", abs(d_plus - d_minus) <= 1,
                    {"d_plus": d_plus, "d_minus": d_minus, "stable": stable}),
    ]
    if preserving:
        checks.append(CheckResult("preserving_counts_equal",
                                  d_plus == d_minus, {}))
    if gaps:
        checks.append(check_gap_inverse_invariance(system, gaps))
        # each neighbor gap family must harbour an inverse minimal set; the
        # inverse system may own further minimal sets elsewhere
        located = []
        for ms in bwd:
            home = None
            for fam in gaps:
                if fam.union().contains_union(ms.arcs):
                    home = fam.owner
                    break
            located.append(home)
        ok = all(
            any(h == fam.owner for h in located) for fam in gaps
        )
        checks.append(CheckResult(
            "gap_families_harbour_inverse_sets", ok,
            {"locations": [list(h) if h else None for h in located]},
        ))
    return InverseComparison(
        d_plus=d_plus, d_minus=d_minus, forward_sets=fwd, backward_sets=bwd,
        gaps=gaps, ordered_gaps=ordered_gaps, checks=checks,
    )
