"""Independent oracles for the Monte Carlo layer.

The absorption oracle enumerates words exactly: a branch stops as soon as
the image of a small neighbourhood falls inside an exactly invariant
level-one union (all continuations then share that fate), giving rigorous
lower bounds on the weights that the sampled estimates must respect.
"""

from fractions import Fraction

import pytest

from circlerds.circle import Arc, pt
from circlerds.fixtures import builtin
from circlerds.homeo import image_arc
from circlerds.minimal import GridApprox, minimal_sets
from circlerds.rds import invert_system
from circlerds.structure import level_one_families
from circlerds.transfer import GridMeasure
from circlerds.reporting import measure_from_csv, measure_to_csv
from circlerds.weights import MCConfig, estimate_weights, weight_profile

F = Fraction


def absorption_bounds(system, unions, x, half_width, depth):
    """Exact per-index lower bounds on the weights near x.

    Expands the word tree of the neighbourhood [x-h, x+h]; a branch whose
    image arc lies inside one union is absorbed there with its ν-mass.
    Returns (lower bounds, unresolved mass), all exact rationals.
    """
    lower = [F(0)] * len(unions)
    unresolved = F(0)
    start = Arc.closed_arc(x.value - half_width, x.value + half_width)
    stack = [(start, F(1), 0)]
    while stack:
        arc, mass, dep = stack.pop()
        home = next(
            (i for i, u in enumerate(unions) if u.contains_arc(arc)), None
        )
        if home is not None:
            lower[home] += mass
            continue
        if dep == depth:
            unresolved += mass
            continue
        for f, w in zip(system.maps, system.weights):
            stack.append((image_arc(f, arc), mass * w, dep + 1))
    return lower, unresolved


@pytest.mark.parametrize("xval", ["3/16", "15/16"])
def test_estimates_within_absorption_bounds(xval):
    system = builtin("example71")
    ks = minimal_sets(system, GridApprox(2**12))
    fams = level_one_families(system, ks)
    unions = [fams[i].union() for i in range(len(ks))]
    lower, unresolved = absorption_bounds(
        system, unions, pt(xval), F(1, 2**14), depth=14
    )
    assert sum(lower) + unresolved == 1  # exact bookkeeping of the tree
    assert unresolved < F(1, 15)
    cfg = MCConfig(n_steps=1500, burn=700, samples=2000)
    est = estimate_weights(system, pt(xval), ks, cfg, seed=17)
    for i in range(len(ks)):
        lo = float(lower[i]) - 4 * est.stderr[i]
        hi = float(lower[i] + unresolved) + 4 * est.stderr[i]
        assert lo <= est.values[i] <= hi, (xval, i, lower, est.values)


def test_inverse_system_profile_identically_one():
    system = invert_system(builtin("example71"))
    ks = minimal_sets(system, GridApprox(2**12))
    assert len(ks) == 1
    prof = weight_profile(system, ks, probe_count=16,
                          config=MCConfig(400, 200, F(1, 1024), 100), seed=4)
    assert (prof.value_matrix() == 1.0).all()


def test_e_family_single_arc_sets():
    from circlerds.minimal import MinimalSetApprox, cell_arcs
    from circlerds.structure import e_family
    ks = [
        MinimalSetApprox(1, 64, tuple(range(4, 8)), cell_arcs(range(4, 8), 64)),
        MinimalSetApprox(2, 64, tuple(range(40, 44)), cell_arcs(range(40, 44), 64)),
    ]
    system = builtin("op_pair")  # unused by the computation
    for i, ms in enumerate(ks):
        fam = e_family(system, ks, i + 1)
        assert len(fam.arcs) == 1
        assert fam.arcs[0].lo.value == ms.arcs.segments[0][0]


def test_measure_csv_round_trip():
    import numpy as np
    rng = np.random.default_rng(3)
    mass = rng.random(256)
    mu = GridMeasure(256, mass / mass.sum())
    text = measure_to_csv(mu)
    back = measure_from_csv(text)
    assert back.resolution == 256
    assert np.abs(back.mass - mu.mass).max() < 1e-15
