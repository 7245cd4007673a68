"""Transfer operator: pushforward, Cesàro averages, stationary measures."""

from fractions import Fraction

import numpy as np
import pytest

from circlerds.circle import pt
from circlerds.errors import NondisjointSupports
from circlerds.fixtures import builtin
from circlerds.homeo import PiecewiseLinear, Rotation
from circlerds.minimal import GridApprox, minimal_sets
from circlerds.rds import SystemSpec
from circlerds.transfer import (
    GridMeasure,
    TransferOperator,
    decompose,
    stationary_measures,
    sup_cdf_distance,
)

F = Fraction


@pytest.fixture(scope="module")
def trap_setup():
    s = builtin("example71")
    ks = minimal_sets(s, GridApprox(2**12))
    op = TransferOperator(s, 2**12)
    return s, ks, op


class TestPushMeasure:
    def test_aligned_rotation_permutes(self):
        s = SystemSpec((Rotation(F(1, 4)),), (F(1),))
        op = TransferOperator(s, 256)
        mu = GridMeasure.point_mass(pt("1/8"), 256)
        out = op.push(mu)
        assert out.mass[32 + 64] == 1.0
        assert out.mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_point_mass_at_common_fixed_point_unchanged(self):
        # contracting fixed point at 0: the cell maps inside itself
        f = PiecewiseLinear((F(0), F(1, 2)), (F(0), F(1, 4)))
        s = SystemSpec((f,), (F(1),))
        op = TransferOperator(s, 128)
        mu = GridMeasure.point_mass(pt(0), 128)
        out = op.push(mu)
        assert out.mass[0] == 1.0

    def test_uniform_invariant_under_rotation(self):
        s = builtin("rotation")
        op = TransferOperator(s, 1024)
        mu = GridMeasure.uniform(1024)
        out = op.push(mu)
        assert np.abs(out.mass - mu.mass).max() < 1e-15

    def test_mass_preserved_and_linear(self, trap_setup):
        _, _, op = trap_setup
        rng = np.random.default_rng(0)
        a = rng.random(2**12)
        b = rng.random(2**12)
        mu = GridMeasure(2**12, a / a.sum())
        la = GridMeasure(2**12, b / b.sum())
        pa, pb = op.push(mu), op.push(la)
        assert pa.drift_log[-1] < 1e-12
        mix = GridMeasure(2**12, 0.25 * mu.mass + 0.75 * la.mass)
        pm = op.push(mix)
        ref = 0.25 * pa.mass + 0.75 * pb.mass
        assert np.abs(pm.mass - ref).max() < 1e-12


class TestCesaro:
    def test_single_step_is_cell_indicator(self, trap_setup):
        _, _, op = trap_setup
        mu = op.cesaro_average(pt("1/3"), 1)
        cell = int(F(1, 3) * 2**12)
        assert mu.mass[cell] == 1.0

    def test_rotation_average_near_uniform(self):
        s = builtin("rotation")
        op = TransferOperator(s, 4096)
        mu = op.cesaro_average(pt("1/3"), 4000)
        assert sup_cdf_distance(mu, GridMeasure.uniform(4096)) <= 1e-2

    def test_trap_average_supported_in_trap(self, trap_setup):
        s, ks, op = trap_setup
        mu = op.cesaro_average(pt("15/16"), 2000)
        target = next(k for k in ks if k.arcs.contains_point(pt("15/16")))
        inside = sum(
            mu.mass[c]
            for c in mu.support_cells()
            if target.arcs.contains_point(pt(F(2 * int(c) + 1, 2 * 2**12)))
        )
        assert inside >= 0.99

    def test_cauchy_in_n(self, trap_setup):
        _, _, op = trap_setup
        x = pt("3/16")
        d1 = sup_cdf_distance(op.cesaro_average(x, 500),
                              op.cesaro_average(x, 1000))
        d2 = sup_cdf_distance(op.cesaro_average(x, 2000),
                              op.cesaro_average(x, 4000))
        assert d2 < d1


class TestStationaryMeasures:
    def test_disjoint_supports_and_stationarity(self, trap_setup):
        s, ks, op = trap_setup
        mus = stationary_measures(s, ks, 4000, operator=op)
        assert len(mus) == 2
        sup0 = set(mus[0].support_cells().tolist())
        sup1 = set(mus[1].support_cells().tolist())
        assert not (sup0 & sup1)
        for mu in mus:
            assert sup_cdf_distance(op.push(mu), mu) <= 1e-2

    def test_start_point_irrelevant(self, trap_setup):
        s, ks, op = trap_setup
        mus = stationary_measures(s, ks, 4000, operator=op)
        target = next(k for k in ks if k.arcs.contains_point(pt("15/16")))
        other = op.cesaro_average(pt("15/16"), 4000)
        assert sup_cdf_distance(other, mus[target.index - 1]) <= 1e-2

    def test_rotation_stationary_near_uniform(self):
        s = builtin("rotation")
        ks = minimal_sets(s, GridApprox(2**10))
        op = TransferOperator(s, 2**10)
        mus = stationary_measures(s, ks, 4000, operator=op)
        assert sup_cdf_distance(mus[0], GridMeasure.uniform(2**10)) <= 1e-2


class TestDecompose:
    def test_pure_measure(self, trap_setup):
        s, ks, op = trap_setup
        mus = stationary_measures(s, ks, 2000, operator=op)
        t, res = decompose(mus[0], mus)
        assert t[0] == pytest.approx(1.0, abs=1e-12)
        assert t[1] == 0 and res == pytest.approx(0.0, abs=1e-12)

    def test_linear_mixture(self, trap_setup):
        s, ks, op = trap_setup
        mus = stationary_measures(s, ks, 2000, operator=op)
        mix = GridMeasure(2**12, 0.5 * mus[0].mass + 0.5 * mus[1].mass)
        t, res = decompose(mix, mus)
        assert np.allclose(t, [0.5, 0.5], atol=1e-12)

    def test_overlapping_supports_rejected(self):
        a = GridMeasure(128, np.full(128, 1 / 128))
        with pytest.raises(NondisjointSupports):
            decompose(a, [a, a])
