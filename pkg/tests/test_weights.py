"""Weight-map estimation: classification semantics, profiles, theorem checks."""

from fractions import Fraction

import numpy as np
import pytest

from circlerds.circle import pt
from circlerds.errors import DegenerateClassification
from circlerds.fixtures import builtin
from circlerds.minimal import GridApprox, minimal_sets
from circlerds.rds import sample_word
from circlerds.weights import (
    MCConfig,
    WeightEstimate,
    WeightProfile,
    classify_orbit,
    estimate_weights,
    transition_zones,
    verify_weight_theorems,
    weight_profile,
)

F = Fraction

FAST = MCConfig(n_steps=400, burn=200, samples=300)


@pytest.fixture(scope="module")
def trap_system():
    s = builtin("example71")
    return s, minimal_sets(s, GridApprox(2**12))


@pytest.fixture(scope="module")
def rotation_system():
    s = builtin("rotation")
    return s, minimal_sets(s, GridApprox(2**10))


class TestClassifyOrbit:
    def test_point_inside_minimal_set_keeps_its_index(self, trap_system):
        s, ks = trap_system
        target = next(k for k in ks if k.arcs.contains_point(pt("15/16")))
        w = sample_word(s, 11, 0, 400)
        got = classify_orbit(s, pt("15/16"), w, ks, 200, F(1, 1024))
        assert got == target.index

    def test_short_word_unclassified(self, trap_system):
        s, ks = trap_system
        w = sample_word(s, 11, 0, 201)
        assert classify_orbit(s, pt("123/4096"), w, ks, 201, F(1, 1024)) is None

    def test_matches_batch_engine(self, trap_system):
        s, ks = trap_system
        cfg = MCConfig(n_steps=300, burn=150, samples=100)
        for xval, slot in (("15/16", 0), ("3/16", 3)):
            est = estimate_weights(s, pt(xval), ks, cfg, seed=5, probe_slot=slot)
            counts = [0] * len(ks)
            uncl = 0
            for k in range(cfg.samples):
                w = sample_word(s, 5, slot * cfg.samples + k, cfg.n_steps)
                got = classify_orbit(s, pt(xval), w, ks, cfg.burn, cfg.eps_cluster)
                if got is None:
                    uncl += 1
                else:
                    counts[got - 1] += 1
            assert tuple(counts) == est.counts
            assert uncl == est.unclassified_count


class TestEstimateWeights:
    def test_inside_set_is_certain(self, trap_system):
        s, ks = trap_system
        est = estimate_weights(s, pt("15/16"), ks, FAST, seed=1)
        assert max(est.values) == 1.0 and est.unclassified == 0

    def test_bookkeeping_exact(self, trap_system):
        s, ks = trap_system
        est = estimate_weights(s, pt("3/16"), ks, FAST, seed=2)
        assert sum(est.counts) + est.unclassified_count == est.samples

    def test_rotation_trivial(self, rotation_system):
        s, ks = rotation_system
        est = estimate_weights(s, pt("1/3"), ks, FAST, seed=3)
        assert est.values.tolist() == [1.0]

    def test_deterministic(self, trap_system):
        s, ks = trap_system
        a = estimate_weights(s, pt("3/16"), ks, FAST, seed=9)
        b = estimate_weights(s, pt("3/16"), ks, FAST, seed=9)
        assert a.counts == b.counts

    def test_degenerate_config_raises(self, trap_system):
        s, ks = trap_system
        bad = MCConfig(n_steps=3, burn=1, samples=50)
        with pytest.raises(DegenerateClassification):
            estimate_weights(s, pt("3/16"), ks, bad, seed=1)


@pytest.fixture(scope="module")
def small_profile(trap_system):
    s, ks = trap_system
    cfg = MCConfig(n_steps=600, burn=300, samples=400)
    return weight_profile(s, ks, probe_count=64, config=cfg, seed=3)


class TestWeightProfile:
    def test_probe_grid_contains_set_endpoints(self, trap_system, small_profile):
        _, ks = trap_system
        grid_vals = {p.value for p in small_profile.grid}
        for ms in ks:
            for seg_start, seg_len in ms.arcs.segments:
                assert seg_start in grid_vals
                assert (seg_start + seg_len) % 1 in grid_vals

    def test_plateaus_at_one_inside_sets(self, trap_system, small_profile):
        _, ks = trap_system
        for k, p in enumerate(small_profile.grid):
            for ms in ks:
                if ms.arcs.contains_point(p):
                    v = small_profile.estimates[k].values
                    assert v[ms.index - 1] == 1.0

    def test_transition_zones_detected(self, small_profile):
        zones = transition_zones(small_profile, 0.02)
        assert len(zones) == 2
        assert all(z.left_owner != z.right_owner for z in zones)

    def test_rotation_profile_identically_one(self, rotation_system):
        s, ks = rotation_system
        prof = weight_profile(s, ks, probe_count=16,
                              config=MCConfig(200, 100, F(1, 1024), 50), seed=0)
        assert np.all(prof.value_matrix() == 1.0)


class TestVerifyTheorems:
    def test_all_pass_on_trap_system(self, trap_system, small_profile):
        s, ks = trap_system
        rep = verify_weight_theorems(small_profile, s, ks, pinv_probes=20)
        for c in rep.checks:
            assert c.passed, (c.name, c.details)

    def test_rotation_passes_trivially(self, rotation_system):
        s, ks = rotation_system
        prof = weight_profile(s, ks, probe_count=16,
                              config=MCConfig(200, 100, F(1, 1024), 50), seed=0)
        rep = verify_weight_theorems(prof, s, ks, pinv_probes=5)
        assert rep.all_passed

    def test_corrupted_profile_fails_monotonicity(self, trap_system, small_profile):
        s, ks = trap_system
        zones = transition_zones(small_profile, 0.02)
        zone = max(zones, key=lambda z: len(z.probe_indices))
        # swap the estimated values at the two zone ends: a hard alternation
        est = list(small_profile.estimates)
        lo_i, hi_i = zone.probe_indices[0], zone.probe_indices[-1]
        a, b = est[lo_i], est[hi_i]
        est[lo_i] = WeightEstimate(a.point, b.counts, b.unclassified_count,
                                   b.samples)
        est[hi_i] = WeightEstimate(b.point, a.counts, a.unclassified_count,
                                   a.samples)
        corrupted = WeightProfile(
            d=small_profile.d, grid=small_profile.grid, estimates=est,
            config=small_profile.config, seed=small_profile.seed,
            slots_used=small_profile.slots_used,
        )
        rep = verify_weight_theorems(corrupted, s, ks, pinv_probes=5)
        assert not rep["monotone_transitions"].passed
        assert rep["monotone_transitions"].details["witnesses"]
