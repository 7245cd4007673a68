"""Interval families, hat points, neighbor graph and inverse comparison."""

from fractions import Fraction

import pytest

from circlerds.arcs import ArcUnion
from circlerds.circle import Arc, pt
from circlerds.fixtures import builtin
from circlerds.homeo import PiecewiseLinear, Rotation, image_arc, invert
from circlerds.minimal import GridApprox, minimal_sets
from circlerds.rds import SystemSpec
from circlerds.structure import (
    IntervalFamily,
    check_gap_inverse_invariance,
    check_gap_property,
    check_permutation_property,
    e_family,
    gap_families,
    hat_points,
    inverse_comparison,
    level_one_families,
    neighbor_analysis,
    profile_agreement,
    proximal_decomposition,
    routing_audit,
    synchronization_test,
)
from circlerds.weights import MCConfig, weight_profile

F = Fraction


@pytest.fixture(scope="module")
def trap():
    s = builtin("example71")
    ks = minimal_sets(s, GridApprox(2**12))
    return s, ks


@pytest.fixture(scope="module")
def split():
    s = builtin("split_case")
    ks = minimal_sets(s, GridApprox(2**12))
    return s, ks


@pytest.fixture(scope="module")
def trap_a_families(trap):
    s, ks = trap
    return level_one_families(s, ks)


class TestLevelOneFamilies:
    def test_single_set_gives_full_circle(self):
        s = builtin("rotation")
        ks = minimal_sets(s, GridApprox(2**8))
        fams = level_one_families(s, ks)
        assert len(fams) == 1 and fams[0].arcs[0].full

    def test_trap_arcs_exact(self, trap_a_families):
        ends = sorted(
            (f.arcs[0].lo.value, f.arcs[0].hi.value) for f in trap_a_families
        )
        assert ends == [(F(1, 4), F(5, 8)), (F(3, 4), F(1, 8))]

    def test_exact_invariance(self, trap, trap_a_families):
        s, _ = trap
        for fam in trap_a_families:
            union = fam.union()
            for f in s.maps:
                for arc in fam.arcs:
                    assert union.contains_arc(image_arc(f, arc))

    def test_contains_minimal_set(self, trap, trap_a_families):
        _, ks = trap
        for fam in trap_a_families:
            assert fam.union().contains_union(ks[fam.owner - 1].arcs)

    def test_profile_agreement(self, trap, trap_a_families):
        s, ks = trap
        prof = weight_profile(s, ks, probe_count=32,
                              config=MCConfig(400, 200, F(1, 1024), 100), seed=1)
        check = profile_agreement(trap_a_families, prof)
        assert check.passed
        assert check.details["inside_disagreements"] == []


class TestEFamily:
    def test_single_set_full_circle(self):
        s = builtin("rotation")
        ks = minimal_sets(s, GridApprox(2**8))
        assert e_family(s, ks, 1).arcs[0].full

    def test_two_single_arc_sets(self, split):
        # synthetic: each minimal set a single arc -> E is that arc
        s, ks = split
        for i, ms in enumerate(ks):
            ef = e_family(s, ks, i + 1)
            for arc in ef.arcs:
                for other in ks:
                    if other.index != i + 1:
                        assert other.arcs.intersect(
                            ArcUnion.from_arcs([arc])
                        ).is_empty()

    def test_hulls_inside_level_one(self, trap, trap_a_families):
        s, ks = trap
        for fam in trap_a_families:
            ef = e_family(s, ks, fam.owner)
            assert fam.union().contains_union(ef.union())
            # endpoints of every E-arc belong to the minimal set's cells
            for arc in ef.arcs:
                assert ks[fam.owner - 1].arcs.contains_point(arc.lo)
                assert ks[fam.owner - 1].arcs.contains_point(arc.hi)


class TestPermutationProperty:
    def test_level_one_families(self, trap, trap_a_families):
        s, _ = trap
        for fam in trap_a_families:
            assert check_permutation_property(s, fam).passed

    def test_e_families(self, trap):
        s, ks = trap
        for i in (1, 2):
            assert check_permutation_property(s, e_family(s, ks, i)).passed

    def test_single_invariant_arc_identity(self):
        f = PiecewiseLinear((F(0), F(1, 4), F(1, 2), F(3, 4)),
                            (F(0), F(1, 8), F(1, 2), F(7, 8)))
        s = SystemSpec((f,), (F(1),))
        fam = IntervalFamily("A", 1, (Arc.closed_arc("3/4", "1/4"),))
        res = check_permutation_property(s, fam)
        assert res.passed and res.details["permutations"] == [[0]]

    def test_truncated_arc_fails(self, trap, trap_a_families):
        s, _ = trap
        fam = trap_a_families[1]
        arc = fam.arcs[0]
        clipped = Arc.closed_arc(arc.lo.value + F(1, 64), arc.hi.value)
        bad = IntervalFamily("A", fam.owner, (clipped,))
        res = check_permutation_property(s, bad)
        assert not res.passed and res.details["witnesses"]


class TestHatPoints:
    def test_single_contraction_proximal_whole(self):
        # one preserving map squeezing [1/4, 3/4] onto an interior point
        f = PiecewiseLinear(
            (F(0), F(1, 4), F(1, 2), F(3, 4)),
            (F(0), F(3, 8), F(1, 2), F(5, 8)),
        )
        s = SystemSpec((f,), (F(1),))
        h = hat_points(s, Arc.closed_arc("1/4", "3/4"), l_max=8, budget=10**4)
        assert h.case == "proximal_whole"
        assert h.a_hat.value == h.b_hat.value == F(1, 2)

    def test_trap_arcs_cross(self, trap, trap_a_families):
        s, _ = trap
        expected = {1: (F(1, 2), F(3, 8)), 2: (F(0), F(7, 8))}
        for fam in trap_a_families:
            h = hat_points(s, fam.arcs[0], l_max=8, budget=10**5)
            assert h.case == "proximal_whole"
            assert (h.a_hat.value, h.b_hat.value) == expected[fam.owner]

    def test_split_case_exact_hats(self, split):
        s, ks = split
        fams = level_one_families(s, ks)
        expected = {
            tuple(sorted((F(23, 32), F(5, 32)))): (F(13, 16), F(1, 16)),
            tuple(sorted((F(7, 32), F(21, 32)))): (F(5, 16), F(9, 16)),
        }
        for fam in fams:
            arc = fam.arcs[0]
            h = hat_points(s, arc, l_max=10, budget=3 * 10**5)
            key = tuple(sorted((arc.lo.value, arc.hi.value)))
            assert h.case == "split"
            assert (h.a_hat.value, h.b_hat.value) == expected[key]

    def test_preserving_system_never_splits(self):
        s = builtin("op_pair")
        ks = minimal_sets(s, GridApprox(2**10))
        for fam in level_one_families(s, ks):
            h = hat_points(s, fam.arcs[0], l_max=8, budget=10**5)
            assert h.case == "proximal_whole"

    def test_monotone_in_depth(self, split):
        s, ks = split
        fam = level_one_families(s, ks)[0]
        arc = fam.arcs[0]
        pos = lambda v: (v - arc.lo.value) % 1
        prev_a, prev_b = None, None
        for l_max in (2, 4, 6):
            h = hat_points(s, arc, l_max=l_max, budget=10**5)
            if prev_a is not None:
                assert pos(h.a_hat.value) >= prev_a
                assert pos(h.b_hat.value) <= prev_b
            prev_a, prev_b = pos(h.a_hat.value), pos(h.b_hat.value)


class TestProximalDecomposition:
    def test_preserving_b_equals_a(self):
        s = builtin("op_pair")
        ks = minimal_sets(s, GridApprox(2**10))
        for fam in level_one_families(s, ks):
            b, _, check = proximal_decomposition(s, fam, ks, l_max=8,
                                                 budget=10**5)
            assert check.passed
            assert b.arcs == fam.arcs

    def test_split_case_doubles(self, split):
        s, ks = split
        for fam in level_one_families(s, ks):
            b, hats, check = proximal_decomposition(s, fam, ks, l_max=10,
                                                    budget=3 * 10**5)
            assert check.passed
            assert len(b.arcs) == 2 * len(fam.arcs)
            assert fam.union().contains_union(b.union())
            assert b.union().contains_union(ks[fam.owner - 1].arcs)

    def test_mixed_family_flags_violation(self, split):
        s, ks = split
        fams = level_one_families(s, ks)
        # gluing a splitting arc with a non-splitting sub-arc violates the
        # all-or-none law at explored depth
        splitting = fams[0].arcs[0]
        whole = Arc.closed_arc("23/32", "13/16")  # its own proximal piece
        fake = IntervalFamily("A", 1, (splitting, whole))
        _, _, check = proximal_decomposition(s, fake, None, l_max=8,
                                             budget=10**5)
        assert not check.passed
        assert "cardinality_violation" in check.details


class TestRoutingAudit:
    def test_split_case_routes_exactly(self, split):
        s, ks = split
        fam = level_one_families(s, ks)[0]
        arc = fam.arcs[0]
        h = hat_points(s, arc, l_max=10, budget=3 * 10**5)
        audit = routing_audit(s, arc, h, l_max=9, budget=5 * 10**4)
        assert audit.passed
        assert audit.details["words_checked"] >= 10**4
        assert audit.details["violations"] == 0


class TestSynchronization:
    def test_identical_points_count(self):
        s = builtin("op_pair")
        out = synchronization_test(s, Arc.closed_arc("3/4", "1/8"), pairs=1,
                                   n_steps=1, seed=0)
        assert out["pairs"] == 1

    def test_isometry_never_synchronizes(self):
        s = SystemSpec((Rotation(F(1, 7)),), (F(1),))
        out = synchronization_test(s, Arc.closed_arc(0, "1/2"), pairs=50,
                                   n_steps=500, eps=F(1, 2**20), seed=3)
        assert out["fraction_synchronized"] < 0.05

    def test_trap_arc_synchronizes(self, trap):
        s, _ = trap
        out = synchronization_test(s, Arc.closed_arc("3/4", "1/8"),
                                   pairs=200, n_steps=2000, seed=1)
        assert out["fraction_synchronized"] >= 0.99


class TestNeighborAnalysis:
    def test_single_set_vacuous(self):
        s = builtin("rotation")
        ks = minimal_sets(s, GridApprox(2**8))
        prof = weight_profile(s, ks, probe_count=16,
                              config=MCConfig(200, 100, F(1, 1024), 50), seed=0)
        g = neighbor_analysis(prof)
        assert g.v_sets[1] == set() and g.all_passed

    def test_two_sets_adjacent(self, trap):
        s, ks = trap
        prof = weight_profile(s, ks, probe_count=64,
                              config=MCConfig(500, 250, F(1, 1024), 200), seed=2)
        g = neighbor_analysis(prof)
        assert g.pairs == {frozenset((1, 2))}
        assert g.v_sets == {1: {2}, 2: {1}}
        assert g.all_passed
        # alternating plateau pattern for d = 2
        assert g.plateau_sequence in ([1, 2], [2, 1])


class TestGapProperty:
    def test_single_arc_families_vacuous(self, trap, trap_a_families):
        s, ks = trap
        prof = weight_profile(s, ks, probe_count=32,
                              config=MCConfig(400, 200, F(1, 1024), 100), seed=1)
        assert check_gap_property(trap_a_families, prof).passed

    def test_split_family_without_separator_fails(self, trap, trap_a_families):
        s, ks = trap
        prof = weight_profile(s, ks, probe_count=32,
                              config=MCConfig(400, 200, F(1, 1024), 100), seed=1)
        # cutting one family arc in two leaves a same-owner gap with no
        # other index at level one inside it
        whole = trap_a_families[0]
        a, b = whole.arcs[0].lo.value, whole.arcs[0].hi.value
        mid = (a + (b - a) % 1 / 2) % 1
        broken = IntervalFamily("A", whole.owner, (
            Arc.closed_arc(a, mid - F(1, 64)),
            Arc.closed_arc(mid + F(1, 64), b),
        ))
        res = check_gap_property([broken, trap_a_families[1]], prof)
        assert not res.passed and res.details["witnesses"]


class TestGapFamilies:
    def test_trap_gaps(self, trap, trap_a_families):
        gaps = gap_families(trap_a_families, ordered=False)
        assert len(gaps) == 1
        fam = gaps[0]
        assert fam.owner == (1, 2)
        ends = sorted((a.lo.value, a.hi.value) for a in fam.arcs)
        assert ends == [(F(1, 8), F(1, 4)), (F(5, 8), F(3, 4))]

    def test_gap_inverse_invariance_exact(self, trap, trap_a_families):
        s, _ = trap
        gaps = gap_families(trap_a_families, ordered=False)
        assert check_gap_inverse_invariance(s, gaps).passed

    def test_gap_images_under_inverse(self, trap, trap_a_families):
        s, _ = trap
        gaps = gap_families(trap_a_families, ordered=False)
        union = gaps[0].union()
        for f in s.maps:
            for arc in gaps[0].arcs:
                assert union.contains_arc(image_arc(invert(f), arc))

    def test_ordered_gaps_for_preserving(self):
        s = builtin("op_pair")
        ks = minimal_sets(s, GridApprox(2**10))
        fams = level_one_families(s, ks)
        ordered = gap_families(fams, ordered=True)
        keys = {f.owner for f in ordered}
        assert keys == {(1, 2), (2, 1)}


class TestInverseComparison:
    def test_trap_counts(self):
        c = inverse_comparison(builtin("example71"), GridApprox(2**11))
        assert (c.d_plus, c.d_minus) == (2, 1)
        assert c.all_passed

    def test_preserving_counts_equal(self):
        c = inverse_comparison(builtin("op_pair"), GridApprox(2**11))
        assert (c.d_plus, c.d_minus) == (2, 2)
        assert c.all_passed

    def test_rotation(self):
        c = inverse_comparison(builtin("rotation"), GridApprox(2**10))
        assert (c.d_plus, c.d_minus) == (1, 1)
        assert c.all_passed

    def test_split_case_differs_by_one(self):
        c = inverse_comparison(builtin("split_case"), GridApprox(2**11))
        assert (c.d_plus, c.d_minus) == (2, 3)
        assert c.all_passed
