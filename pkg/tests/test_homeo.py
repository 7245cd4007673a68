"""Homeomorphism arithmetic: exact round-trips and published example values."""

import random
from fractions import Fraction

import pytest

from circlerds.circle import Arc, arc_contains, co3, pt, sort_circular
from circlerds.errors import EverywhereFixed
from circlerds.fixtures import axis_reflection, north_south_even
from circlerds.homeo import (
    PiecewiseLinear,
    Reflection,
    Rotation,
    as_pl,
    compose,
    evaluate,
    fixed_points,
    image_arc,
    invert,
    orientation_reversing,
)

F = Fraction


from tests_support import random_homeo, random_pl, random_point


class TestEvaluate:
    def test_pl_midpoint_of_linear_piece(self):
        f = PiecewiseLinear((F(0), F(1, 2)), (F(0), F(1, 4)))
        assert evaluate(f, pt("1/4")).value == F(1, 8)

    def test_reflection_at_zero(self):
        assert evaluate(axis_reflection(), pt(0)).value == F(7, 8)

    def test_reflection_at_quarter(self):
        assert evaluate(axis_reflection(), pt("1/4")).value == F(5, 8)

    def test_breakpoints_map_exactly(self):
        rng = random.Random(3)
        for _ in range(200):
            f = random_pl(rng)
            for x, y in zip(f.xs, f.ys):
                assert evaluate(f, pt(x)).value == y


class TestInvert:
    def test_rotation(self):
        assert invert(Rotation(F(1, 3))) == Rotation(F(2, 3))

    def test_reflection_is_involution(self):
        r = axis_reflection()
        assert invert(r) == r
        assert compose(r, r) == Rotation(0)

    def test_pl_coordinate_swap(self):
        f = PiecewiseLinear((F(0), F(1, 2)), (F(0), F(1, 4)))
        g = invert(f)
        assert g.xs == (F(0), F(1, 4)) and g.ys == (F(0), F(1, 2))

    def test_round_trip_1000_instances(self):
        rng = random.Random(11)
        for _ in range(1000):
            f = random_homeo(rng)
            x = random_point(rng)
            assert evaluate(invert(f), evaluate(f, x)) == x
            assert evaluate(f, evaluate(invert(f), x)) == x


class TestCompose:
    def test_rotations_add(self):
        assert compose(Rotation(F(1, 4)), Rotation(F(1, 4))) == Rotation(F(1, 2))

    def test_reversing_pair_preserves(self):
        rng = random.Random(17)
        for _ in range(50):
            f, g = random_pl(rng), random_pl(rng)
            h = compose(f, g)
            assert orientation_reversing(h) == (
                orientation_reversing(f) != orientation_reversing(g)
            )

    def test_matches_pointwise_1000_instances(self):
        rng = random.Random(19)
        for _ in range(1000):
            f, g = random_homeo(rng), random_homeo(rng)
            x = random_point(rng)
            assert evaluate(compose(f, g), x) == evaluate(f, evaluate(g, x))

    def test_even_reversing_word_preserves_cyclic_order(self):
        rng = random.Random(23)
        for _ in range(200):
            f, g = random_pl(rng), random_pl(rng)
            if orientation_reversing(f) == orientation_reversing(g) is False:
                continue
            h = compose(f, g)
            if orientation_reversing(h):
                continue
            a, b, c = sort_circular([random_point(rng) for _ in range(3)])
            assert co3(evaluate(h, a), evaluate(h, b), evaluate(h, c))


class TestImageArc:
    def test_rotation_shifts(self):
        arc = image_arc(Rotation(F(1, 4)), Arc.closed_arc(0, "1/2"))
        assert (arc.lo.value, arc.hi.value) == (F(1, 4), F(3, 4))

    def test_reflection_preserves_trap(self):
        arc = image_arc(axis_reflection(), Arc.closed_arc("3/4", "1/8"))
        assert (arc.lo.value, arc.hi.value) == (F(3, 4), F(1, 8))

    def test_pl_endpoint_images(self):
        f = PiecewiseLinear((F(0), F(1, 2)), (F(0), F(1, 4)))
        arc = image_arc(f, Arc.closed_arc(0, "1/2"))
        assert (arc.lo.value, arc.hi.value) == (F(0), F(1, 4))

    def test_membership_commutes_1000_instances(self):
        rng = random.Random(31)
        for _ in range(1000):
            f = random_homeo(rng)
            a, b = random_point(rng), random_point(rng)
            if a == b:
                continue
            arc = Arc.closed_arc(a, b)
            x = random_point(rng)
            if arc_contains(arc, x):
                assert arc_contains(image_arc(f, arc), evaluate(f, x))


class TestFixedPoints:
    def test_rotation_has_none(self):
        assert fixed_points(Rotation(F(1, 3))) == []

    def test_reflection_axis(self):
        pts = [p.value for p, _ in fixed_points(axis_reflection())]
        assert pts == [F(7, 16), F(15, 16)]

    def test_identity_flagged(self):
        with pytest.raises(EverywhereFixed):
            fixed_points(Rotation(0))
        with pytest.raises(EverywhereFixed):
            fixed_points(as_pl(Rotation(0)))

    def test_north_south_stabilities(self):
        got = {p.value: s for p, s in fixed_points(north_south_even())}
        assert got == {
            F(0): "attracting",
            F(1, 4): "repelling",
            F(1, 2): "attracting",
            F(3, 4): "repelling",
        }

    def test_fixed_points_are_fixed_500_instances(self):
        rng = random.Random(37)
        for _ in range(500):
            f = random_pl(rng)
            try:
                fps = fixed_points(f)
            except EverywhereFixed:
                continue
            for p, _ in fps:
                assert evaluate(f, p) == p
