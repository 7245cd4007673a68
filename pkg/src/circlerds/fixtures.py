"""Built-in example systems shared by the CLI, docs, and tests."""

from __future__ import annotations

from fractions import Fraction

from .homeo import PiecewiseLinear, Reflection, Rotation
from .rds import SystemSpec

F = Fraction


def _pl(points: list[tuple]) -> PiecewiseLinear:
    xs = tuple(F(a, b) for a, b in (p[0] for p in points))
    ys = tuple(F(a, b) for a, b in (p[1] for p in points))
    return PiecewiseLinear(xs, ys)


def north_south_even() -> PiecewiseLinear:
    """Preserving PL map fixing 0, 1/4, 1/2, 3/4; attracting at 0 and 1/2."""
    return _pl([
        ((0, 1), (0, 1)),
        ((1, 8), (1, 16)),
        ((1, 4), (1, 4)),
        ((3, 8), (7, 16)),
        ((1, 2), (1, 2)),
        ((5, 8), (9, 16)),
        ((3, 4), (3, 4)),
        ((7, 8), (15, 16)),
    ])


def north_south_odd() -> PiecewiseLinear:
    """Preserving PL map fixing 1/8, 3/8, 5/8, 7/8; attracting at 3/8 and 7/8."""
    return _pl([
        ((0, 1), (15, 16)),
        ((1, 8), (1, 8)),
        ((1, 4), (5, 16)),
        ((3, 8), (3, 8)),
        ((1, 2), (7, 16)),
        ((5, 8), (5, 8)),
        ((3, 4), (13, 16)),
        ((7, 8), (7, 8)),
    ])


def axis_reflection() -> Reflection:
    """The reflection x ↦ 7/8 − x, fixing 7/16 and 15/16."""
    return Reflection(F(7, 8))


def two_trap_reflection_system() -> SystemSpec:
    """Two preserving north-south maps plus a reflection.

    Both trapping arcs [3/4, 1/8] and [1/4, 5/8] are invariant under all
    three maps, while the inverse family has a single minimal set.
    """
    return SystemSpec(
        maps=(north_south_even(), north_south_odd(), axis_reflection()),
        weights=(F(1, 3), F(1, 3), F(1, 3)),
        label="example71",
    )


def golden_rotation_system() -> SystemSpec:
    """Rotation by a golden-mean convergent with denominator above 10^6.

    The orbit length equals the denominator, so no periodicity is visible
    at the orbit lengths used anywhere in this package.
    """
    return SystemSpec(
        maps=(Rotation(F(832040, 1346269)),),
        weights=(F(1),),
        label="rotation",
    )


def preserving_pair_system() -> SystemSpec:
    """Orientation-preserving pair with two common trapping arcs."""
    return SystemSpec(
        maps=(north_south_even(), north_south_odd()),
        weights=(F(1, 2), F(1, 2)),
        label="op_pair",
    )


def _split_map_one() -> PiecewiseLinear:
    """Preserving map with eight alternating fixed points (denominators 64)."""
    return _pl([
        ((0, 1), (1, 32)),
        ((1, 16), (5, 64)),
        ((3, 32), (3, 32)),
        ((1, 8), (7, 64)),
        ((3, 16), (3, 16)),
        ((1, 4), (9, 32)),
        ((5, 16), (5, 16)),
        ((3, 8), (11, 32)),
        ((7, 16), (7, 16)),
        ((1, 2), (17, 32)),
        ((9, 16), (37, 64)),
        ((19, 32), (19, 32)),
        ((5, 8), (39, 64)),
        ((11, 16), (11, 16)),
        ((3, 4), (25, 32)),
        ((13, 16), (13, 16)),
        ((7, 8), (27, 32)),
        ((15, 16), (15, 16)),
    ])


def _split_map_two() -> PiecewiseLinear:
    """Preserving map whose fixed points all differ from the first map's."""
    return _pl([
        ((0, 1), (3, 64)),
        ((1, 16), (9, 128)),
        ((7, 64), (7, 64)),
        ((1, 8), (15, 128)),
        ((7, 32), (7, 32)),
        ((1, 4), (33, 128)),
        ((9, 32), (9, 32)),
        ((5, 16), (39, 128)),
        ((3, 8), (45, 128)),
        ((13, 32), (13, 32)),
        ((7, 16), (15, 32)),
        ((1, 2), (17, 32)),
        ((9, 16), (73, 128)),
        ((37, 64), (37, 64)),
        ((5, 8), (77, 128)),
        ((11, 16), (43, 64)),
        ((23, 32), (23, 32)),
        ((3, 4), (49, 64)),
        ((25, 32), (25, 32)),
        ((13, 16), (51, 64)),
        ((27, 32), (27, 32)),
        ((7, 8), (29, 32)),
        ((15, 16), (63, 64)),
    ])


def split_interval_system() -> SystemSpec:
    """Reflection system whose level-one arcs split into two proximal halves.

    Each trapping arc contains two sub-arcs swapped by the reflection and
    preserved by both orientation-preserving maps; the hat points of the
    trapping arcs are the exact sub-arc endpoints 13/16, 1/16, 5/16, 9/16.
    """
    return SystemSpec(
        maps=(_split_map_one(), _split_map_two(), axis_reflection()),
        weights=(F(1, 3), F(1, 3), F(1, 3)),
        label="split_case",
    )


BUILTIN_SYSTEMS = {
    "example71": two_trap_reflection_system,
    "rotation": golden_rotation_system,
    "op_pair": preserving_pair_system,
    "split_case": split_interval_system,
}


def builtin(name: str) -> SystemSpec:
    try:
        return BUILTIN_SYSTEMS[name]()
    except KeyError:
        raise KeyError(f"unknown built-in system {name!r}; "
                       f"have {sorted(BUILTIN_SYSTEMS)}") from None
