"""Built-in example systems with verified coordinate tables.

Each builtin bundles a subshift (with gap layouts and, where the geometry
supplies them, boundary-identification instances), a defining potential,
and one realized side pair: per side a dimension, a pressure constant and
a finite-depth length realization, plus the cocycle-gap pair that
synthesizes the side's ratio function where one exists.  The tables are
versioned so that reports produced from them can be traced to the exact
numbers they used.

The four entries:

``horseshoe``
    Full 2-shift, middle-fifth gap on both sides: child ratios 0.4 / 0.4
    with a 0.2 gap, dimension log 2 / log 2.5, maximal-entropy measure.

``cantor-third``
    Same shift with middle-third gaps (ratios 1/3 each), dimension
    log 2 / log 3.

``golden-anosov``
    Golden-mean shift realized as a linear torus automorphism: no gaps,
    dimension one on both sides, golden-ratio length tables, and the
    matching and boundary instances of the glued unstable circle.

``da-attractor-toy``
    Full 2-shift attractor model: flat expanding side carrying the
    measure itself as lengths, gapped contracting side with ratios
    4/9 / 1/9 and a 4/9 gap at dimension one half, Bernoulli(2/3, 1/3)
    measure, with cylinder-gap, cylinder-cylinder and cocycle-gap orbit
    records along the invariant boundary fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .cocycle import CocycleGapPair, constant_pair
from .errors import UnknownBuiltin
from .gibbs import GibbsMeasure, Potential, bernoulli_potential, uniform_potential
from .realize import RatioTable, TrainTrackRealization, dual_pair, lengths_from_ratio
from .sft import (
    BoundaryData,
    BoundaryInstance,
    CocycleGapOrbit,
    CylinderCylinderInstance,
    CylinderGapInstance,
    GapLayout,
    MatchingInstance,
    S_SIDE,
    SftSystem,
    U_SIDE,
    build_sft,
    cyl,
    gap,
)

BUILTIN_TABLES_VERSION = "1"

BUILTIN_NAMES = ("horseshoe", "golden-anosov", "cantor-third", "da-attractor-toy")

# Depth of the precomputed length tables; deeper values stabilize.
TABLE_DEPTH = 8

_PHI = (1.0 + math.sqrt(5.0)) / 2.0

_FULL2 = [[1, 1], [1, 1]]

_GAPPED_ENTRIES = {
    None: (("cyl", 0), ("gap",), ("cyl", 1)),
    0: (("cyl", 0), ("gap",), ("cyl", 1)),
    1: (("cyl", 0), ("gap",), ("cyl", 1)),
}
_FLAT_ENTRIES = {
    None: (("cyl", 0), ("cyl", 1)),
    0: (("cyl", 0), ("cyl", 1)),
    1: (("cyl", 0), ("cyl", 1)),
}
_GOLDEN_ENTRIES = {
    None: (("cyl", 0), ("cyl", 1)),
    0: (("cyl", 0), ("cyl", 1)),
    1: (("cyl", 0),),
}


@dataclass(frozen=True)
class BuiltinSide:
    """One realized side of a builtin: dimension, pressure and lengths."""

    side: str
    delta: float
    pressure: float
    realization: TrainTrackRealization
    pair: Optional[CocycleGapPair] = None


@dataclass(frozen=True)
class Builtin:
    name: str
    version: str
    sys: SftSystem
    potential: Potential
    measure: GibbsMeasure
    u: BuiltinSide
    s: BuiltinSide

    def side(self, which: str) -> BuiltinSide:
        if which == U_SIDE:
            return self.u
        if which == S_SIDE:
            return self.s
        raise ValueError(f"side must be {U_SIDE!r} or {S_SIDE!r}, got {which!r}")


def builtin(name: str) -> Builtin:
    """Construct a builtin by name; raises UnknownBuiltin otherwise."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        known = ", ".join(BUILTIN_NAMES)
        raise UnknownBuiltin(f"no builtin named {name!r} (known: {known})") from None
    return factory()


def _affine_cantor(name: str, child_ratio: float, gap_ratio: float, delta: float) -> Builtin:
    """Full shift, identical middle-gap layout on both sides, no boundary."""
    sys = build_sft(
        2,
        _FULL2,
        boundary=BoundaryData(),
        layouts={
            U_SIDE: GapLayout(U_SIDE, _GAPPED_ENTRIES),
            S_SIDE: GapLayout(S_SIDE, _GAPPED_ENTRIES),
        },
    )
    pot = uniform_potential(sys)
    g = GibbsMeasure(sys, pot)
    sides = {}
    for side in (U_SIDE, S_SIDE):
        table = RatioTable(
            sys,
            side,
            1,
            {cyl((0,)): child_ratio, cyl((1,)): child_ratio, gap(()): gap_ratio},
        )
        tt = lengths_from_ratio(table, delta=delta, pressure=0.0, depth=TABLE_DEPTH)
        sides[side] = BuiltinSide(side, delta, 0.0, tt, constant_pair(side))
    return Builtin(name, BUILTIN_TABLES_VERSION, sys, pot, g, sides[U_SIDE], sides[S_SIDE])


def _horseshoe() -> Builtin:
    return _affine_cantor("horseshoe", 0.4, 0.2, math.log(2.0) / math.log(2.5))


def _cantor_third() -> Builtin:
    third = 1.0 / 3.0
    return _affine_cantor("cantor-third", third, third, math.log(2.0) / math.log(3.0))


def _golden_boundary() -> BoundaryData:
    # Unrolling the glued circle at depth one passes the cylinders in the
    # order 0, 1, 0 on one side of the junction and 0, 0, 1 on the other;
    # both readings pin the golden ratio between the two length classes.
    matching = []
    boundary = []
    for side in (U_SIDE, S_SIDE):
        matching.append(
            MatchingInstance(
                f"gold-match-{side}-01",
                side,
                cyl((0,)),
                cyl((1,)),
                (cyl((0,)), cyl((1,)), cyl((0,))),
                2,
            )
        )
        matching.append(
            MatchingInstance(
                f"gold-match-{side}-10",
                side,
                cyl((1,)),
                cyl((0,)),
                (cyl((0,)), cyl((0,)), cyl((1,))),
                1,
            )
        )
        for a in range(2):
            boundary.append(
                BoundaryInstance(
                    f"gold-bdry-{side}-{a}",
                    side,
                    cyl((a,)),
                    (cyl((0,)), cyl((1,))),
                    (cyl((1,)), cyl((0,))),
                )
            )
    return BoundaryData(
        matching_instances=tuple(matching),
        boundary_instances=tuple(boundary),
    )


def _golden_table(sys: SftSystem, side: str) -> RatioTable:
    len1 = (1.0 / _PHI, 1.0 / _PHI**2)
    ratios = {cyl((0,)): len1[0], cyl((1,)): len1[1]}
    for a in range(2):
        for b in range(2):
            if not sys.is_admissible((a, b)):
                continue
            deep, shallow = (b, a) if side == U_SIDE else (a, b)
            ratios[cyl((a, b))] = len1[deep] / (_PHI * len1[shallow])
    return RatioTable(sys, side, 2, ratios)


def _golden_anosov() -> Builtin:
    sys = build_sft(
        2,
        [[1, 1], [1, 0]],
        boundary=_golden_boundary(),
        layouts={
            U_SIDE: GapLayout(U_SIDE, _GOLDEN_ENTRIES),
            S_SIDE: GapLayout(S_SIDE, _GOLDEN_ENTRIES),
        },
    )
    pot = uniform_potential(sys)
    g = GibbsMeasure(sys, pot)
    sides = {}
    for side in (U_SIDE, S_SIDE):
        tt = lengths_from_ratio(
            _golden_table(sys, side), delta=1.0, pressure=0.0, depth=TABLE_DEPTH
        )
        sides[side] = BuiltinSide(side, 1.0, 0.0, tt)
    return Builtin(
        "golden-anosov", BUILTIN_TABLES_VERSION, sys, pot, g, sides[U_SIDE], sides[S_SIDE]
    )


def _toy_boundary() -> BoundaryData:
    # The gapped side's out-gaps are traversed by the expanding boundary
    # circle; crossing the junction swaps the deep symbol of the paired
    # cylinder, so each cylinder-gap pair recurs with the swapped reading.
    cylinder_gap = (
        CylinderGapInstance(
            "toy-cg-00", S_SIDE, cyl((0, 0)), gap((0,)), (cyl((0, 1)), gap((1,)))
        ),
        CylinderGapInstance(
            "toy-cg-11", S_SIDE, cyl((1, 1)), gap((1,)), (cyl((1, 0)), gap((0,)))
        ),
        CylinderGapInstance(
            "toy-cg-01", S_SIDE, cyl((0, 1)), gap((1,)), (cyl((0, 0)), gap((0,)))
        ),
        CylinderGapInstance(
            "toy-cg-10", S_SIDE, cyl((1, 0)), gap((0,)), (cyl((1, 1)), gap((1,)))
        ),
    )
    # Sibling splittings read from both rectangles sharing the fixed
    # boundary leaf; the leaf words pin the two readings to the two
    # fixed points of the base circle map.
    cylinder_cylinder = (
        CylinderCylinderInstance(
            "toy-cc-1",
            S_SIDE,
            (0, 0, 0, 0, 0),
            (0, 0, 0),
            (1, 0, 0),
            (1, 1, 1, 1, 1),
            ((0, 1), (1, 1)),
            2,
        ),
        CylinderCylinderInstance(
            "toy-cc-2",
            S_SIDE,
            (1, 1, 1, 1, 1),
            (0, 1, 1),
            (1, 1, 1),
            (0, 0, 0, 0, 0),
            ((0, 0), (1, 0)),
            2,
        ),
        CylinderCylinderInstance(
            "toy-cc-3",
            S_SIDE,
            (0, 0, 0, 0, 0),
            (0, 0, 0, 0),
            (1, 0, 0, 0),
            (1, 1, 1, 1, 1),
            ((0, 0, 1), (1, 0, 1)),
            2,
        ),
        CylinderCylinderInstance(
            "toy-cc-4",
            S_SIDE,
            (1, 1, 1, 1, 1),
            (0, 1, 1, 1),
            (1, 1, 1, 1),
            (0, 0, 0, 0, 0),
            ((0, 1, 0), (1, 1, 0)),
            2,
        ),
    )
    orbits = (CocycleGapOrbit("toy-fiber", S_SIDE, (0,), 0, 1),)
    return BoundaryData(
        cylindergap_instances=cylinder_gap,
        cylindercylinder_instances=cylinder_cylinder,
        cocyclegap_orbits=orbits,
    )


def _da_attractor_toy() -> Builtin:
    sys = build_sft(
        2,
        _FULL2,
        boundary=_toy_boundary(),
        layouts={
            U_SIDE: GapLayout(U_SIDE, _FLAT_ENTRIES),
            S_SIDE: GapLayout(S_SIDE, _GAPPED_ENTRIES),
        },
    )
    pot = bernoulli_potential(sys, [2, 1])
    g = GibbsMeasure(sys, pot)
    table = RatioTable(
        sys,
        S_SIDE,
        1,
        {cyl((0,)): 4.0 / 9.0, cyl((1,)): 1.0 / 9.0, gap(()): 4.0 / 9.0},
    )
    tt_s = lengths_from_ratio(table, delta=0.5, pressure=0.0, depth=TABLE_DEPTH)
    tt_u = dual_pair(g, tt_s)
    return Builtin(
        "da-attractor-toy",
        BUILTIN_TABLES_VERSION,
        sys,
        pot,
        g,
        BuiltinSide(U_SIDE, 1.0, 0.0, tt_u),
        BuiltinSide(S_SIDE, 0.5, 0.0, tt_s, constant_pair(S_SIDE)),
    )


_FACTORIES = {
    "horseshoe": _horseshoe,
    "golden-anosov": _golden_anosov,
    "cantor-third": _cantor_third,
    "da-attractor-toy": _da_attractor_toy,
}
