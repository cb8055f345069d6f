"""Interval realizations: lengths, pressure, dimension and eigenvalues.

A ratio source assigns every child descriptor (cylinder or gap) its length
ratio relative to the mother, window-determined past a stabilization
depth.  From such a source this module builds finite-depth length tables,
evaluates the pressure of the weighted window-transition matrix, solves
the dimension equation by bisection, reads off eigenvalues of periodic
points both from lengths and from the measure, and checks the eigenvalue
formula across a matched pair of sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .errors import (
    GapOnDualSide,
    MismatchedSystems,
    NegativeGap,
    NoRoot,
    NotInDomain,
)
from .gibbs import GibbsMeasure, measure_scaling, _pf_vector
from .sft import (
    S_SIDE,
    U_SIDE,
    PeriodicOrbit,
    Seg,
    SftSystem,
    Symbols,
    cyl,
    deep_extend,
    deep_window_of,
    drop_deep,
    enumerate_cylinders,
    opposite,
    periodic_orbits,
)

# Bisection controls for the dimension equation.
DIM_DELTA_TOL = 1e-13
DIM_MAX_STEPS = 200
DIM_DELTA_FLOOR = 1e-9


@dataclass(frozen=True)
class RatioTable:
    """A hand-filled ratio source: child descriptors to length ratios.

    Descriptors deeper than `window_depth` (one less for gap mothers) are
    served through deep-end window truncation, so a self-similar family
    needs only its shallow table.
    """

    sys: SftSystem
    side: str
    window_depth: int
    ratios: Mapping[Seg, float]

    def _stabilized(self, seg: Seg) -> Seg:
        cap = self.window_depth - 1 if seg.is_gap else self.window_depth
        if len(seg.word) <= cap:
            return seg
        return Seg(seg.kind, deep_window_of(seg.word, cap, self.side), seg.ordinal)

    def ratio_of(self, seg: Seg) -> float:
        hit = self.ratios.get(seg)
        if hit is None:
            hit = self.ratios.get(self._stabilized(seg))
        if hit is None:
            raise NotInDomain(f"no ratio stored for {seg}")
        return hit


def _ratio_source(x):
    return getattr(x, "ratio", x)


@dataclass(frozen=True)
class TrainTrackRealization:
    """Finite-depth interval lengths for one side of the track.

    `lengths` maps cylinder words (the root included, at length one) to
    interval lengths; `gap_lengths` maps (mother word, ordinal) pairs.
    Deeper segments are lengthed on demand by telescoping the ratio
    source.
    """

    sys: SftSystem
    side: str
    delta: float
    pressure: float
    depth: int
    window_depth: int
    lengths: Mapping[Symbols, float]
    gap_lengths: Mapping[tuple[Symbols, int], float]
    ratio: object

    def _cyl_length(self, word: Symbols) -> float:
        hit = self.lengths.get(word)
        if hit is not None:
            return hit
        if not self.sys.is_admissible(word):
            raise NotInDomain(f"inadmissible word {word}")
        return self._cyl_length(drop_deep(word, self.side)) * self.ratio.ratio_of(cyl(word))

    def length_of(self, seg: Seg) -> float:
        if seg.is_gap:
            hit = self.gap_lengths.get((seg.word, seg.ordinal))
            if hit is not None:
                return hit
            return self._cyl_length(seg.word) * self.ratio.ratio_of(seg)
        return self._cyl_length(seg.word)

    def child_ratio(self, seg: Seg) -> float:
        return self.ratio.ratio_of(seg)


def lengths_from_ratio(
    ratio,
    delta: Optional[float] = None,
    pressure: Optional[float] = None,
    depth: Optional[int] = None,
) -> TrainTrackRealization:
    """Telescope a ratio source into a length table from a unit root.

    `delta`, `pressure` and `depth` default to the source's own attributes
    (a synthesized ratio carries all three).
    """
    sys, side = ratio.sys, ratio.side
    if not sys.has_layout(side):
        raise NotInDomain(f"no layout recorded for the {side!r} side")
    layout = sys.layout(side)
    if delta is None:
        delta = getattr(ratio, "delta", None)
    if pressure is None:
        pressure = getattr(ratio, "pressure", None)
    if delta is None or pressure is None:
        raise ValueError("delta and pressure are needed when the source has none")
    if depth is None:
        depth = getattr(ratio, "depth", ratio.window_depth + 4)
    lengths: dict[Symbols, float] = {(): 1.0}
    gap_lengths: dict[tuple[Symbols, int], float] = {}
    row: list[Symbols] = [()]
    for _ in range(depth):
        nxt: list[Symbols] = []
        for m in row:
            base = lengths[m]
            for seg in layout.ordered_children(m):
                r = ratio.ratio_of(seg)
                if seg.is_gap:
                    if r < 0.0:
                        raise NegativeGap(f"gap ratio {r!r} under {m}")
                    gap_lengths[(seg.word, seg.ordinal)] = base * r
                else:
                    if r < 0.0 or not math.isfinite(r):
                        raise ValueError(f"bad cylinder ratio {r!r} at {seg.word}")
                    lengths[seg.word] = base * r
                    nxt.append(seg.word)
        row = nxt
    return TrainTrackRealization(
        sys=sys,
        side=side,
        delta=float(delta),
        pressure=float(pressure),
        depth=depth,
        window_depth=ratio.window_depth,
        lengths=lengths,
        gap_lengths=gap_lengths,
        ratio=ratio,
    )


def additivity_defect(tt: TrainTrackRealization) -> float:
    """Worst gap between a mother's length and the sum of its children."""
    layout = tt.sys.layout(tt.side)
    worst = 0.0
    row: list[Symbols] = [()]
    for _ in range(tt.depth):
        nxt: list[Symbols] = []
        for m in row:
            total = 0.0
            for seg in layout.ordered_children(m):
                total += tt.length_of(seg)
                if not seg.is_gap:
                    nxt.append(seg.word)
            worst = max(worst, abs(tt.lengths[m] - total))
        row = nxt
    return worst


def pressure_of(x, delta: float) -> float:
    """Log spectral radius of the window-transition matrix at exponent delta.

    States are the admissible windows at the source's stabilization depth;
    the transition weight into the deepened window is the child ratio
    raised to delta.
    """
    src = _ratio_source(x)
    sys, side, wd = src.sys, src.side, src.window_depth
    states = [w.symbols for w in enumerate_cylinders(sys, wd, side)]
    index = {s: i for i, s in enumerate(states)}
    T = np.zeros((len(states), len(states)))
    for i, w in enumerate(states):
        exts = sys.successors(w[-1]) if side == U_SIDE else sys.predecessors(w[0])
        for c in exts:
            child = deep_extend(w, c, side)
            j = index[deep_window_of(child, wd, side)]
            T[i, j] = src.ratio_of(cyl(child)) ** delta
    lam, _ = _pf_vector(T)
    return math.log(lam)


class DimensionReport(NamedTuple):
    delta: float
    pressure_residual: float
    iterations: int


def dimension_report(x) -> DimensionReport:
    """Solve pressure_of(x, delta) = 0 by bisection on (0, 1].

    Reports delta = 1.0 (zero iterations) when even the full exponent
    keeps the pressure non-negative (the side fills its interval); raises
    NoRoot when the pressure is already negative at the floor exponent.
    """
    src = _ratio_source(x)
    hi = 1.0
    if pressure_of(src, hi) >= 0.0:
        return DimensionReport(1.0, abs(pressure_of(src, 1.0)), 0)
    lo = DIM_DELTA_FLOOR
    if pressure_of(src, lo) <= 0.0:
        raise NoRoot(f"pressure is negative down to delta = {lo}")
    steps = 0
    for _ in range(DIM_MAX_STEPS):
        steps += 1
        mid = 0.5 * (lo + hi)
        if pressure_of(src, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < DIM_DELTA_TOL:
            break
    delta = 0.5 * (lo + hi)
    return DimensionReport(delta, abs(pressure_of(src, delta)), steps)


def hausdorff_dimension(x) -> float:
    """The root of the pressure equation; see dimension_report."""
    return dimension_report(x).delta


def _periodic_deep_word(rep: Symbols, length: int, side: str) -> Symbols:
    reps = rep * (length // len(rep) + 2)
    return reps[:length] if side == U_SIDE else reps[-length:]


def eigenvalue(tt: TrainTrackRealization, orbit: PeriodicOrbit) -> float:
    """Expansion factor of the periodic point under one period, from lengths.

    The reciprocal of the product of child ratios along one period at the
    stabilized deep end.
    """
    rep, p = orbit.representative, orbit.period
    if not tt.sys.is_admissible(rep + rep):
        raise NotInDomain(f"orbit word {rep} is not admissible")
    src = _ratio_source(tt)
    base = tt.window_depth + p + 2
    prod = 1.0
    for m in range(base + 1, base + p + 1):
        prod *= src.ratio_of(cyl(_periodic_deep_word(rep, m, tt.side)))
    return 1.0 / prod


def _cyclic_window(rep: Symbols, anchor: int, length: int, side: str) -> Symbols:
    p = len(rep)
    if side == U_SIDE:
        return tuple(rep[(anchor + t) % p] for t in range(length))
    return tuple(rep[(anchor - (length - 1) + t) % p] for t in range(length))


def eigenvalue_via_measure(
    g: GibbsMeasure,
    delta: float,
    pressure: float,
    orbit: PeriodicOrbit,
    side: str,
    periods: int = 1,
) -> float:
    """Eigenvalue of a periodic point from the measure scaling function.

    Multiplies the deeper-conditional scaling values around `periods`
    turns of the orbit and applies the exponent -1/delta together with
    the pressure correction.
    """
    rep, p = orbit.representative, orbit.period
    if not g.sys.is_admissible(rep + rep):
        raise NotInDomain(f"orbit word {rep} is not admissible")
    L = max(g.span, 2) + p
    prod = 1.0
    for i in range(p * periods):
        w = _cyclic_window(rep, i, L, side)
        prod *= measure_scaling(g, g.sys.word(w, side))
    return prod ** (-1.0 / delta) * math.exp(-(p * periods) * pressure / delta)


def livsic_sinai_check(
    tt_u: TrainTrackRealization,
    tt_s: TrainTrackRealization,
    p_max: int,
) -> list[tuple[PeriodicOrbit, float]]:
    """Residuals of the eigenvalue formula over all orbits up to p_max.

    For each periodic orbit the two sides must weigh the expansion
    identically: delta * log(eigenvalue) + period * pressure, side by
    side.  Returns one (orbit, residual) row per orbit.
    """
    if tt_u.sys != tt_s.sys:
        raise MismatchedSystems("the two sides realize different systems")
    if tt_u.side != U_SIDE or tt_s.side != S_SIDE:
        raise MismatchedSystems(
            f"expected sides ('u', 's'), got ({tt_u.side!r}, {tt_s.side!r})"
        )
    rows: list[tuple[PeriodicOrbit, float]] = []
    for orbit in periodic_orbits(tt_u.sys, p_max):
        lam_u = eigenvalue(tt_u, orbit)
        lam_s = eigenvalue(tt_s, orbit)
        p = orbit.period
        res = abs(
            tt_s.delta * math.log(lam_s)
            + p * tt_s.pressure
            - tt_u.delta * math.log(lam_u)
            - p * tt_u.pressure
        )
        rows.append((orbit, res))
    return rows


def natural_measure_check(
    tt: TrainTrackRealization,
    g: GibbsMeasure,
) -> tuple[float, float]:
    """Range of nu(I) / (len(I)^delta * e^(-n * pressure)) over all cylinders.

    A tight range certifies that the measure is the natural length-power
    measure of the realization.
    """
    if g.sys != tt.sys:
        raise MismatchedSystems("measure and realization live on different systems")
    lo, hi = math.inf, -math.inf
    for n in range(1, tt.depth + 1):
        discount = math.exp(-n * tt.pressure)
        for w in enumerate_cylinders(tt.sys, n, tt.side):
            val = g.measure(w) / (tt.length_of(cyl(w.symbols)) ** tt.delta * discount)
            lo, hi = min(lo, val), max(hi, val)
    return lo, hi


def dual_pair(g: GibbsMeasure, tt: TrainTrackRealization) -> TrainTrackRealization:
    """Realize the opposite side by the measure itself.

    The dual side must fill its interval (no gap entries in its layout);
    lengths are the cylinder measures, the exponent is one and the
    pressure constant zero, so the natural measure identity is exact.
    """
    sys = tt.sys
    if g.sys != sys:
        raise MismatchedSystems("measure and realization live on different systems")
    dside = opposite(tt.side)
    if not sys.has_layout(dside):
        raise GapOnDualSide(f"the {dside!r} side has no layout to realize")
    if sys.layout(dside).has_gaps:
        raise GapOnDualSide(f"the {dside!r} side has gap room; duality needs none")
    wd = max(g.span, 2)
    ratios: dict[Seg, float] = {}
    for n in range(1, wd + 1):
        for w in enumerate_cylinders(sys, n, dside):
            m = drop_deep(w.symbols, dside)
            nu_m = 1.0 if not m else g.measure(m)
            ratios[cyl(w.symbols)] = g.measure(w) / nu_m
    lengths: dict[Symbols, float] = {(): 1.0}
    for n in range(1, tt.depth + 1):
        for w in enumerate_cylinders(sys, n, dside):
            lengths[w.symbols] = g.measure(w)
    return TrainTrackRealization(
        sys=sys,
        side=dside,
        delta=1.0,
        pressure=0.0,
        depth=tt.depth,
        window_depth=wd,
        lengths=lengths,
        gap_lengths={},
        ratio=RatioTable(sys, dside, wd, ratios),
    )
