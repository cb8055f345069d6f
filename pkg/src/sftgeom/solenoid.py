"""Solenoid functions: sibling ratios, their extension to arbitrary
segment pairs, and the boundary compatibility checks.

A solenoid spec stores ratio values on sibling pairs at every depth up
to its stabilisation depth; deeper pairs are looked up through their
deep-end windows. Specs built from a Gibbs measure live on cylinder
pairs only ("leaf-leaf"); specs read off a train-track realization on a
side with gaps also price the gaps ("leaf-gap").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, NamedTuple, Optional, Union

from .errors import (
    MismatchedSystems,
    MissingPairValue,
    NotInDomain,
    WordTooShort,
)
from .gibbs import AdmissiblePair, GibbsMeasure, extended_scaling
from .sft import (
    BoundaryData,
    GapLayout,
    Seg,
    SftSystem,
    Symbols,
    U_SIDE,
    Word,
    enumerate_cylinders,
    opposite,
)

PairKey = tuple[Seg, Seg]


@dataclass(frozen=True)
class SolenoidSpec:
    """A tabulated solenoid function on one side.

    `values` maps ordered segment pairs to ratios size(first)/size(second).
    Keys at depth up to `stabilization` are exact; deeper queries are
    truncated to their deep-end windows. The Hoelder data and the value
    range are recorded from the table, not certified.
    """

    side: str
    domain_kind: str  # "leaf-leaf" or "leaf-gap"
    stabilization: int
    values: Mapping[PairKey, float]
    holder_alpha: float
    holder_constant: float
    v_min: float
    v_max: float
    boundary_agnostic: bool = False

    def __post_init__(self) -> None:
        if self.domain_kind not in ("leaf-leaf", "leaf-gap"):
            raise ValueError(f"unknown domain kind {self.domain_kind!r}")

    def _truncate(self, seg: Seg) -> Seg:
        cap = self.stabilization if seg.kind == "cyl" else self.stabilization - 1
        w = seg.word
        if len(w) > cap:
            w = w[-cap:] if self.side == U_SIDE else w[:cap]
            if cap <= 0:
                w = ()
            return Seg(seg.kind, w, seg.ordinal)
        return seg

    def sigma(self, a: Seg, b: Seg) -> float:
        """Ratio of segment a to segment b."""
        key = (self._truncate(a), self._truncate(b))
        if key[0] == key[1]:
            # Reciprocity forces the diagonal: sigma(a, a)^2 = 1.
            return 1.0
        hit = self.values.get(key)
        if hit is not None:
            return hit
        back = self.values.get((key[1], key[0]))
        if back is not None:
            return 1.0 / back
        raise MissingPairValue(f"no stored ratio for {a} against {b}")

    def validate(self) -> list[str]:
        problems = []
        for (a, b), v in self.values.items():
            if not v > 0 or not math.isfinite(v):
                problems.append(f"ratio for ({a}, {b}) is not a positive float")
            elif not self.v_min - 1e-12 <= v <= self.v_max + 1e-12:
                problems.append(f"ratio for ({a}, {b}) escapes the recorded range")
        for (a, b), v in self.values.items():
            w = self.values.get((b, a))
            if w is not None and abs(v * w - 1.0) > 1e-9:
                problems.append(f"ratios for ({a}, {b}) are not reciprocal")
        return problems


def _deep_agreement(side: str, w1: Symbols, w2: Symbols) -> int:
    if side == U_SIDE:
        pairs = zip(reversed(w1), reversed(w2))
    else:
        pairs = zip(w1, w2)
    q = 0
    for a, b in pairs:
        if a != b:
            break
        q += 1
    return q


def _holder_from_values(
    side: str, values: Mapping[PairKey, float], alpha: float
) -> float:
    worst = 0.0
    items = list(values.items())
    for (k1, v1), (k2, v2) in combinations(items, 2):
        ok = all(
            s1.kind == s2.kind
            and s1.ordinal == s2.ordinal
            and len(s1.word) == len(s2.word)
            for s1, s2 in zip(k1, k2)
        )
        if not ok:
            continue
        q = min(
            _deep_agreement(side, s1.word, s2.word) for s1, s2 in zip(k1, k2)
        )
        worst = max(worst, abs(v1 - v2) * 2.0 ** (alpha * q))
    return worst


def holder_estimate(spec: SolenoidSpec, alpha: Optional[float] = None) -> float:
    """Empirical Hoelder constant of the table at exponent alpha.

    Compares every pair of structurally matching keys; the distance
    between two keys is 2^(-q) with q the deep-end agreement of both
    coordinates. Always finite on a finite table.
    """
    a = spec.holder_alpha if alpha is None else alpha
    return _holder_from_values(spec.side, spec.values, a)


def _expanded_row(layout: GapLayout, word: Symbols, remaining: int) -> list[Seg]:
    """The geometric order of depth-`remaining` leaves below `word`,
    keeping the gap segments of every intermediate level in place."""
    if remaining == 0:
        return [Seg("cyl", word)]
    out: list[Seg] = []
    for child in layout.ordered_children(word):
        if child.is_gap:
            out.append(child)
        else:
            out.extend(_expanded_row(layout, child.word, remaining - 1))
    return out


def _row_leaf_pairs(layout: GapLayout, depth: int) -> list[PairKey]:
    """Consecutive leaf pairs at one depth: adjacent on a side without
    gaps, flanking exactly one gap on a side with them."""
    row = _expanded_row(layout, (), depth)
    need = 1 if layout.has_gaps else 0
    out: list[PairKey] = []
    for i, seg in enumerate(row):
        if seg.is_gap:
            continue
        j = i + 1
        gaps = 0
        while j < len(row) and row[j].is_gap:
            gaps += 1
            j += 1
        if j < len(row) and gaps == need:
            out.append((seg, row[j]))
    return out


def _row_neighbour_pairs(layout: GapLayout, depth: int) -> list[PairKey]:
    """Every consecutive pair in the expanded row, gap segments included."""
    row = _expanded_row(layout, (), depth)
    return list(zip(row, row[1:]))


def _agnostic_children(sys: SftSystem, side: str, mw: Symbols) -> list[Seg]:
    if not mw:
        syms = range(sys.k)
    elif side == U_SIDE:
        syms = sys.successors(mw[-1])
    else:
        syms = sys.predecessors(mw[0])
    if side == U_SIDE:
        return [Seg("cyl", mw + (a,)) for a in syms]
    return [Seg("cyl", (a,) + mw) for a in syms]


def _agnostic_pairs(sys: SftSystem, side: str, depth: int) -> list[PairKey]:
    out: list[PairKey] = []
    mothers = (
        [()]
        if depth == 1
        else [w.symbols for w in enumerate_cylinders(sys, depth - 1, side)]
    )
    for mw in mothers:
        kids = _agnostic_children(sys, side, mw)
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                out.append((kids[i], kids[j]))
    return out


def from_gibbs(g: GibbsMeasure, side: str) -> SolenoidSpec:
    """The measure solenoid of a Gibbs state, tabulated on sibling pairs.

    Without a registered layout every sibling pair is admitted and the
    spec is flagged boundary-agnostic.
    """
    sys = g.sys
    stab = max(g.span, 2)
    agnostic = not sys.has_layout(side)
    values: dict[PairKey, float] = {}
    for d in range(1, stab + 1):
        if agnostic:
            pairs = _agnostic_pairs(sys, side, d)
        else:
            pairs = _row_leaf_pairs(sys.layout(side), d)
        for a, b in pairs:
            if (a, b) in values or (b, a) in values:
                continue
            if g.exact:
                values[(a, b)] = float(
                    g.measure_exact(a.word) / g.measure_exact(b.word)
                )
            else:
                values[(a, b)] = g.measure(a.word) / g.measure(b.word)
    spread = list(values.values()) + [1.0 / v for v in values.values()]
    return SolenoidSpec(
        side=side,
        domain_kind="leaf-leaf",
        stabilization=stab,
        values=values,
        holder_alpha=1.0,
        holder_constant=_holder_from_values(side, values, 1.0),
        v_min=min(spread),
        v_max=max(spread),
        boundary_agnostic=agnostic,
    )


def from_realization(tt) -> SolenoidSpec:
    """Read the solenoid of a train-track realization off its lengths.

    On a side with gaps the domain keeps the gap segments ("leaf-gap")
    and every consecutive pair in the geometric row order is priced,
    which covers sibling chains as well as pairs that touch across a
    mother boundary.
    """
    sys = tt.sys
    side = tt.side
    layout = sys.layout(side)
    kind = "leaf-gap" if layout.has_gaps else "leaf-leaf"
    stab = max(tt.window_depth, 2)
    values: dict[PairKey, float] = {}
    for d in range(1, stab + 1):
        pairs = list(_row_neighbour_pairs(layout, d)) + _row_leaf_pairs(layout, d)
        for a, b in pairs:
            if kind == "leaf-leaf" and (a.is_gap or b.is_gap):
                continue
            if (a, b) in values or (b, a) in values:
                continue
            values[(a, b)] = tt.length_of(a) / tt.length_of(b)
    spread = list(values.values()) + [1.0 / v for v in values.values()]
    return SolenoidSpec(
        side=side,
        domain_kind=kind,
        stabilization=stab,
        values=values,
        holder_alpha=1.0,
        holder_constant=_holder_from_values(side, values, 1.0),
        v_min=min(spread),
        v_max=max(spread),
        boundary_agnostic=False,
    )


# ----------------------------------------------------------------------
# pointwise measure solenoid


def measure_solenoid(g: GibbsMeasure, psi: Word, xi: Word, side: str) -> float:
    """Ratio of two sibling cylinders, checked against the side's layout.

    Siblings share a mother and differ in the deep symbol; on a side
    with gaps they must flank exactly one gap, without gaps they must be
    adjacent. With no layout registered any sibling pair is accepted.
    """
    if psi.side != side or xi.side != side:
        raise NotInDomain("both words must live on the stated side")
    if len(psi) != len(xi):
        raise NotInDomain("sibling words have equal depth")
    if len(psi) < g.span:
        raise WordTooShort(
            f"solenoid values need words of depth at least {g.span}"
        )
    if side == U_SIDE:
        mw, a, b = psi.symbols[:-1], psi.symbols[-1], xi.symbols[-1]
        same_mother = xi.symbols[:-1] == mw
    else:
        mw, a, b = psi.symbols[1:], psi.symbols[0], xi.symbols[0]
        same_mother = xi.symbols[1:] == mw
    if not same_mother or a == b:
        raise NotInDomain("words are not distinct siblings")
    if g.sys.has_layout(side):
        layout = g.sys.layout(side)
        segs = layout.ordered_children(mw)
        pos = {s: i for i, s in enumerate(segs) if not s.is_gap}
        ia = pos[Seg("cyl", psi.symbols)]
        ib = pos[Seg("cyl", xi.symbols)]
        lo, hi = min(ia, ib), max(ia, ib)
        between = segs[lo + 1 : hi]
        if layout.has_gaps:
            if len(between) != 1 or not between[0].is_gap:
                raise NotInDomain("siblings must flank exactly one gap")
        elif between:
            raise NotInDomain("siblings must be adjacent in the layout")
    return g.measure(psi.symbols) / g.measure(xi.symbols)


# ----------------------------------------------------------------------
# extension to arbitrary segment pairs


def _as_side_seg(x: Union[Word, Seg], side: str) -> Seg:
    if isinstance(x, Word):
        if x.side != side:
            raise NotInDomain(f"word is on side {x.side!r}, spec wants {side!r}")
        return Seg("cyl", x.symbols)
    return x


def _chain_segs(spec: SolenoidSpec, layout: GapLayout, mw: Symbols) -> list[Seg]:
    segs = layout.ordered_children(mw)
    if spec.domain_kind == "leaf-leaf":
        segs = [s for s in segs if not s.is_gap]
    return segs


def _mother_over_child(
    spec: SolenoidSpec, layout: GapLayout, mw: Symbols, child: Seg
) -> float:
    """size(mother)/size(child) summed through the sibling chain."""
    chain = _chain_segs(spec, layout, mw)
    try:
        s = chain.index(child)
    except ValueError:
        raise NotInDomain(f"{child} is not a child of {mw}") from None
    total = 1.0
    r = 1.0
    for i in range(s - 1, -1, -1):
        r *= spec.sigma(chain[i], chain[i + 1])
        total += r
    r = 1.0
    for i in range(s + 1, len(chain)):
        r *= spec.sigma(chain[i], chain[i - 1])
        total += r
    return total


def _up_to_root(spec: SolenoidSpec, layout: GapLayout, seg: Seg) -> float:
    """size(root)/size(seg), telescoped through the mothers."""
    up = 1.0
    cur = seg
    while True:
        if cur.is_gap:
            mw = cur.word
        elif len(cur.word) >= 1:
            mw = cur.word[:-1] if spec.side == U_SIDE else cur.word[1:]
        else:
            return up
        up *= _mother_over_child(spec, layout, mw, cur)
        cur = Seg("cyl", mw)


def extend_scaling(
    spec: SolenoidSpec,
    sys: SftSystem,
    k: Union[Word, Seg],
    j: Union[Word, Seg],
) -> float:
    """size(k)/size(j) for any two segments, chained through the layout.

    Gap segments are only meaningful for leaf-gap specs.
    """
    layout = sys.layout(spec.side)
    ks = _as_side_seg(k, spec.side)
    js = _as_side_seg(j, spec.side)
    if spec.domain_kind == "leaf-leaf" and (ks.is_gap or js.is_gap):
        raise NotInDomain("gap segments need a leaf-gap solenoid spec")
    if ks == js:
        return 1.0
    return _up_to_root(spec, layout, js) / _up_to_root(spec, layout, ks)


# ----------------------------------------------------------------------
# boundary compatibility checks


def _data_or_empty(sys: SftSystem, data: Optional[BoundaryData]) -> BoundaryData:
    if data is not None:
        return data
    return sys.boundary_data if sys.boundary_data is not None else BoundaryData()


class ConditionRow(NamedTuple):
    """Both sides of one boundary-condition instance, plus their gap."""

    ident: str
    lhs: float
    rhs: float
    residual: float


def _row(ident: str, lhs: float, rhs: float) -> ConditionRow:
    return ConditionRow(ident, lhs, rhs, abs(lhs - rhs))


def matching_rows(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[ConditionRow]:
    """Evaluate the matching condition on every recorded instance.

    Each instance supplies a pair of touching segments and a chain that
    decomposes their union; the split tells how many chain members make
    up the left segment.
    """
    data = _data_or_empty(sys, data)
    out = []
    for inst in data.matching_instances:
        if inst.side != spec.side:
            continue
        t = 1.0
        terms = [1.0]
        for prev, cur in zip(inst.chain, inst.chain[1:]):
            t *= spec.sigma(cur, prev)
            terms.append(t)
        num = sum(terms[: inst.split])
        den = sum(terms[inst.split :])
        lhs = spec.sigma(inst.left, inst.right)
        out.append(_row(inst.ident, lhs, num / den))
    return out


def boundary_rows(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[ConditionRow]:
    """Evaluate the boundary condition: two decompositions hanging off
    the same base segment must have equal chained totals."""
    data = _data_or_empty(sys, data)
    out = []
    for inst in data.boundary_instances:
        if inst.side != spec.side:
            continue
        sums = []
        for dec in (inst.dec_a, inst.dec_b):
            t = 1.0
            total = 0.0
            prev = inst.base
            for seg in dec:
                t *= spec.sigma(seg, prev)
                total += t
                prev = seg
            sums.append(total)
        out.append(_row(inst.ident, sums[0], sums[1]))
    return out


def cylinder_gap_rows(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[ConditionRow]:
    """Evaluate the cylinder-gap condition: the stored ratio of the pair
    must match the chained sizes of the decomposition segments against
    its final gap."""
    data = _data_or_empty(sys, data)
    out = []
    for inst in data.cylindergap_instances:
        if inst.side != spec.side:
            continue
        gap_seg = inst.segments[-1]
        rhs = sum(
            extend_scaling(spec, sys, seg, gap_seg) for seg in inst.segments[:-1]
        )
        lhs = spec.sigma(inst.pair_cyl, inst.pair_gap)
        out.append(_row(inst.ident, lhs, rhs))
    return out


def cylinder_cylinder_rows(
    g: GibbsMeasure, data: Optional[BoundaryData] = None
) -> list[ConditionRow]:
    """Evaluate the cylinder-cylinder condition across a shared boundary
    leaf, through the extended scaling function."""
    data = _data_or_empty(g.sys, data)
    out = []
    for inst in data.cylindercylinder_instances:
        leaf_side = opposite(inst.side)
        xi = Word(inst.xi, leaf_side)
        eta = Word(inst.eta, leaf_side)
        r1 = extended_scaling(g, AdmissiblePair(xi, Word(inst.c1, inst.side)))
        r2 = extended_scaling(g, AdmissiblePair(xi, Word(inst.c2, inst.side)))
        rds = [
            extended_scaling(g, AdmissiblePair(eta, Word(d, inst.side)))
            for d in inst.ds
        ]
        p = inst.split
        lhs = r2 / r1
        rhs = sum(rds[p - 1 :]) / sum(rds[: p - 1])
        out.append(_row(inst.ident, lhs, rhs))
    return out


def _residuals(rows: list[ConditionRow]) -> list[tuple[str, float]]:
    return [(r.ident, r.residual) for r in rows]


def check_matching(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[tuple[str, float]]:
    """Residuals of the matching condition on every recorded instance."""
    return _residuals(matching_rows(spec, sys, data))


def check_boundary(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[tuple[str, float]]:
    """Residuals of the boundary condition on every recorded instance."""
    return _residuals(boundary_rows(spec, sys, data))


def check_cylinder_gap(
    spec: SolenoidSpec, sys: SftSystem, data: Optional[BoundaryData] = None
) -> list[tuple[str, float]]:
    """Residuals of the cylinder-gap condition on every recorded instance."""
    return _residuals(cylinder_gap_rows(spec, sys, data))


def check_cylinder_cylinder(
    g: GibbsMeasure, data: Optional[BoundaryData] = None
) -> list[tuple[str, float]]:
    """Residuals of the cylinder-cylinder condition on every instance."""
    return _residuals(cylinder_cylinder_rows(g, data))


# ----------------------------------------------------------------------
# equivalence checks


def bounded_equivalence(
    spec1: SolenoidSpec, spec2: SolenoidSpec, sys: SftSystem, n_max: int
) -> tuple[bool, float]:
    """Whether two solenoids stay boundedly close along the mother chains.

    Compares log size(J)/size(ancestor) under both specs over all words
    down to depth n_max + 1 and watches the growth of the worst gap
    between depths n_max - 2 and n_max.
    """
    if spec1.side != spec2.side:
        raise MismatchedSystems("solenoid specs live on different sides")
    if n_max < 3:
        raise ValueError("need depth at least 3 to see the growth trend")

    def worst_at(i: int) -> float:
        w = 0.0
        for word in enumerate_cylinders(sys, i + 1, spec1.side):
            prim = (
                Seg("cyl", word.symbols[:1])
                if spec1.side == U_SIDE
                else Seg("cyl", word.symbols[-1:])
            )
            child = Seg("cyl", word.symbols)
            s1 = extend_scaling(spec1, sys, child, prim)
            s2 = extend_scaling(spec2, sys, child, prim)
            w = max(w, abs(math.log(s1) - math.log(s2)))
        return w

    per_depth = [worst_at(i) for i in range(1, n_max + 1)]
    c_full = max(per_depth)
    c_earlier = max(per_depth[: n_max - 2])
    return (c_full - c_earlier < 1e-6, c_full)


def bounded_solenoid_class_check(
    spec: SolenoidSpec,
    g: GibbsMeasure,
    delta: float,
    pressure: float,
    n_max: int,
) -> float:
    """Worst deviation of delta * log-size from the log of the measure
    ratio function, after removing the pressure drift. Bounded exactly
    when the realization carries the (delta, pressure) Gibbs class."""
    worst = 0.0
    leaf_side = opposite(spec.side)
    for n in range(2, n_max + 1):
        for word in enumerate_cylinders(g.sys, n, spec.side):
            prim = (
                Seg("cyl", word.symbols[:1])
                if spec.side == U_SIDE
                else Seg("cyl", word.symbols[-1:])
            )
            s = extend_scaling(spec, g.sys, Seg("cyl", word.symbols), prim)
            xi = Word((word.pivot,), leaf_side)
            rho = extended_scaling(g, AdmissiblePair(xi, word))
            val = delta * math.log(s) - math.log(rho) - (n - 1) * pressure
            worst = max(worst, abs(val))
    return worst


# ----------------------------------------------------------------------
# serialization


def solenoid_to_json(spec: SolenoidSpec) -> str:
    import json

    def seg_enc(s: Seg) -> list:
        return ["gap", list(s.word), s.ordinal] if s.is_gap else ["cyl", list(s.word)]

    rows = [
        [seg_enc(a), seg_enc(b), v]
        for (a, b), v in sorted(
            spec.values.items(), key=lambda kv: (repr(kv[0][0]), repr(kv[0][1]))
        )
    ]
    obj = {
        "side": spec.side,
        "domain_kind": spec.domain_kind,
        "stabilization": spec.stabilization,
        "values": rows,
        "holder_alpha": spec.holder_alpha,
        "holder_constant": spec.holder_constant,
        "v_min": spec.v_min,
        "v_max": spec.v_max,
        "boundary_agnostic": spec.boundary_agnostic,
    }
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def solenoid_from_json(text: str) -> SolenoidSpec:
    import json

    obj = json.loads(text)

    def seg_dec(row) -> Seg:
        if row[0] == "gap":
            return Seg("gap", tuple(row[1]), int(row[2]))
        return Seg("cyl", tuple(row[1]))

    values = {
        (seg_dec(a), seg_dec(b)): float(v) for a, b, v in obj["values"]
    }
    return SolenoidSpec(
        side=obj["side"],
        domain_kind=obj["domain_kind"],
        stabilization=int(obj["stabilization"]),
        values=values,
        holder_alpha=float(obj["holder_alpha"]),
        holder_constant=float(obj["holder_constant"]),
        v_min=float(obj["v_min"]),
        v_max=float(obj["v_max"]),
        boundary_agnostic=bool(obj["boundary_agnostic"]),
    )
