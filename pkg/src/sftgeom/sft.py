"""Two-sided subshifts of finite type: words, cylinders, orbits, layouts.

Conventions used throughout the package:

* Symbols are 0-based integers.
* A word stores its symbols in chronological order regardless of side.
  A future ("u") word starts at its pivot and grows deeper by appending
  on the right; a past ("s") word ends at its pivot and grows deeper by
  prepending on the left.  The admissibility check is therefore the same
  for both sides: A[w[i]][w[i+1]] == 1 for consecutive entries.
* The mother of a word drops symbols at the deep end (last for "u",
  first for "s"), so refining a cylinder always extends the deep end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    InadmissibleBoundaryWord,
    MalformedInstance,
    NotPrimitive,
    TooShallow,
)

Symbols = tuple[int, ...]

U_SIDE = "u"
S_SIDE = "s"
SIDES = (U_SIDE, S_SIDE)


def opposite(side: str) -> str:
    if side == U_SIDE:
        return S_SIDE
    if side == S_SIDE:
        return U_SIDE
    raise ValueError(f"side must be one of {SIDES}, got {side!r}")


def deep_window_of(symbols: Sequence[int], depth: int, side: str) -> Symbols:
    """Deep-end window: the last `depth` symbols of a "u" tuple, the first of an "s" tuple."""
    if depth <= 0:
        return ()
    syms = tuple(symbols)
    if len(syms) <= depth:
        return syms
    return syms[-depth:] if side == U_SIDE else syms[:depth]


def deep_extend(symbols: Sequence[int], symbol: int, side: str) -> Symbols:
    """Extend a symbol tuple by one symbol at its deep end."""
    syms = tuple(symbols)
    return syms + (symbol,) if side == U_SIDE else (symbol,) + syms


def drop_deep(symbols: Sequence[int], side: str) -> Symbols:
    """Drop the deep-end symbol (the mother map on raw tuples)."""
    syms = tuple(symbols)
    if not syms:
        raise ValueError("the empty word has no deep end")
    return syms[:-1] if side == U_SIDE else syms[1:]


@dataclass(frozen=True, order=True)
class Word:
    """A finite admissible word on one side of the shift."""

    symbols: Symbols
    side: str

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def pivot(self) -> int:
        """The time-zero symbol: first for future words, last for past."""
        if not self.symbols:
            raise ValueError("the empty word has no pivot")
        return self.symbols[0] if self.side == U_SIDE else self.symbols[-1]

    @property
    def deep_symbol(self) -> int:
        if not self.symbols:
            raise ValueError("the empty word has no deep symbol")
        return self.symbols[-1] if self.side == U_SIDE else self.symbols[0]

    def deepen(self, symbol: int) -> "Word":
        """Extend by one symbol at the deep end."""
        if self.side == U_SIDE:
            return Word(self.symbols + (symbol,), self.side)
        return Word((symbol,) + self.symbols, self.side)

    def deep_window(self, depth: int) -> Symbols:
        """The deepest `depth` symbols, keeping chronological order."""
        if depth <= 0:
            return ()
        if self.side == U_SIDE:
            return self.symbols[-depth:]
        return self.symbols[:depth]


@dataclass(frozen=True, order=True)
class GapWord:
    """A gap named by its mother word and position among that mother's gaps."""

    mother_symbols: Symbols
    ordinal: int
    side: str


@dataclass(frozen=True, order=True)
class Seg:
    """Segment descriptor used by boundary-instance tables.

    kind is "cyl" or "gap"; for gaps, `word` is the mother word and
    `ordinal` indexes the gap within the mother's layout.
    """

    kind: str
    word: Symbols
    ordinal: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("cyl", "gap"):
            raise ValueError(f"unknown segment kind {self.kind!r}")

    @property
    def is_gap(self) -> bool:
        return self.kind == "gap"


def cyl(word: Sequence[int]) -> Seg:
    return Seg("cyl", tuple(word))


def gap(mother: Sequence[int], ordinal: int = 0) -> Seg:
    return Seg("gap", tuple(mother), ordinal)


# Layout entries: ("cyl", symbol) for a cylinder child, ("gap",) for a gap.
LayoutEntry = tuple
CYL_ENTRY = "cyl"
GAP_ENTRY = "gap"


@dataclass(frozen=True)
class GapLayout:
    """Ordered children (cylinders and gaps) per deep symbol, for one side.

    Keys of `entries`: None for the root (primary cylinders of the whole
    track) and each symbol a for the children of words with deep symbol a.
    The first and last entry of every list must be cylinders; the cylinder
    symbols must enumerate exactly the admissible extensions at the deep
    end (successors of a for the "u" side, predecessors for "s").
    """

    side: str
    entries: Mapping[Optional[int], tuple[LayoutEntry, ...]]

    def entry_list(self, key: Optional[int]) -> tuple[LayoutEntry, ...]:
        return self.entries[key]

    def key_for(self, word: Symbols) -> Optional[int]:
        if not word:
            return None
        return word[-1] if self.side == U_SIDE else word[0]

    def child_word(self, word: Symbols, symbol: int) -> Symbols:
        if self.side == U_SIDE:
            return word + (symbol,)
        return (symbol,) + word

    def ordered_children(self, word: Symbols) -> list[Seg]:
        """Children of `word` in geometric order, gaps included."""
        out: list[Seg] = []
        n_gap = 0
        for entry in self.entries[self.key_for(word)]:
            if entry[0] == CYL_ENTRY:
                out.append(Seg("cyl", self.child_word(word, entry[1])))
            else:
                out.append(Seg("gap", word, n_gap))
                n_gap += 1
        return out

    def cylinder_children(self, word: Symbols) -> list[Symbols]:
        return [s.word for s in self.ordered_children(word) if not s.is_gap]

    def gap_count(self, word: Symbols) -> int:
        return sum(1 for e in self.entries[self.key_for(word)] if e[0] == GAP_ENTRY)

    @property
    def has_gaps(self) -> bool:
        return any(
            e[0] == GAP_ENTRY for lst in self.entries.values() for e in lst
        )


@dataclass(frozen=True)
class MatchingInstance:
    ident: str
    side: str
    left: Seg
    right: Seg
    chain: tuple[Seg, ...]
    split: int


@dataclass(frozen=True)
class BoundaryInstance:
    ident: str
    side: str
    base: Seg
    dec_a: tuple[Seg, ...]
    dec_b: tuple[Seg, ...]


@dataclass(frozen=True)
class CylinderGapInstance:
    ident: str
    side: str
    pair_cyl: Seg
    pair_gap: Seg
    segments: tuple[Seg, ...]  # J_1 .. J_m, the last one is the gap J_m


@dataclass(frozen=True)
class CylinderCylinderInstance:
    ident: str
    side: str
    xi: Symbols  # leaf word, opposite side, realizing the shared boundary
    c1: Symbols
    c2: Symbols
    eta: Symbols  # leaf word in the neighbouring rectangle's coordinates
    ds: tuple[Symbols, ...]  # D_1 .. D_m
    split: int  # p: ds[:p-1] decompose C_1's segment, ds[p-1:] C_2's


@dataclass(frozen=True)
class CocycleGapOrbit:
    """One periodic boundary leaf with its two rectangle readings."""

    ident: str
    side: str  # side of the track being realized (the gap side)
    orbit: Symbols  # orbit word of the boundary leaf, opposite side
    m1_pivot: int
    m2_pivot: int


@dataclass(frozen=True)
class BoundaryData:
    matching_instances: tuple[MatchingInstance, ...] = ()
    boundary_instances: tuple[BoundaryInstance, ...] = ()
    cylindergap_instances: tuple[CylinderGapInstance, ...] = ()
    cylindercylinder_instances: tuple[CylinderCylinderInstance, ...] = ()
    cocyclegap_orbits: tuple[CocycleGapOrbit, ...] = ()

    def all_words(self) -> Iterator[Symbols]:
        for inst in self.matching_instances:
            yield inst.left.word
            yield inst.right.word
            for seg in inst.chain:
                yield seg.word
        for inst in self.boundary_instances:
            yield inst.base.word
            for seg in inst.dec_a + inst.dec_b:
                yield seg.word
        for inst in self.cylindergap_instances:
            yield inst.pair_cyl.word
            yield inst.pair_gap.word
            for seg in inst.segments:
                yield seg.word
        for inst in self.cylindercylinder_instances:
            yield inst.xi
            yield inst.c1
            yield inst.c2
            yield inst.eta
            yield from inst.ds
        for orb in self.cocyclegap_orbits:
            yield orb.orbit


@dataclass(frozen=True)
class PeriodicOrbit:
    """A cyclic admissible word of least period p, canonical rotation."""

    representative: Symbols
    period: int

    def rotations(self) -> list[Symbols]:
        w = self.representative
        return [w[i:] + w[:i] for i in range(self.period)]


class SftSystem:
    """A validated two-sided subshift of finite type."""

    def __init__(
        self,
        k: int,
        matrix: Sequence[Sequence[int]],
        primitivity_exponent: int,
        layouts: Optional[Mapping[str, GapLayout]] = None,
        boundary_data: Optional[BoundaryData] = None,
    ) -> None:
        self.k = k
        self.A = tuple(tuple(int(x) for x in row) for row in matrix)
        self.primitivity_exponent = primitivity_exponent
        self.layouts = dict(layouts) if layouts else {}
        self.boundary_data = boundary_data
        self._succ = tuple(
            tuple(b for b in range(k) if self.A[a][b] == 1) for a in range(k)
        )
        self._pred = tuple(
            tuple(a for a in range(k) if self.A[a][b] == 1) for b in range(k)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SftSystem):
            return NotImplemented
        return (
            self.k == other.k
            and self.A == other.A
            and self.layouts == other.layouts
            and self.boundary_data == other.boundary_data
        )

    def __repr__(self) -> str:
        return f"SftSystem(k={self.k}, A={self.A})"

    def successors(self, a: int) -> tuple[int, ...]:
        return self._succ[a]

    def predecessors(self, b: int) -> tuple[int, ...]:
        return self._pred[b]

    def is_admissible(self, symbols: Sequence[int]) -> bool:
        for s in symbols:
            if not 0 <= s < self.k:
                return False
        return all(
            self.A[symbols[i]][symbols[i + 1]] == 1
            for i in range(len(symbols) - 1)
        )

    def word(self, symbols: Sequence[int], side: str) -> Word:
        syms = tuple(symbols)
        if not self.is_admissible(syms):
            raise ValueError(f"inadmissible word {syms}")
        return Word(syms, side)

    def deep_extensions(self, word: Word) -> list[int]:
        """Symbols that may extend `word` at its deep end."""
        if not word.symbols:
            return list(range(self.k))
        if word.side == U_SIDE:
            return list(self._succ[word.symbols[-1]])
        return list(self._pred[word.symbols[0]])

    def layout(self, side: str) -> GapLayout:
        try:
            return self.layouts[side]
        except KeyError:
            raise KeyError(f"system has no {side}-side layout") from None

    def has_layout(self, side: str) -> bool:
        return side in self.layouts

    def delta_is_one(self, side: str) -> bool:
        """True when the side's train-track has no gaps."""
        return not self.layout(side).has_gaps

    def trace_power(self, p: int) -> int:
        m = np.array(self.A, dtype=np.int64)
        return int(np.trace(np.linalg.matrix_power(m, p)))


def _primitivity_exponent(k: int, A: Sequence[Sequence[int]]) -> int:
    bound = (k - 1) ** 2 + 1
    mat = np.array(A, dtype=bool)
    power = mat.copy()
    for n in range(1, bound + 1):
        if power.all():
            return n
        power = power @ mat
    raise NotPrimitive(
        f"no power up to {(k - 1) ** 2 + 1} of the transition matrix is positive"
    )


def _validate_layout(sys: SftSystem, layout: GapLayout) -> None:
    keys = set(layout.entries.keys())
    expected = {None} | set(range(sys.k))
    if keys != expected:
        raise ValueError(
            f"{layout.side}-layout keys {sorted(map(str, keys))} do not cover "
            f"root plus every symbol"
        )
    for key, entries in layout.entries.items():
        if not entries:
            raise ValueError(f"{layout.side}-layout entry list for {key} is empty")
        if entries[0][0] != CYL_ENTRY or entries[-1][0] != CYL_ENTRY:
            raise ValueError(
                f"{layout.side}-layout for {key} must start and end with cylinders"
            )
        symbols = [e[1] for e in entries if e[0] == CYL_ENTRY]
        if key is None:
            wanted = list(range(sys.k))
        elif layout.side == U_SIDE:
            wanted = list(sys.successors(key))
        else:
            wanted = list(sys.predecessors(key))
        if sorted(symbols) != sorted(wanted):
            raise ValueError(
                f"{layout.side}-layout for {key}: cylinders {symbols} do not "
                f"enumerate the admissible extensions {wanted}"
            )


def _validate_boundary(sys: SftSystem, data: BoundaryData) -> None:
    for w in data.all_words():
        if not sys.is_admissible(w):
            raise InadmissibleBoundaryWord(f"boundary data references {w}")
    for inst in data.matching_instances:
        if not inst.chain:
            raise MalformedInstance(f"{inst.ident}: empty chain")
        if not 1 <= inst.split <= len(inst.chain) - 1:
            raise MalformedInstance(f"{inst.ident}: split {inst.split} out of range")
    for inst in data.boundary_instances:
        if not inst.dec_a or not inst.dec_b:
            raise MalformedInstance(f"{inst.ident}: empty decomposition")
    for inst in data.cylindergap_instances:
        if len(inst.segments) < 2:
            raise MalformedInstance(f"{inst.ident}: needs at least two segments")
        if not inst.segments[-1].is_gap or inst.pair_gap.kind != "gap":
            raise MalformedInstance(f"{inst.ident}: final segment must be the gap")
        if inst.pair_cyl.is_gap:
            raise MalformedInstance(f"{inst.ident}: pair cylinder is a gap")
    for inst in data.cylindercylinder_instances:
        if not 2 <= inst.split <= len(inst.ds):
            raise MalformedInstance(f"{inst.ident}: split {inst.split} out of range")


def build_sft(
    k: int,
    matrix: Sequence[Sequence[int]],
    boundary: Optional[BoundaryData] = None,
    layouts: Optional[Mapping[str, GapLayout]] = None,
) -> SftSystem:
    """Validate and assemble a system.

    Raises NotPrimitive when no power of the matrix within the
    (k-1)^2 + 1 bound is entrywise positive, and InadmissibleBoundaryWord
    when boundary data references an inadmissible word.
    """
    if k < 1:
        raise ValueError("alphabet size must be at least 1")
    if len(matrix) != k or any(len(row) != k for row in matrix):
        raise ValueError("transition matrix must be k x k")
    for row in matrix:
        for x in row:
            if int(x) not in (0, 1):
                raise ValueError("transition matrix entries must be 0 or 1")
    exponent = _primitivity_exponent(k, matrix)
    sys = SftSystem(k, matrix, exponent, layouts, boundary)
    for layout in sys.layouts.values():
        _validate_layout(sys, layout)
    if boundary is not None:
        _validate_boundary(sys, boundary)
    return sys


def enumerate_cylinders(sys: SftSystem, n: int, side: str) -> list[Word]:
    """All admissible length-n words on `side`, lexicographic order."""
    if n < 1:
        raise ValueError("cylinder depth must be at least 1")
    words: list[Symbols] = []

    def grow(prefix: Symbols) -> None:
        if len(prefix) == n:
            words.append(prefix)
            return
        last = prefix[-1]
        for b in sys.successors(last):
            grow(prefix + (b,))

    for a in range(sys.k):
        grow((a,))
    words.sort()
    return [Word(w, side) for w in words]


def mother(w: Word, i: int = 1) -> Word:
    """Drop the i deepest symbols (last for "u" words, first for "s")."""
    if i < 0:
        raise ValueError("generation count must be non-negative")
    if i >= len(w.symbols):
        raise TooShallow(f"cannot drop {i} symbols from a length-{len(w)} word")
    if i == 0:
        return w
    if w.side == U_SIDE:
        return Word(w.symbols[:-i], w.side)
    return Word(w.symbols[i:], w.side)


def _least_rotation(w: Symbols) -> Symbols:
    return min(w[i:] + w[:i] for i in range(len(w)))


def _least_period(w: Symbols) -> int:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w == w[:d] * (n // d):
            return d
    return n


def periodic_orbits(sys: SftSystem, p_max: int) -> list[PeriodicOrbit]:
    """One representative per cyclic class of least period <= p_max.

    The representative is the least lexicographic rotation, which makes
    orbit identity deterministic.
    """
    if p_max < 0:
        raise ValueError("period bound must be non-negative")
    seen: set[Symbols] = set()
    out: list[PeriodicOrbit] = []
    for p in range(1, p_max + 1):
        for word in enumerate_cylinders(sys, p, U_SIDE):
            w = word.symbols
            if sys.A[w[-1]][w[0]] != 1:
                continue
            if _least_period(w) != p:
                continue
            canon = _least_rotation(w)
            if canon in seen:
                continue
            seen.add(canon)
            out.append(PeriodicOrbit(canon, p))
    out.sort(key=lambda o: (o.period, o.representative))
    return out


# ----------------------------------------------------------------------
# JSON serialization of systems (bit-exact round trip)

def _seg_to_json(seg: Seg) -> list:
    if seg.is_gap:
        return ["gap", list(seg.word), seg.ordinal]
    return ["cyl", list(seg.word)]


def _seg_from_json(obj: Sequence) -> Seg:
    if obj[0] == "gap":
        return Seg("gap", tuple(obj[1]), int(obj[2]))
    return Seg("cyl", tuple(obj[1]))


def _layout_to_json(layout: GapLayout) -> dict:
    enc: dict[str, list] = {}
    for key, entries in layout.entries.items():
        name = "root" if key is None else str(key)
        enc[name] = [list(e) for e in entries]
    return {"side": layout.side, "entries": enc}


def _layout_from_json(obj: Mapping) -> GapLayout:
    entries: dict[Optional[int], tuple[LayoutEntry, ...]] = {}
    for name, lst in obj["entries"].items():
        key = None if name == "root" else int(name)
        entries[key] = tuple(
            (CYL_ENTRY, int(e[1])) if e[0] == CYL_ENTRY else (GAP_ENTRY,)
            for e in lst
        )
    return GapLayout(obj["side"], entries)


def _boundary_to_json(data: BoundaryData) -> dict:
    return {
        "matching": [
            {
                "id": i.ident,
                "side": i.side,
                "left": _seg_to_json(i.left),
                "right": _seg_to_json(i.right),
                "chain": [_seg_to_json(s) for s in i.chain],
                "split": i.split,
            }
            for i in data.matching_instances
        ],
        "boundary": [
            {
                "id": i.ident,
                "side": i.side,
                "base": _seg_to_json(i.base),
                "dec_a": [_seg_to_json(s) for s in i.dec_a],
                "dec_b": [_seg_to_json(s) for s in i.dec_b],
            }
            for i in data.boundary_instances
        ],
        "cylindergap": [
            {
                "id": i.ident,
                "side": i.side,
                "cyl": _seg_to_json(i.pair_cyl),
                "gap": _seg_to_json(i.pair_gap),
                "segments": [_seg_to_json(s) for s in i.segments],
            }
            for i in data.cylindergap_instances
        ],
        "cylindercylinder": [
            {
                "id": i.ident,
                "side": i.side,
                "xi": list(i.xi),
                "c1": list(i.c1),
                "c2": list(i.c2),
                "eta": list(i.eta),
                "ds": [list(d) for d in i.ds],
                "split": i.split,
            }
            for i in data.cylindercylinder_instances
        ],
        "cocyclegap": [
            {
                "id": i.ident,
                "side": i.side,
                "orbit": list(i.orbit),
                "m1_pivot": i.m1_pivot,
                "m2_pivot": i.m2_pivot,
            }
            for i in data.cocyclegap_orbits
        ],
    }


def _boundary_from_json(obj: Mapping) -> BoundaryData:
    return BoundaryData(
        matching_instances=tuple(
            MatchingInstance(
                d["id"],
                d["side"],
                _seg_from_json(d["left"]),
                _seg_from_json(d["right"]),
                tuple(_seg_from_json(s) for s in d["chain"]),
                int(d["split"]),
            )
            for d in obj.get("matching", [])
        ),
        boundary_instances=tuple(
            BoundaryInstance(
                d["id"],
                d["side"],
                _seg_from_json(d["base"]),
                tuple(_seg_from_json(s) for s in d["dec_a"]),
                tuple(_seg_from_json(s) for s in d["dec_b"]),
            )
            for d in obj.get("boundary", [])
        ),
        cylindergap_instances=tuple(
            CylinderGapInstance(
                d["id"],
                d["side"],
                _seg_from_json(d["cyl"]),
                _seg_from_json(d["gap"]),
                tuple(_seg_from_json(s) for s in d["segments"]),
            )
            for d in obj.get("cylindergap", [])
        ),
        cylindercylinder_instances=tuple(
            CylinderCylinderInstance(
                d["id"],
                d["side"],
                tuple(d["xi"]),
                tuple(d["c1"]),
                tuple(d["c2"]),
                tuple(d["eta"]),
                tuple(tuple(x) for x in d["ds"]),
                int(d["split"]),
            )
            for d in obj.get("cylindercylinder", [])
        ),
        cocyclegap_orbits=tuple(
            CocycleGapOrbit(
                d["id"],
                d["side"],
                tuple(d["orbit"]),
                int(d["m1_pivot"]),
                int(d["m2_pivot"]),
            )
            for d in obj.get("cocyclegap", [])
        ),
    )


def system_to_json(sys: SftSystem) -> str:
    obj: dict = {
        "alphabet": sys.k,
        "matrix": [list(row) for row in sys.A],
    }
    if sys.layouts:
        obj["layouts"] = {
            side: _layout_to_json(layout) for side, layout in sorted(sys.layouts.items())
        }
    if sys.boundary_data is not None:
        obj["boundary"] = _boundary_to_json(sys.boundary_data)
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def system_from_json(text: str) -> SftSystem:
    obj = json.loads(text)
    layouts = None
    if "layouts" in obj:
        layouts = {
            side: _layout_from_json(spec) for side, spec in obj["layouts"].items()
        }
    boundary = _boundary_from_json(obj["boundary"]) if "boundary" in obj else None
    return build_sft(int(obj["alphabet"]), obj["matrix"], boundary, layouts)


def save_system(sys: SftSystem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(system_to_json(sys))


def load_system(path: str) -> SftSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return system_from_json(fh.read())
