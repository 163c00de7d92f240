"""Type inference rules and the recovery pipeline.

Coarse inference finds each parameter's structure (word, static or dynamic
array, nested array, struct, bytes/string) from calldata reads and copies.
Counting and ordering turn the structures into a parameter list. Fine
inference then narrows each word or array item from its masks and uses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from . import symbolic as S
from .abi import (
    AbiType,
    Address,
    Bool,
    Bytes,
    BytesN,
    Decimal,
    FunctionSignature,
    Int,
    String,
    Tuple,
    UInt,
    VyperBytes,
    VyperString,
    array_of,
)
from .dispatcher import SOLIDITY, VYPER, FunctionEntry, FunctionList, detect_dialect, extract_functions
from .evm import decode, partition_blocks
from .symbolic import CalldataWord, Const, Expr
from .tase import (
    DEFAULT_PATH_BUDGET,
    BlockMap,
    CopyFact,
    Fact,
    GuardFact,
    LoadFact,
    MaskFact,
    MemLoadFact,
    TraceFacts,
    UseFact,
    execute_function,
    mark_argument_symbols,
    trail_iter,
    value_root,
)

COUNTED_RULES = ("R1", "R3", "R4", "R6", "R9", "R21", "R22", "R23", "R24", "R25")

WORD = "word"
DYN_ARRAY = "dynamic-array"
STATIC_ARRAY = "static-array"
NESTED_ARRAY = "nested-array"
STRUCT = "struct"
BYTES_OR_STRING = "bytes-or-string"
VYPER_WORD = "vyper-word"
VYPER_LIST = "vyper-list"
VYPER_BYTES = "vyper-bytes-or-string"

DYNAMIC_KINDS = frozenset({DYN_ARRAY, NESTED_ARRAY, STRUCT, BYTES_OR_STRING, VYPER_BYTES})

INT128_BOUNDS = {2**127 - 1, S.to_word(-(2**127))}
DECIMAL_BOUNDS = {(2**127 - 1) * 10**10, S.to_word(-(2**127) * 10**10)}


class OverlapError(Exception):
    """Two parameter sketches claim overlapping head slots."""


@dataclass
class RuleMatch:
    rule_id: str
    evidence: list[Fact] = field(default_factory=list)


@dataclass
class ParamSketch:
    """Structure of one parameter before its item or word type is known.

    ``location`` is the head slot; ``size`` the number of head bytes the
    parameter occupies. For dynamic kinds ``head_value`` is the offset
    field's symbolic value. ``dims`` lists array sizes outermost first,
    None marking a dynamic dimension.
    """

    kind: str
    location: Expr
    mode: str = "external"
    dims: list[int | None] = field(default_factory=list)
    size: int = 32
    matches: list[RuleMatch] = field(default_factory=list)
    head_value: Expr | None = None
    base: Expr = field(default_factory=lambda: Const(4))
    members: list["ParamSketch"] = field(default_factory=list)
    max_len: int | None = None

    @property
    def rules(self) -> list[str]:
        return [m.rule_id for m in self.matches]

    @property
    def counted_rule(self) -> str | None:
        hits = [r for r in self.rules if r in COUNTED_RULES]
        return hits[0] if hits else None

    @property
    def start(self) -> int | None:
        return self.location.value if isinstance(self.location, Const) else None

    @property
    def num_loc(self) -> Expr | None:
        return None if self.head_value is None else S.add(self.base, self.head_value)

    def owns(self, word: CalldataWord) -> bool:
        loc = word.loc
        if self.kind in DYNAMIC_KINDS:
            return loc == self.location or S.contains(loc, self.head_value)  # type: ignore[arg-type]
        if loc == self.location:
            return True
        if isinstance(loc, Const) and self.start is not None:
            return self.start <= loc.value < self.start + self.size
        return False


# helpers ------------------------------------------------------------------


def relevant_guards(fact: Fact) -> list[GuardFact]:
    """Guards connected to a read or copy, outermost first.

    Walks the path backwards from ``fact``. Guards are collected and their
    operands join the relevant set; a calldata read or copy whose value is
    relevant extends the set with its location; anything else ends the walk.
    """
    rel: set[Expr] = set()
    if isinstance(fact, (LoadFact, MemLoadFact)):
        rel.update(S.subterms(fact.loc))
    elif isinstance(fact, CopyFact):
        rel.update(S.subterms(fact.cd_offset))
        rel.update(S.subterms(fact.length))
    out: list[GuardFact] = []
    for ev in trail_iter(getattr(fact, "trail", None)):
        if isinstance(ev, GuardFact):
            out.append(ev)
            rel.update(S.subterms(ev.bound))
            rel.update(S.subterms(ev.index))
        elif isinstance(ev, (LoadFact, MemLoadFact)):
            if ev.value not in rel:
                break
            rel.update(S.subterms(ev.loc))
        elif isinstance(ev, CopyFact):
            if not any(w in rel for w in S.calldata_words(ev.cd_offset)):
                break
    out.reverse()
    return out


def chain_depth(word: CalldataWord, memo: dict[Any, int] | None = None, root: Expr | None = None) -> int:
    """Length of the longest chain of calldata reads feeding ``word``'s location.

    With ``root`` only reads that depend on ``root`` count, so depth is
    measured from that word (which has depth 1).
    """
    memo = {} if memo is None else memo
    key = (word, root)
    if key in memo:
        return memo[key]
    if word == root:
        return 1
    inner = [w for w in S.calldata_words(word.loc) if w != word and (root is None or S.contains(w, root))]
    d = 1 + max((chain_depth(w, memo, root) for w in inner), default=0)
    memo[key] = d
    return d


def _multiple_of_32(e: Expr) -> bool:
    c, terms = S.linear_parts(e)
    return c % 32 == 0 and all(k % 32 == 0 for k in terms.values())


def _bounds_to_dims(guards: Sequence[GuardFact]) -> list[int | None]:
    return [g.bound.value if isinstance(g.bound, Const) else None for g in guards]


def _const_bounds(guards: Sequence[GuardFact]) -> bool:
    return bool(guards) and all(isinstance(g.bound, Const) and g.bound.value > 0 for g in guards)


class _Facts:
    """Indexes over a TraceFacts for rule evaluation."""

    def __init__(self, facts: TraceFacts) -> None:
        self.facts = facts
        self.loads: list[LoadFact] = facts.loads
        self.copies: list[CopyFact] = facts.copies
        self.load_locs: set[Expr] = {f.loc for f in self.loads}
        self.by_loc: dict[Expr, LoadFact] = {}
        for f in self.loads:
            self.by_loc.setdefault(f.loc, f)
        self.pointers: set[Expr] = set()
        for f in self.loads:
            self.pointers.update(w for w in S.calldata_words(f.loc))
        for c in self.copies:
            self.pointers.update(S.calldata_words(c.cd_offset))
        self.guard_bounds: set[Expr] = {g.bound for g in facts.guards}
        self.depth_memo: dict[Any, int] = {}

    def depth(self, w: CalldataWord, root: Expr | None = None) -> int:
        return chain_depth(w, self.depth_memo, root)


# coarse inference ----------------------------------------------------------------


def _dynamic_sketch(fx: _Facts, loc: Expr, value: Expr, base: Expr, top: bool, dialect: str) -> ParamSketch | None:
    """Classify a head slot whose value is used as an offset."""
    head_load = fx.by_loc.get(loc)
    evidence: list[Fact] = [head_load] if head_load else []
    num_loc = S.add(base, value)

    if dialect == VYPER:
        for c in fx.copies:
            if c.cd_offset == num_loc and isinstance(c.length, Const) and c.length.value >= 32:
                return ParamSketch(VYPER_BYTES, loc, head_value=value, base=base,
                                   max_len=c.length.value - 32, matches=[RuleMatch("R23", evidence + [c])])
        return None

    num_load = fx.by_loc.get(num_loc)
    if num_load is None:
        return None
    r1 = RuleMatch("R1", evidence + [num_load])
    related = [f for f in fx.loads if f.loc != loc and S.contains(f.loc, value)]
    depth = max((fx.depth(f.value, value) for f in related), default=1)
    sketch = ParamSketch(DYN_ARRAY, loc, head_value=value, base=base)

    if depth >= 3:
        deepest = [f for f in related if fx.depth(f.value, value) == depth]
        r19 = RuleMatch("R19", deepest)
        for f in deepest:
            gs = relevant_guards(f)
            if len(gs) >= 2 and any(isinstance(g.bound, CalldataWord) for g in gs):
                sketch.kind = NESTED_ARRAY
                sketch.dims = _bounds_to_dims(gs)
                sketch.matches = [r19, RuleMatch("R22", [f, *gs])]
                return sketch
        sketch.kind = STRUCT
        sketch.matches = [r19, RuleMatch("R21", deepest)]
        sketch.members = _infer_frame(fx, S.add(base, value), top=False, dialect=dialect)
        return sketch

    y = num_load.value
    public = [c for c in fx.copies if S.contains(c.cd_offset, value)] if top else []
    if public:
        cp = public[0]
        sketch.mode = "public"
        gs = relevant_guards(cp)
        if not gs:
            r5 = RuleMatch("R5", [cp])
            if S.equivalent(cp.length, S.scale(y, 32)):
                sketch.dims = [None]
                sketch.matches = [r1, r5, RuleMatch("R7", [cp])]
                return sketch
            ceil32 = S.scale(S.apply("SHR", Const(5), S.add(y, Const(31))), 32)
            sketch.kind = BYTES_OR_STRING
            rules = [r1, r5]
            if S.equivalent(cp.length, ceil32):
                rules.append(RuleMatch("R8", [cp]))
            sketch.matches = rules
            return sketch
        if gs[0].bound == y and all(isinstance(g.bound, Const) for g in gs[1:]):
            inner = [cp.length.value // 32] if isinstance(cp.length, Const) and cp.length.value >= 32 else []
            sketch.dims = [None] + _bounds_to_dims(gs[1:]) + inner
            sketch.matches = [r1, RuleMatch("R10", [cp, *gs])]
            return sketch
        sketch.kind = BYTES_OR_STRING
        sketch.matches = [r1]
        return sketch

    item_base = S.add(num_loc, Const(32))
    items = [f for f in related if f.loc != num_loc and f.value not in fx.pointers]
    for f in items:
        offset = S.sub(f.loc, item_base)
        if not _multiple_of_32(offset):
            sketch.kind = BYTES_OR_STRING
            sketch.matches = [r1]
            return sketch
    if not items:
        sketch.kind = BYTES_OR_STRING
        sketch.matches = [r1]
        return sketch
    f = items[0]
    gs = relevant_guards(f)
    if gs and gs[0].bound == y and all(isinstance(g.bound, Const) for g in gs[1:]):
        sketch.dims = [None] + _bounds_to_dims(gs[1:])
        sketch.matches = [r1, RuleMatch("R2", [f, *gs])]
    else:
        sketch.dims = [None]
        sketch.matches = [r1]
    return sketch


def _static_array_groups(fx: _Facts, dialect: str) -> list[tuple[int, list[int | None], list[Fact], str]]:
    """Const-location reads under constant bounds (R3/R24) and constant copies (R6/R9).

    Returns (anchor location, dims, evidence, rule) tuples. The anchor of a
    guarded read is only an upper bound on the array start; copies give the
    start exactly.
    """
    out = []
    for f in fx.loads:
        if not isinstance(f.loc, Const) or f.loc.value < 4:
            continue
        gs = relevant_guards(f)
        if _const_bounds(gs):
            out.append((f.loc.value, _bounds_to_dims(gs), [f, *gs], "R24" if dialect == VYPER else "R3"))
    if dialect == SOLIDITY:
        for c in fx.copies:
            if not (isinstance(c.cd_offset, Const) and isinstance(c.length, Const)):
                continue
            if c.length.value < 32 or c.length.value % 32:
                continue
            gs = relevant_guards(c)
            if gs and not _const_bounds(gs):
                continue
            dims = _bounds_to_dims(gs) + [c.length.value // 32]
            out.append((c.cd_offset.value, dims, [c, *gs], "R9" if gs else "R6"))
    return out


def _read_in_groups(f: LoadFact, fx: _Facts, dialect: str) -> bool:
    """True when a const-location read is itself a guarded static-array item."""
    return _const_bounds(relevant_guards(f))


def _extent(dims: Sequence[int | None]) -> int:
    n = 32
    for d in dims:
        n *= d or 1
    return n


def _infer_frame(fx: _Facts, base: Expr, top: bool, dialect: str) -> list[ParamSketch]:
    """Sketch every parameter whose head lives at ``base + constant``."""
    slots: dict[int, LoadFact] = {}
    for f in fx.loads:
        d = S.sub(f.loc, base)
        if isinstance(d, Const) and d.value < 1 << 32 and d.value % 32 == 0:
            slots.setdefault(d.value, f)

    sketches: list[ParamSketch] = []
    dynamic_offsets: set[int] = set()
    for rel in sorted(slots):
        f = slots[rel]
        sk = _dynamic_sketch(fx, f.loc, f.value, base, top, dialect)
        if sk is not None:
            sketches.append(sk)
            dynamic_offsets.add(rel)

    if top:
        placed: list[ParamSketch] = []
        for anchor, dims, ev, rule in sorted(_static_array_groups(fx, dialect), key=lambda g: (g[0], g[3])):
            same = [p for p in placed if p.start is not None and p.start <= anchor < p.start + p.size and p.dims == dims]
            if same:
                same[0].matches[0].evidence.extend(ev)
                continue
            if rule in ("R6", "R9"):
                start = anchor
            else:
                # placed right after the closest parameter that starts below the read
                ends = [s.start + s.size for s in sketches + placed if s.start is not None and s.start < anchor]
                ends += [4 + r + 32 for r in slots if 4 + r < anchor and not _read_in_groups(slots[r], fx, dialect)]
                start = min(max(ends + [4]), anchor)
            kind = VYPER_LIST if dialect == VYPER else STATIC_ARRAY
            mode = "public" if rule in ("R6", "R9") else "external"
            placed.append(ParamSketch(kind, Const(start), mode=mode, dims=list(dims), size=_extent(dims),
                                      matches=[RuleMatch(rule, ev)]))
        sketches += placed

    for rel in sorted(slots):
        if rel in dynamic_offsets:
            continue
        f = slots[rel]
        if any(s.kind not in DYNAMIC_KINDS and s.owns(f.value) for s in sketches):
            continue
        if top and f.loc.value < 4:  # type: ignore[attr-defined]
            continue
        rule = "R25" if dialect == VYPER else "R4"
        sketches.append(ParamSketch(VYPER_WORD if dialect == VYPER else WORD, f.loc, matches=[RuleMatch(rule, [f])]))
    return sketches


def coarse_infer(facts: TraceFacts, dialect: str = SOLIDITY) -> list[ParamSketch]:
    """Structural sketches for every parameter visible in ``facts``."""
    if not facts.facts:
        return []
    return _infer_frame(_Facts(facts), Const(4), top=True, dialect=dialect)


def count_and_order(sketches: Iterable[ParamSketch]) -> list[ParamSketch]:
    """Order sketches by head location and reject overlapping claims."""
    ordered = sorted(sketches, key=lambda s: (s.start if s.start is not None else 1 << 64, s.location.key()))
    for a, b in zip(ordered, ordered[1:]):
        if a.start is not None and b.start is not None and a.start + a.size > b.start:
            raise OverlapError(f"parameters at {a.start:#x} and {b.start:#x} overlap")
    return ordered


def applied_rule_tally(sketches: Iterable[ParamSketch]) -> int:
    """How many counted rules (R1, R3, R4, R6, R9, R21-R25) the sketches applied."""
    return sum(1 for s in sketches for r in s.rules if r in COUNTED_RULES)


# fine inference -----------------------------------------------------------------


def _low_mask_bits(c: int) -> int | None:
    if c and (c + 1) & c == 0:
        bits = c.bit_length()
        if bits % 8 == 0 and 8 <= bits < 256:
            return bits
    return None


def _high_mask_bytes(c: int) -> int | None:
    for n in range(1, 32):
        if c == ((1 << (8 * n)) - 1) << (256 - 8 * n):
            return n
    return None


@dataclass
class _Refined:
    type: AbiType
    rules: list[str] = field(default_factory=list)
    notes: list[dict[str, Any]] = field(default_factory=list)


def _is_math(f: Fact) -> bool:
    return isinstance(f, UseFact) and (f.kind == "MATH" or f.kind in ("SDIV", "SMOD"))


def refine_word(facts: Sequence[Fact], dialect: str) -> _Refined:
    """Narrow a 32-byte value from the facts that concern it."""
    facts = sorted(facts, key=lambda f: f.seq)
    if dialect == VYPER:
        cands: list[tuple[str, AbiType]] = []
        for f in facts:
            if not isinstance(f, UseFact):
                continue
            other = f.other.value if isinstance(f.other, Const) else None
            if f.kind in ("LT", "GT") and other == 1 << 160:
                cands.append(("R27", Address()))
            elif f.kind in ("SLT", "SGT") and other in INT128_BOUNDS:
                cands.append(("R28", Int(128)))
            elif f.kind in ("SLT", "SGT") and other in DECIMAL_BOUNDS:
                cands.append(("R29", Decimal()))
            elif f.kind in ("LT", "GT") and other == 2:
                cands.append(("R30", Bool()))
            elif f.kind == "BYTE":
                cands.append(("R31", BytesN(32)))
        return _pick(cands)

    masks: list[tuple[str, AbiType]] = []
    for f in facts:
        if isinstance(f, MaskFact) and f.kind == "AND":
            bits = _low_mask_bits(f.constant)
            if bits is not None:
                masks.append(("R11", UInt(bits)))
                continue
            n = _high_mask_bytes(f.constant)
            if n is not None:
                masks.append(("R12", BytesN(n)))
        elif isinstance(f, MaskFact) and f.kind == "SIGNEXTEND" and f.constant < 31:
            masks.append(("R13", Int(8 * (f.constant + 1))))
        elif isinstance(f, UseFact) and f.kind == "ISZERO2" and value_root(f.operand) == f.operand:
            masks.append(("R14", Bool()))
    if masks:
        out = _pick(masks)
        if out.type == UInt(160) and not any(_is_math(f) for f in facts):
            out.type = Address()
            out.rules.append("R16")
        return out
    late: list[tuple[str, AbiType]] = []
    for f in facts:
        if isinstance(f, UseFact) and f.kind in ("SDIV", "SMOD", "SLT", "SGT"):
            late.append(("R15", Int(256)))
        elif isinstance(f, UseFact) and f.kind == "BYTE":
            late.append(("R18", BytesN(32)))
    return _pick(late)


def _pick(cands: list[tuple[str, AbiType]]) -> _Refined:
    if not cands:
        return _Refined(UInt(256))
    rule, t = cands[-1]
    out = _Refined(t, [rule])
    others = sorted({str(c[1]) for c in cands if c[1] != t})
    if others:
        out.notes.append({"kind": "conflicting-evidence", "alternatives": others})
    return out


def _role(sk: ParamSketch, word: CalldataWord, fx: _Facts) -> str:
    if sk.kind not in DYNAMIC_KINDS:
        return "item" if sk.kind != WORD and sk.kind != VYPER_WORD else "value"
    if word.loc == sk.location:
        return "head"
    if word.loc == sk.num_loc or word in fx.guard_bounds:
        return "num"
    if word in fx.pointers:
        return "pointer"
    return "item"


def _facts_for(sk: ParamSketch, facts: Sequence[Fact], fx: _Facts, role: str) -> list[Fact]:
    out = []
    for f in facts:
        operand = getattr(f, "operand", None)
        if operand is None:
            continue
        root = value_root(operand)
        if isinstance(root, CalldataWord) and sk.owns(root) and _role(sk, root, fx) == role:
            out.append(f)
    return out


def _byte_access(facts: Sequence[Fact]) -> bool:
    return any(isinstance(f, UseFact) and f.kind in ("BYTE", "MSTORE8") for f in facts)


def _fine_one(sk: ParamSketch, facts: Sequence[Fact], fx: _Facts, dialect: str) -> _Refined:
    if sk.kind in (WORD, VYPER_WORD):
        return refine_word(_facts_for(sk, facts, fx, "value"), dialect)
    if sk.kind in (STATIC_ARRAY, VYPER_LIST, DYN_ARRAY, NESTED_ARRAY):
        item = refine_word(_facts_for(sk, facts, fx, "item"), dialect)
        return _Refined(array_of(item.type, sk.dims), item.rules, item.notes)
    if sk.kind == BYTES_OR_STRING:
        if _byte_access(_facts_for(sk, facts, fx, "item")):
            return _Refined(Bytes(), ["R17"])
        return _Refined(String(), [], [{"kind": "bytes-or-string", "alternatives": ["bytes"]}])
    if sk.kind == VYPER_BYTES:
        n = sk.max_len or 0
        if _byte_access(_facts_for(sk, facts, fx, "item")):
            return _Refined(VyperBytes(n), ["R26"])
        return _Refined(VyperString(n), [], [{"kind": "bytes-or-string", "alternatives": [f"Bytes[{n}]"]}])
    if sk.kind == STRUCT:
        members = [_fine_one(m, facts, fx, dialect) for m in sk.members]
        notes = [dict(n, member=i) for i, m in enumerate(members) for n in m.notes]
        rules = sorted({r for sm, m in zip(sk.members, members) for r in sm.rules + m.rules}, key=lambda r: int(r[1:]))
        return _Refined(Tuple(tuple(m.type for m in members)), rules, notes)
    raise ValueError(f"unknown sketch kind {sk.kind}")


def fine_infer(
    facts: TraceFacts, sketches: Sequence[ParamSketch], dialect: str = SOLIDITY
) -> tuple[list[AbiType], list[dict[str, Any]], list[list[str]]]:
    """Refine ordered sketches into ABI types.

    Returns (types, notes, per-parameter applied rules). Notes carry a
    ``param`` index and a list of ``alternatives``.
    """
    fx = _Facts(facts)
    types: list[AbiType] = []
    notes: list[dict[str, Any]] = []
    rules: list[list[str]] = []
    for i, sk in enumerate(sketches):
        own = [f for f in facts.facts if f.arg == i] if any(f.arg is not None for f in facts.facts) else facts.facts
        r = _fine_one(sk, own, fx, dialect)
        types.append(r.type)
        notes += [dict(n, param=i) for n in r.notes]
        rules.append(sk.rules + r.rules + (["R20"] if dialect == VYPER else []))
    notes += _flattened_struct_notes(types)
    return types, notes, rules


def _flattened_struct_notes(types: Sequence[AbiType]) -> list[dict[str, Any]]:
    """Runs of two or more static parameters may also be one static struct."""
    out = []
    run: list[int] = []
    for i, t in enumerate(list(types) + [None]):  # type: ignore[list-item]
        if t is not None and not t.is_dynamic:
            run.append(i)
            continue
        if len(run) >= 2:
            members = ",".join(str(types[j]) for j in run)
            out.append({"kind": "flattened-struct", "params": run, "alternatives": [f"({members})"]})
        run = []
    return out


# pipeline -----------------------------------------------------------------------


def recover_function(
    bmap: BlockMap, entry: FunctionEntry, path_budget: int = DEFAULT_PATH_BUDGET
) -> FunctionSignature:
    """Run the four inference steps for one dispatcher entry."""
    facts = execute_function(bmap, entry, path_budget=path_budget)
    sig = FunctionSignature(entry.selector, None, entry.dialect)
    try:
        sketches = count_and_order(coarse_infer(facts, entry.dialect))
    except OverlapError as exc:
        sig.notes.append({"kind": "error", "error": "OverlapError", "detail": str(exc)})
        return sig
    marked = mark_argument_symbols(facts, sketches)
    types, notes, rules = fine_infer(marked, sketches, entry.dialect)
    sig.params, sig.notes, sig.rules = types, notes, rules
    if facts.budget_exceeded:
        sig.notes.append({"kind": "partial", "error": "PathBudgetExceeded"})
    return sig


def recover_timed(bytecode: bytes, path_budget: int = DEFAULT_PATH_BUDGET) -> FunctionList:
    """Like recover, but each item is a (signature, wall seconds) pair."""
    blocks = partition_blocks(decode(bytecode))
    if not blocks:
        return FunctionList([], ["EmptyCode"])
    bmap = BlockMap(blocks)
    dialect = detect_dialect(bmap)
    entries = extract_functions(bmap, dialect)
    out = FunctionList([], entries.notes)
    for entry in entries:
        t0 = time.perf_counter()
        try:
            sig = recover_function(bmap, entry, path_budget)
        except Exception as exc:  # one bad function must not sink the batch
            sig = FunctionSignature(entry.selector, None, dialect,
                                    [{"kind": "error", "error": type(exc).__name__, "detail": str(exc)}])
        out.append((sig, time.perf_counter() - t0))
    return out


def recover(bytecode: bytes, path_budget: int = DEFAULT_PATH_BUDGET) -> FunctionList:
    """Recover one signature per dispatcher entry of runtime ``bytecode``.

    The returned list carries contract-level notes (``DispatchNotFound``,
    ``EmptyCode``) in its ``notes`` attribute.
    """
    timed = recover_timed(bytecode, path_budget)
    return FunctionList([sig for sig, _ in timed], timed.notes)
