"""Type-aware symbolic execution of a single function.

The executor walks a function depth-first from its entry block, treats
calldata and everything read from the environment as free symbols, queues
both successors of every JUMPI without checking feasibility and runs each
block at most once. Along the way it logs the events the inference rules
need: calldata reads and copies, masks, signed and byte operations,
comparisons and loop/bound guards.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Sequence

from . import symbolic as S
from .evm import BasicBlock, Instruction
from .symbolic import CalldataWord, Const, Env, Expr

MAX_STACK = 1024
DEFAULT_PATH_BUDGET = 4096

MATH_OPS = frozenset({"ADD", "SUB", "MUL", "DIV", "SDIV", "MOD", "SMOD", "ADDMOD", "MULMOD", "EXP"})
SIGNED_OPS = frozenset({"SDIV", "SMOD", "SLT", "SGT"})
GUARD_OPS = frozenset({"LT", "GT", "SLT", "SGT"})
HALTS = frozenset({"STOP", "RETURN", "REVERT", "INVALID", "SELFDESTRUCT"})

ENV_OPS = {
    "ADDRESS": 0, "ORIGIN": 0, "CALLER": 0, "CALLVALUE": 0, "GASPRICE": 0,
    "COINBASE": 0, "TIMESTAMP": 0, "NUMBER": 0, "PREVRANDAO": 0, "GASLIMIT": 0,
    "CHAINID": 0, "SELFBALANCE": 0, "BASEFEE": 0, "BLOBBASEFEE": 0, "GAS": 0,
    "MSIZE": 0, "RETURNDATASIZE": 0, "CODESIZE": 0, "CALLDATASIZE": 0,
    "BALANCE": 1, "EXTCODESIZE": 1, "EXTCODEHASH": 1, "BLOCKHASH": 1,
    "BLOBHASH": 1, "SLOAD": 1, "TLOAD": 1,
    "CREATE": 3, "CREATE2": 4, "CALL": 7, "CALLCODE": 7, "DELEGATECALL": 6,
    "STATICCALL": 6,
}


class StackUnderflow(Exception):
    pass


class StackOverflow(Exception):
    pass


class PathBudgetExceeded(Exception):
    """Raised in strict mode when more paths are queued than the budget allows."""


# facts -----------------------------------------------------------------------


@dataclass(frozen=True)
class Fact:
    seq: int
    pc: int
    guards: tuple["GuardFact", ...] = field(default=(), repr=False, compare=False)
    arg: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class GuardFact(Fact):
    kind: str = "LT"
    index: Expr = S.ZERO
    bound: Expr = S.ZERO
    comparison: Expr = S.ZERO


@dataclass(frozen=True)
class LoadFact(Fact):
    """A CALLDATALOAD."""

    loc: Expr = S.ZERO
    trail: Any = field(default=None, repr=False, compare=False)

    @property
    def value(self) -> CalldataWord:
        return CalldataWord(self.loc)


@dataclass(frozen=True)
class MemLoadFact(Fact):
    """An MLOAD whose result was traced back to a calldata copy."""

    loc: Expr = S.ZERO
    address: Expr = S.ZERO
    trail: Any = field(default=None, repr=False, compare=False)

    @property
    def value(self) -> CalldataWord:
        return CalldataWord(self.loc)


@dataclass(frozen=True)
class CopyFact(Fact):
    """A CALLDATACOPY(mem_offset, cd_offset, length)."""

    mem_offset: Expr = S.ZERO
    cd_offset: Expr = S.ZERO
    length: Expr = S.ZERO
    trail: Any = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class MaskFact(Fact):
    """AND with a constant, or SIGNEXTEND with a constant byte index."""

    kind: str = "AND"
    operand: Expr = S.ZERO
    constant: int = 0


@dataclass(frozen=True)
class UseFact(Fact):
    """A typed use of a value.

    ``kind`` is an opcode name (``SDIV``, ``SLT``, ``LT``, ``BYTE``,
    ``MSTORE8`` ...), ``ISZERO2`` for a double ISZERO, or ``MATH`` for
    arithmetic. ``side`` is the operand position for comparisons.
    """

    kind: str = "MATH"
    operand: Expr = S.ZERO
    other: Expr | None = None
    side: int = 0
    op: str = ""


Trail = tuple  # (fact, parent) cons cells, None at the root


def trail_iter(trail: Trail | None) -> Iterator[Fact]:
    while trail is not None:
        yield trail[0]
        trail = trail[1]


@dataclass
class TraceFacts:
    facts: list[Fact] = field(default_factory=list)
    blocks_visited: int = 0
    steps: int = 0
    paths: int = 0
    budget_exceeded: bool = False

    def of(self, cls: type) -> list[Any]:
        return [f for f in self.facts if isinstance(f, cls)]

    @property
    def loads(self) -> list[LoadFact]:
        return self.of(LoadFact)

    @property
    def mem_loads(self) -> list[MemLoadFact]:
        return self.of(MemLoadFact)

    @property
    def copies(self) -> list[CopyFact]:
        return self.of(CopyFact)

    @property
    def masks(self) -> list[MaskFact]:
        return self.of(MaskFact)

    @property
    def uses(self) -> list[UseFact]:
        return self.of(UseFact)

    @property
    def guards(self) -> list[GuardFact]:
        return self.of(GuardFact)

    def summary(self) -> list[str]:
        """One line per fact, stable across runs; handy for diffing."""
        out = []
        for f in self.facts:
            body = {k: v for k, v in vars(f).items() if k not in ("guards", "trail", "seq")}
            out.append(f"{type(f).__name__} {body} g={[g.seq for g in f.guards]}")
        return out


# memory ----------------------------------------------------------------------


@dataclass(frozen=True)
class Write:
    kind: str  # word | byte | copy | opaque
    addr: Expr
    value: Expr | None = None
    src: Expr | None = None
    length: Expr | None = None


def _nonneg(d: Expr) -> bool:
    """Heuristic sign test for a symbolic difference of two addresses."""
    c, terms = S.linear_parts(d)
    return c < S.SIGN_BIT and all(k < S.SIGN_BIT for k in terms.values())


def _byte_mask(i0: int, i1: int) -> int:
    return sum(0xFF << (8 * (31 - i)) for i in range(i0, i1))


def _compose(parts: list[Any], fresh) -> Expr:
    """Assemble a word from per-byte sources.

    ``parts[i]`` is None for a zero byte, ``"?"`` for an unknown byte, or
    ``(word, j)`` meaning byte ``j`` of ``word``.
    """
    terms: list[Expr] = []
    i = 0
    unknown = [k for k, p in enumerate(parts) if p == "?"]
    while i < 32:
        p = parts[i]
        if p is None or p == "?":
            i += 1
            continue
        src, j = p
        k = j - i
        i1 = i + 1
        while i1 < 32 and parts[i1] not in (None, "?") and parts[i1][0] == src and parts[i1][1] - i1 == k:
            i1 += 1
        if k > 0:
            shifted = S.apply("SHL", Const(8 * k), src)
        elif k < 0:
            shifted = S.apply("SHR", Const(-8 * k), src)
        else:
            shifted = src
        terms.append(S.apply("AND", Const(_byte_mask(i, i1)), shifted))
        i = i1
    if unknown:
        mask = sum(0xFF << (8 * (31 - k)) for k in unknown)
        terms.append(S.apply("AND", Const(mask), fresh("mem")))
    if not terms:
        return S.ZERO
    out = terms[0]
    for t in terms[1:]:
        out = S.apply("OR", out, t)
    return out


# machine state ---------------------------------------------------------------


@dataclass
class MachineState:
    stack: list[Expr] = field(default_factory=list)
    memory: tuple[Write, ...] = ()
    guards: tuple[GuardFact, ...] = ()
    trail: Trail | None = None
    halted: bool = False
    jump: tuple[str, Expr | None, Expr | None] | None = None

    def copy(self) -> "MachineState":
        return MachineState(list(self.stack), self.memory, self.guards, self.trail)

    def pop(self) -> Expr:
        if not self.stack:
            raise StackUnderflow()
        return self.stack.pop()

    def push(self, e: Expr) -> None:
        if len(self.stack) >= MAX_STACK:
            raise StackOverflow()
        self.stack.append(e)


class FactLog:
    """Shared sink for facts produced while executing one function."""

    def __init__(self) -> None:
        self.facts: list[Fact] = []
        self.seq = 0
        self.fresh_ids = 0
        self.copy_table: list[Write] = []
        self.record = True

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def fresh(self, kind: str) -> Env:
        self.fresh_ids += 1
        return Env(kind, self.fresh_ids)

    def add(self, fact: Fact) -> None:
        if self.record:
            self.facts.append(fact)


def _resolve_copy(addr: Expr, w: Write) -> Expr | None:
    """CalldataWord read at ``addr`` if it lies wholly inside copy ``w``."""
    d = S.sub(addr, w.addr)
    if isinstance(d, Const):
        dv = S.to_signed(d.value)
        if dv < 0:
            return None
        if isinstance(w.length, Const) and dv + 32 > w.length.value:
            return None
        return CalldataWord(S.add(w.src, d))  # type: ignore[arg-type]
    if _nonneg(d):
        return CalldataWord(S.add(w.src, d))  # type: ignore[arg-type]
    return None


def mload(state: MachineState, addr: Expr, log: FactLog) -> tuple[Expr, bool]:
    """Read a word from memory. Returns (value, traced-to-calldata-copy)."""
    need = set(range(32))
    parts: list[Any] = [None] * 32
    for w in reversed(state.memory):
        d = S.sub(addr, w.addr)
        if isinstance(d, Const):
            dv = S.to_signed(d.value)
            if w.kind == "word":
                if dv == 0 and len(need) == 32:
                    return w.value, False  # type: ignore[return-value]
                for i in list(need):
                    if 0 <= dv + i < 32:
                        parts[i] = (w.value, dv + i)
                        need.discard(i)
            elif w.kind == "byte":
                i = -dv
                if i in need:
                    parts[i] = (w.value, 31)
                    need.discard(i)
            else:
                if isinstance(w.length, Const):
                    covered = [i for i in need if 0 <= dv + i < w.length.value]
                else:
                    covered = [i for i in need if dv + i >= 0]
                if w.kind == "copy" and len(covered) == 32:
                    return CalldataWord(S.add(w.src, d)), True  # type: ignore[arg-type]
                word = CalldataWord(S.add(w.src, Const(dv))) if w.kind == "copy" else None  # type: ignore[arg-type]
                for i in covered:
                    parts[i] = (word, i) if word is not None else "?"
                    need.discard(i)
        elif w.kind == "copy" and len(need) == 32:
            hit = _resolve_copy(addr, w)
            if hit is not None:
                return hit, True
        if not need:
            break
    if len(need) == 32:
        for w in reversed(log.copy_table):
            hit = _resolve_copy(addr, w)
            if hit is not None:
                return hit, True
        if not isinstance(addr, Const):
            return log.fresh("mem"), False
        return S.ZERO, False
    if not isinstance(addr, Const):
        for i in need:
            parts[i] = "?"
    return _compose(parts, log.fresh), False


def calldata_source(state: MachineState, addr: Expr, log: FactLog) -> Expr | None:
    """The calldata word whose first byte was copied to memory ``addr``, if any."""
    for w in reversed(state.memory):
        if w.kind != "copy":
            continue
        d = S.sub(addr, w.addr)
        if isinstance(d, Const):
            dv = S.to_signed(d.value)
            if dv >= 0 and (not isinstance(w.length, Const) or dv < w.length.value):
                return CalldataWord(S.add(w.src, d))  # type: ignore[arg-type]
        elif _nonneg(d):
            return CalldataWord(S.add(w.src, d))  # type: ignore[arg-type]
    for w in reversed(log.copy_table):
        hit = _resolve_copy(addr, w)
        if hit is not None:
            return hit
    return None


# stepping ------------------------------------------------------------------------


def _is_env_free(e: Expr) -> bool:
    return not any(isinstance(s, Env) and s.kind == "CALLDATASIZE" for s in S.subterms(e))


def _strip_iszero(cond: Expr) -> tuple[Expr, int]:
    k = 0
    while isinstance(cond, S.Op) and cond.name == "ISZERO":
        cond = cond.args[0]
        k += 1
    return cond, k


def guard_for(cond: Expr) -> tuple[str, Expr, Expr, bool] | None:
    """Classify a JUMPI condition as a bound check.

    Returns (kind, index, bound, holds_on_jump) or None. The bound is the
    larger side of the comparison. Range checks on raw head words and checks
    involving CALLDATASIZE are not loop or index bounds and yield None.
    """
    inner, k = _strip_iszero(cond)
    if not (isinstance(inner, S.Op) and inner.name in GUARD_OPS):
        return None
    a, b = inner.args
    index, bound = (a, b) if inner.name in ("LT", "SLT") else (b, a)
    if S.is_head_word(index) or not (_is_env_free(index) and _is_env_free(bound)):
        return None
    return inner.name, index, bound, k % 2 == 0


def step(state: MachineState, ins: Instruction, log: FactLog | None = None) -> MachineState:
    """Apply one instruction to ``state`` in place and return it.

    Terminators leave their decoded operands in ``state.jump`` or set
    ``state.halted``; following edges is the caller's business.
    """
    log = log if log is not None else FactLog()
    name = ins.name
    pc = ins.offset

    def fact(cls, **kw) -> Fact:
        f = cls(seq=log.next_seq(), pc=pc, guards=state.guards, **kw)
        log.add(f)
        return f

    def traced(cls, **kw) -> Fact:
        f = cls(seq=log.next_seq(), pc=pc, guards=state.guards, trail=state.trail, **kw)
        log.add(f)
        state.trail = (f, state.trail)
        return f

    if ins.is_push:
        state.push(Const(ins.value or 0))
    elif name.startswith("DUP"):
        n = ins.opcode - 0x7F
        if len(state.stack) < n:
            raise StackUnderflow()
        state.push(state.stack[-n])
    elif name.startswith("SWAP"):
        n = ins.opcode - 0x8F
        if len(state.stack) < n + 1:
            raise StackUnderflow()
        state.stack[-1], state.stack[-1 - n] = state.stack[-1 - n], state.stack[-1]
    elif name == "POP":
        state.pop()
    elif name == "JUMPDEST":
        pass
    elif name in S.SEMANTICS and name != "SHA3":
        arity = ins.pops
        args = [state.pop() for _ in range(arity)]
        _record_op(name, args, fact)
        state.push(S.apply(name, *args))
    elif name == "CALLDATALOAD":
        loc = state.pop()
        traced(LoadFact, loc=loc)
        state.push(CalldataWord(loc))
    elif name == "CALLDATACOPY":
        m, c, n = state.pop(), state.pop(), state.pop()
        traced(CopyFact, mem_offset=m, cd_offset=c, length=n)
        w = Write("copy", m, src=c, length=n)
        state.memory = state.memory + (w,)
        if w not in log.copy_table:
            log.copy_table.append(w)
    elif name == "MLOAD":
        addr = state.pop()
        value, from_copy = mload(state, addr, log)
        if from_copy:
            traced(MemLoadFact, loc=value.loc, address=addr)  # type: ignore[attr-defined]
        state.push(value)
    elif name == "MSTORE":
        addr, v = state.pop(), state.pop()
        state.memory = state.memory + (Write("word", addr, value=v),)
    elif name == "MSTORE8":
        addr, v = state.pop(), state.pop()
        src = calldata_source(state, addr, log)
        if src is not None:
            fact(UseFact, kind="MSTORE8", operand=src, op="MSTORE8")
        state.memory = state.memory + (Write("byte", addr, value=v),)
    elif name == "SHA3":
        addr, n = state.pop(), state.pop()
        if isinstance(n, Const) and n.value % 32 == 0 and 0 < n.value <= 128:
            words = [mload(state, S.add(addr, Const(32 * i)), log)[0] for i in range(n.value // 32)]
            state.push(S.Op("SHA3", tuple(words)))
        else:
            state.push(log.fresh("SHA3"))
    elif name in ("CODECOPY", "RETURNDATACOPY", "MCOPY", "EXTCODECOPY"):
        if name == "EXTCODECOPY":
            state.pop()
        m, _, n = state.pop(), state.pop(), state.pop()
        state.memory = state.memory + (Write("opaque", m, length=n),)
    elif name == "PC":
        state.push(Const(pc))
    elif name in ENV_OPS:
        for _ in range(ENV_OPS[name]):
            state.pop()
        state.push(Env("CALLDATASIZE") if name == "CALLDATASIZE" else log.fresh(name))
    elif name.startswith("LOG") or name in ("SSTORE", "TSTORE"):
        for _ in range(ins.pops):
            state.pop()
    elif name == "JUMP":
        state.jump = ("JUMP", state.pop(), None)
    elif name == "JUMPI":
        target, cond = state.pop(), state.pop()
        state.jump = ("JUMPI", target, cond)
    elif name in HALTS:
        state.halted = True
    else:  # unknown opcode byte
        state.halted = True
    return state


def _record_op(name: str, args: list[Expr], fact) -> None:
    if name == "AND":
        a, b = args
        if isinstance(a, Const) != isinstance(b, Const):
            c, x = (a, b) if isinstance(a, Const) else (b, a)
            fact(MaskFact, kind="AND", operand=x, constant=c.value)  # type: ignore[union-attr]
    elif name == "SIGNEXTEND":
        b, x = args
        if isinstance(b, Const) and not isinstance(x, Const):
            fact(MaskFact, kind="SIGNEXTEND", operand=x, constant=b.value)
    elif name == "ISZERO":
        (a,) = args
        if isinstance(a, S.Op) and a.name == "ISZERO":
            fact(UseFact, kind="ISZERO2", operand=a.args[0], op="ISZERO")
    elif name == "BYTE":
        fact(UseFact, kind="BYTE", operand=args[1], other=args[0], op="BYTE")
    if name in SIGNED_OPS or name in ("LT", "GT"):
        for side, x in enumerate(args):
            if not isinstance(x, Const):
                fact(UseFact, kind=name, operand=x, other=args[1 - side], side=side, op=name)
    elif name in MATH_OPS:
        for side, x in enumerate(args):
            if not isinstance(x, Const):
                fact(UseFact, kind="MATH", operand=x, side=side, op=name)


# driver ----------------------------------------------------------------------


class BlockMap:
    """Index of blocks by start offset."""

    def __init__(self, blocks: Sequence[BasicBlock]) -> None:
        self.blocks = list(blocks)
        self.by_start = {b.start_offset: b for b in self.blocks}
        self.next_start = {b.start_offset: b.end_offset for b in self.blocks}

    def is_jumpdest(self, off: int) -> bool:
        b = self.by_start.get(off)
        return b is not None and b.instructions[0].name == "JUMPDEST"


def run_block(block: BasicBlock, state: MachineState, log: FactLog) -> MachineState | None:
    """Execute a block. Returns None when the path aborts."""
    try:
        for ins in block.instructions:
            step(state, ins, log)
            if state.halted:
                break
    except (StackUnderflow, StackOverflow):
        return None
    return state


def successors(
    block: BasicBlock, state: MachineState, bmap: BlockMap, log: FactLog
) -> list[tuple[int, MachineState]]:
    """Outgoing edges with their states, in exploration order (first = explored first)."""
    if state.halted:
        return []
    jump = state.jump
    state.jump = None
    nxt = bmap.next_start.get(block.start_offset)
    if jump is None:
        return [(nxt, state)] if nxt in bmap.by_start else []
    kind, target, cond = jump
    target_ok = isinstance(target, Const) and bmap.is_jumpdest(target.value)
    if kind == "JUMP":
        return [(target.value, state)] if target_ok else []  # type: ignore[union-attr]
    taken = state.copy()
    fall = state
    g = guard_for(cond)  # type: ignore[arg-type]
    if g is not None:
        gkind, index, bound, on_jump = g
        holder = taken if on_jump else fall
        gf = GuardFact(seq=log.next_seq(), pc=block.instructions[-1].offset, guards=holder.guards,
                       kind=gkind, index=index, bound=bound, comparison=_strip_iszero(cond)[0])  # type: ignore[arg-type]
        log.add(gf)
        holder.guards = holder.guards + (gf,)
        holder.trail = (gf, holder.trail)
    out = []
    if nxt in bmap.by_start:
        out.append((nxt, fall))
    if target_ok:
        out.append((target.value, taken))  # type: ignore[union-attr]
    return out


def execute_function(
    blocks: Sequence[BasicBlock] | BlockMap,
    entry: Any,
    path_budget: int = DEFAULT_PATH_BUDGET,
    strict: bool = False,
) -> TraceFacts:
    """Symbolically execute one function and collect its facts.

    ``entry`` is a FunctionEntry (or anything with ``entry_block`` and an
    optional ``entry_state``) or a plain block offset.
    """
    bmap = blocks if isinstance(blocks, BlockMap) else BlockMap(blocks)
    if isinstance(entry, int):
        start, init = entry, None
    else:
        start, init = entry.entry_block, getattr(entry, "entry_state", None)
    state = init.copy() if init is not None else MachineState()
    state.guards, state.trail = (), None
    log = FactLog()
    out = TraceFacts()
    visited: set[int] = set()
    work: list[tuple[int, MachineState]] = [(start, state)]
    queued = 1
    while work:
        off, st = work.pop()
        if off in visited or off not in bmap.by_start:
            continue
        visited.add(off)
        block = bmap.by_start[off]
        out.blocks_visited += 1
        out.steps += len(block.instructions)
        res = run_block(block, st, log)
        if res is None:
            continue
        succ = successors(block, res, bmap, log)
        for item in reversed(succ):
            if queued >= path_budget:
                out.budget_exceeded = True
                if strict:
                    raise PathBudgetExceeded(f"more than {path_budget} paths queued")
                break
            work.append(item)
            queued += 1
        if out.budget_exceeded:
            break
    out.facts = log.facts
    out.paths = queued
    return out


# argument marking ---------------------------------------------------------------


def value_root(e: Expr) -> Expr:
    """Look through masks and sign extension to the value they act on."""
    while isinstance(e, S.Op):
        if e.name == "AND" and any(isinstance(a, Const) for a in e.args):
            e = next(a for a in e.args if not isinstance(a, Const))
        elif e.name == "SIGNEXTEND" and isinstance(e.args[0], Const):
            e = e.args[1]
        elif e.name == "SHR" and isinstance(e.args[0], Const):
            e = e.args[1]
        else:
            break
    return e


def mark_argument_symbols(facts: TraceFacts, layout: Sequence[Any]) -> TraceFacts:
    """Tag each fact with the index of the parameter it concerns.

    ``layout`` is the ordered list of parameter sketches; each must provide
    ``owns(calldata_word) -> bool``. A fact about a value is tagged when its
    root calldata word lies inside a parameter's extent. Facts already
    tagged, or unrelated to calldata, are left as they are.
    """
    if not layout:
        return facts

    def owner(e: Expr | None) -> int | None:
        if e is None:
            return None
        root = value_root(e)
        if not isinstance(root, CalldataWord):
            return None
        for i, sk in enumerate(layout):
            if sk.owns(root):
                return i
        return None

    out = []
    for f in facts.facts:
        if isinstance(f, (LoadFact, MemLoadFact)):
            k = owner(f.value)
        elif isinstance(f, CopyFact):
            k = owner(CalldataWord(f.cd_offset))
        elif isinstance(f, (MaskFact, UseFact)):
            k = owner(f.operand)
        else:
            k = None
        out.append(replace(f, arg=k) if k is not None and f.arg is None else f)
    return replace(facts, facts=out)
