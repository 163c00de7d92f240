"""Function dispatch recognition and source-dialect detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import symbolic as S
from .evm import BasicBlock
from .symbolic import CalldataWord, Const, Expr
from .tase import BlockMap, FactLog, MachineState, StackOverflow, StackUnderflow, step

SOLIDITY = "solidity"
VYPER = "vyper"

_SELECTOR_EXPR = S.apply("SHR", Const(224), CalldataWord(S.ZERO))
_TOP4_MASK = 0xFFFFFFFF << 224


class DispatchNotFound(Exception):
    """No selector comparison exists; the contract exposes no dispatchable function."""


@dataclass
class FunctionEntry:
    selector: int
    entry_block: int
    dialect: str = SOLIDITY
    entry_state: MachineState | None = field(default=None, repr=False, compare=False)


class FunctionList(list):
    """A list of FunctionEntry with an attached list of notes."""

    def __init__(self, items=(), notes: Sequence[str] = ()) -> None:
        super().__init__(items)
        self.notes = list(notes)


def selector_constant(cond: Expr) -> tuple[int, bool] | None:
    """Match ``ISZERO^k(EQ(const, selector-expr))``.

    Returns (selector, matched-branch-is-jump-target) or None.
    """
    k = 0
    while isinstance(cond, S.Op) and cond.name == "ISZERO":
        cond = cond.args[0]
        k += 1
    if not (isinstance(cond, S.Op) and cond.name == "EQ"):
        return None
    a, b = cond.args
    if isinstance(b, Const):
        a, b = b, a
    if not isinstance(a, Const) or isinstance(b, Const):
        return None
    if b == _SELECTOR_EXPR and a.value < 1 << 32:
        return a.value, k % 2 == 0
    if (
        isinstance(b, S.Op)
        and b.name == "AND"
        and Const(_TOP4_MASK) in b.args
        and CalldataWord(S.ZERO) in b.args
        and a.value & ((1 << 224) - 1) == 0
    ):
        return a.value >> 224, k % 2 == 0
    return None


def _stores_selector(state: MachineState, ins) -> bool:
    if ins.name != "MSTORE" or len(state.stack) < 2:
        return False
    return S.contains(state.stack[-2], CalldataWord(S.ZERO))


def _walk(blocks: Sequence[BasicBlock] | BlockMap) -> tuple[list[FunctionEntry], bool]:
    bmap = blocks if isinstance(blocks, BlockMap) else BlockMap(blocks)
    entries: list[FunctionEntry] = []
    seen: set[int] = set()
    saw_store = False
    log = FactLog()
    log.record = False
    if 0 not in bmap.by_start:
        return entries, False
    work: list[tuple[int, MachineState]] = [(0, MachineState())]
    visited: set[int] = set()
    while work:
        off, st = work.pop()
        if off in visited or off not in bmap.by_start:
            continue
        visited.add(off)
        block = bmap.by_start[off]
        try:
            for ins in block.instructions:
                if not entries and _stores_selector(st, ins):
                    saw_store = True
                step(st, ins, log)
                if st.halted:
                    break
        except (StackUnderflow, StackOverflow):
            continue
        if st.halted:
            continue
        jump, st.jump = st.jump, None
        nxt = bmap.next_start.get(off)
        if jump is None:
            if nxt in bmap.by_start:
                work.append((nxt, st))
            continue
        kind, target, cond = jump
        target_ok = isinstance(target, Const) and bmap.is_jumpdest(target.value)
        if kind == "JUMP":
            if target_ok:
                work.append((target.value, st))  # type: ignore[union-attr]
            continue
        match = selector_constant(cond)  # type: ignore[arg-type]
        taken, fall = st.copy(), st
        if match is not None:
            sel, on_jump = match
            entry_off = target.value if on_jump and target_ok else (nxt if not on_jump else None)  # type: ignore[union-attr]
            if entry_off is not None and entry_off in bmap.by_start and sel not in seen:
                seen.add(sel)
                entries.append(FunctionEntry(sel, entry_off, SOLIDITY, taken if on_jump else fall))
            other = (nxt, fall) if on_jump else ((target.value, taken) if target_ok else None)  # type: ignore[union-attr]
            if other is not None and other[0] in bmap.by_start:
                work.append(other)
            continue
        if target_ok:
            work.append((target.value, taken))  # type: ignore[union-attr]
        if nxt in bmap.by_start:
            work.append((nxt, fall))
    return entries, saw_store


def detect_dialect(blocks: Sequence[BasicBlock] | BlockMap) -> str:
    """Vyper when the selector word is stored to memory before dispatch starts."""
    if not blocks:
        return SOLIDITY
    entries, saw_store = _walk(blocks)
    return VYPER if saw_store else SOLIDITY


def extract_functions(
    blocks: Sequence[BasicBlock] | BlockMap, dialect: str = SOLIDITY, strict: bool = False
) -> FunctionList:
    """Find every (selector, entry block) pair in the dispatcher.

    With ``strict`` a dispatcher-less contract raises DispatchNotFound;
    otherwise an empty list carrying a ``DispatchNotFound`` note is returned.
    """
    entries, _ = _walk(blocks) if blocks else ([], False)
    for e in entries:
        e.dialect = dialect
    if not entries:
        if strict:
            raise DispatchNotFound("no selector comparison found")
        return FunctionList([], ["DispatchNotFound"])
    return FunctionList(entries)
