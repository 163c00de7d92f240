import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigscope import symbolic as S
from sigscope.asm import assemble_source
from sigscope.dispatcher import detect_dialect, extract_functions
from sigscope.evm import Instruction, decode, partition_blocks
from sigscope.fixtures import worked_example, dynamic_rows_example
from sigscope.rules import coarse_infer, count_and_order, relevant_guards
from sigscope.symbolic import CalldataWord, Const
from sigscope.tase import (
    BlockMap,
    FactLog,
    MachineState,
    PathBudgetExceeded,
    StackUnderflow,
    execute_function,
    mark_argument_symbols,
    step,
)


def _facts(code: bytes):
    bmap = BlockMap(partition_blocks(decode(code)))
    (entry,) = extract_functions(bmap, detect_dialect(bmap))
    return execute_function(bmap, entry)


def test_push_and_calldataload():
    st_ = MachineState()
    step(st_, Instruction(0, 0x60, b"\x04"))
    assert st_.stack == [Const(4)]
    st_ = MachineState()
    step(st_, Instruction(0, 0x60, b"\x00"))
    step(st_, Instruction(2, 0x35, b""))
    assert st_.stack == [CalldataWord(Const(0))]


def test_environment_reads_are_fresh_symbols():
    st_ = MachineState()
    log = FactLog()
    step(st_, Instruction(0, 0x33, b""), log)
    step(st_, Instruction(1, 0x33, b""), log)
    a, b = st_.stack
    assert isinstance(a, S.Env) and a != b


def test_underflow_raises_in_step():
    with pytest.raises(StackUnderflow):
        step(MachineState(), Instruction(0, 0x01, b""))


def test_stop_body_has_no_facts():
    facts = execute_function(partition_blocks(decode(b"\x00")), 0)
    assert facts.facts == [] and facts.blocks_visited == 1


def test_worked_example_facts():
    facts = _facts(worked_example().bytecode)
    x = CalldataWord(Const(4))
    y = CalldataWord(S.add(x, Const(4)))
    locs = [f.loc for f in facts.loads]
    assert Const(4) in locs and S.add(x, Const(4)) in locs and Const(0x24) in locs
    (copy,) = facts.copies
    assert copy.cd_offset == S.add(x, Const(36))
    assert copy.length == S.scale(y, 32)
    masks = {(m.constant, m.operand) for m in facts.masks}
    assert ((1 << 160) - 1, CalldataWord(Const(0x24))) in masks
    (item,) = facts.mem_loads
    assert item.value == CalldataWord(S.add(x, Const(36)))
    assert (0xFF, item.value) in masks


def test_row_item_read_under_two_guards():
    facts = _facts(dynamic_rows_example().bytecode)
    x = CalldataWord(Const(4))
    items = [f for f in facts.loads if S.contains(f.loc, x) and f.loc not in (Const(4), S.add(x, Const(4)))]
    (item,) = items
    c, terms = S.linear_parts(item.loc)
    assert x in terms and c == 36 + 32 * 3  # x[1][0]: row stride 3 words
    gs = relevant_guards(item)
    assert len(gs) == 2
    assert gs[0].bound == CalldataWord(S.add(x, Const(4)))
    assert gs[1].bound == Const(3)


def test_marking_tags_copied_array_items():
    fx = worked_example()
    bmap = BlockMap(partition_blocks(decode(fx.bytecode)))
    (entry,) = extract_functions(bmap)
    facts = execute_function(bmap, entry)
    sketches = count_and_order(coarse_infer(facts))
    marked = mark_argument_symbols(facts, sketches)
    (item,) = marked.mem_loads
    assert item.arg == 0
    mask_args = {(m.constant, m.arg) for m in marked.masks}
    assert (0xFF, 0) in mask_args and ((1 << 160) - 1, 1) in mask_args
    assert mark_argument_symbols(facts, []) is facts


def test_budget():
    # three JUMPIs in a row: more than two edges get queued
    src = " ".join(f"PUSH1 0 CALLDATALOAD PUSH2 @l{i} JUMPI l{i}:" for i in range(3)) + " STOP"
    blocks = partition_blocks(decode(assemble_source(src)))
    assert not execute_function(blocks, 0).budget_exceeded
    assert execute_function(blocks, 0, path_budget=2).budget_exceeded
    with pytest.raises(PathBudgetExceeded):
        execute_function(blocks, 0, path_budget=2, strict=True)


def test_symbolic_jump_target_stops_path():
    code = assemble_source("PUSH1 0 CALLDATALOAD JUMP x: PUSH1 4 CALLDATALOAD STOP")
    facts = execute_function(partition_blocks(decode(code)), 0)
    assert [f.loc for f in facts.loads] == [Const(0)]


def test_underflow_aborts_only_that_path():
    code = assemble_source("PUSH1 0 CALLDATALOAD PUSH2 @ok JUMPI ADD STOP ok: PUSH1 4 CALLDATALOAD STOP")
    facts = execute_function(partition_blocks(decode(code)), 0)
    assert Const(4) in [f.loc for f in facts.loads]


@settings(max_examples=1000)
@given(st.binary(min_size=1, max_size=120))
def test_termination_and_determinism(code):
    blocks = partition_blocks(decode(code))
    a = execute_function(blocks, 0, path_budget=64)
    b = execute_function(blocks, 0, path_budget=64)
    assert a.blocks_visited <= len(blocks)
    assert a.steps <= sum(len(bl.instructions) for bl in blocks)
    assert a.paths <= 64
    assert a.summary() == b.summary()
    # guard context is ordered: guards a fact sits under were recorded before it, in path order
    for f in a.facts:
        seqs = [g.seq for g in f.guards]
        assert seqs == sorted(seqs) and all(s < f.seq for s in seqs)
