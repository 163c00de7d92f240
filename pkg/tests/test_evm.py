import random

import pyevmasm
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigscope.evm import OPCODES, TERMINATORS, decode, disassemble, parse_hex, partition_blocks, push_width

# pyevmasm stops at Istanbul and spells a few mnemonics differently
_RENAMED = {"DIFFICULTY": "PREVRANDAO", "GETPC": "PC"}


def test_empty_input():
    assert decode(b"") == []
    assert partition_blocks([]) == []


def test_push1_operand():
    (ins,) = decode(bytes([0x60, 0x55]))
    assert (ins.offset, ins.name, ins.operand, ins.value) == (0, "PUSH1", b"\x55", 0x55)


def test_truncated_push_is_zero_extended_on_the_right():
    (ins,) = decode(bytes([0x62, 0x01]))
    assert ins.name == "PUSH3"
    assert ins.operand == b"\x01\x00\x00"
    assert ins.value == 0x010000
    assert ins.size == 4


def test_unknown_bytes_decode_as_invalid():
    assert [i.name for i in decode(bytes([0x0C, 0xEF, 0xFE]))] == ["INVALID"] * 3


def _reference(code: bytes):
    return list(pyevmasm.disassemble_all(code, fork="istanbul"))


def _complete_prefix(code: bytes) -> int:
    """Offset where the first truncated PUSH starts (or len(code))."""
    pc = 0
    while pc < len(code):
        w = push_width(code[pc])
        if pc + 1 + w > len(code):
            return pc
        pc += 1 + w
    return pc


def test_decode_matches_reference_disassembler():
    rng = random.Random(1)
    for _ in range(100):
        code = bytes(rng.getrandbits(8) for _ in range(rng.randint(1, 200)))
        cut = _complete_prefix(code)
        ours = [i for i in decode(code) if i.offset < cut]
        ref = _reference(code[:cut])
        assert len(ours) == len(ref)
        for a, b in zip(ours, ref):
            assert a.offset == b.pc
            assert a.size == b.size
            if a.is_push and a.opcode != 0x5F:
                assert a.value == b.operand
            if b.name != "INVALID" and a.name != "INVALID":
                assert a.name == _RENAMED.get(b.name, b.name)
        # the truncated tail: the reference drops it, the EVM reads zeros
        tail = [i for i in decode(code) if i.offset >= cut]
        if tail:
            (t,) = tail
            raw = code[cut + 1 :]
            assert t.operand == raw + bytes(push_width(code[cut]) - len(raw))


def test_partition_jump_then_jumpdest():
    blocks = partition_blocks(decode(bytes([0x60, 0x55, 0x56, 0x5B, 0x00])))
    assert [(b.start_offset, [i.name for i in b.instructions]) for b in blocks] == [
        (0, ["PUSH1", "JUMP"]),
        (3, ["JUMPDEST", "STOP"]),
    ]
    assert [b.terminator for b in blocks] == ["JUMP", "STOP"]


def test_single_stop_block():
    (b,) = partition_blocks(decode(b"\x00"))
    assert b.terminator == "STOP" and b.end_offset == 1


def _boundaries_bruteforce(ins):
    """Independent scan: mark starts, then cut."""
    starts = set()
    for k, i in enumerate(ins):
        if k == 0 or i.name == "JUMPDEST" or ins[k - 1].name in TERMINATORS:
            starts.add(i.offset)
    return sorted(starts)


_OPS = sorted(OPCODES)


@st.composite
def instruction_bytes(draw, n=200):
    out = bytearray()
    for _ in range(draw(st.integers(1, n))):
        op = draw(st.sampled_from(_OPS + [0x5B] * 10 + [0x56, 0x57, 0x00]))
        out.append(op)
        out += bytes(draw(st.integers(0, 255)) for _ in range(push_width(op)))
    return bytes(out)


@given(instruction_bytes())
def test_partition_matches_bruteforce(code):
    ins = decode(code)
    blocks = partition_blocks(ins)
    assert [b.start_offset for b in blocks] == _boundaries_bruteforce(ins)


@given(st.binary(max_size=300))
def test_blocks_reproduce_decode(code):
    ins = decode(code)
    blocks = partition_blocks(ins)
    assert [i for b in blocks for i in b.instructions] == ins
    assert len(blocks) <= len(ins)
    for b in blocks:
        assert all(i.name != "JUMPDEST" for i in b.instructions[1:])
        assert all(i.name not in TERMINATORS for i in b.instructions[:-1])


@given(st.binary(max_size=300))
def test_offsets_and_redecode(code):
    ins = decode(code)
    pc = 0
    for i in ins:
        assert i.offset == pc
        assert len(i.operand) == push_width(i.opcode)
        pc += i.size
        (again,) = decode(bytes([i.opcode]) + i.operand)
        assert (again.opcode, again.operand) == (i.opcode, i.operand)
    assert pc >= len(code)


def test_disassemble_format():
    assert disassemble(parse_hex("0x00")) == "0000: STOP"
    assert disassemble(parse_hex("0x6316d93ade")) == "0000: PUSH4 0x16d93ade"
    assert disassemble(bytes([0x60, 0x55, 0x56, 0x5B, 0x00])) == "0000: PUSH1 0x55\n0002: JUMP\n\n0003: JUMPDEST\n0004: STOP"


def test_parse_hex():
    assert parse_hex(" 0xAB cd\n") == b"\xab\xcd"
    with pytest.raises(ValueError):
        parse_hex("0xabc")
