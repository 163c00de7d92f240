import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from abigen import mutated_is_valid, random_case, word_types
from sigscope.abi import (
    Address,
    Bool,
    Bytes,
    Decimal,
    FunctionSignature,
    Int,
    TooShort,
    UInt,
    encode_calldata,
    encode_with_regions,
    parse_signature,
)
from sigscope.parcheck import (
    NotTransferCall,
    SelectorMismatch,
    SignatureUnavailable,
    check_calldata,
    detect_short_address,
    word_defect,
)

TRANSFER = parse_signature("transfer(address,uint256)")
SEL = 0x12345678


def test_valid_transfer():
    data = encode_calldata(TRANSFER.selector, TRANSFER.params, [0xAB << 8, 0x2710])
    v = check_calldata(data, TRANSFER)
    assert v.valid and v.defects == [] and v.selector == 0xA9059CBB and v.signature is TRANSFER


def test_bytes_padding_mutation():
    sig = FunctionSignature(SEL, [Bytes()])
    data = bytearray(encode_calldata(SEL, sig.params, [b"abcd"]))
    data[4 + 64 + 10] = 0x01
    v = check_calldata(bytes(data), sig)
    assert not v.valid
    assert [(d.param, d.kind) for d in v.defects] == [(0, "bad-padding")]


def test_bool_two_is_bad_padding():
    sig = FunctionSignature(SEL, [UInt(), Bool()])
    data = SEL.to_bytes(4, "big") + (7).to_bytes(32, "big") + (2).to_bytes(32, "big")
    v = check_calldata(data, sig)
    assert [(d.param, d.kind) for d in v.defects] == [(1, "bad-padding")]


def test_signature_selection():
    data = encode_calldata(SEL, [UInt()], [1])
    with pytest.raises(SelectorMismatch):
        check_calldata(data, TRANSFER)
    with pytest.raises(SignatureUnavailable):
        check_calldata(data, [TRANSFER])
    with pytest.raises(SignatureUnavailable):
        check_calldata(data, [FunctionSignature(SEL, None)])
    other = FunctionSignature(SEL, [UInt()])
    assert check_calldata(data, [TRANSFER, other]).valid
    assert check_calldata(data, {SEL: other}).valid
    with pytest.raises(TooShort):
        check_calldata(b"\x12\x34", other)


def test_structural_defects_reported():
    sig = FunctionSignature(SEL, [Bytes()])
    data = encode_calldata(SEL, sig.params, [b"x" * 40])
    assert [d.kind for d in check_calldata(data[:-1], sig).defects] == ["truncated"]


@pytest.mark.parametrize("t,word,ok", [
    (UInt(8), (255).to_bytes(32, "big"), True),
    (UInt(8), (256).to_bytes(32, "big"), False),
    (Int(8), (-128 % (1 << 256)).to_bytes(32, "big"), True),
    (Int(8), (128).to_bytes(32, "big"), False),
    (Address(), ((1 << 160) - 1).to_bytes(32, "big"), True),
    (Address(), (1 << 160).to_bytes(32, "big"), False),
    (Decimal(), (Decimal.MIN % (1 << 256)).to_bytes(32, "big"), True),
    (Decimal(), (Decimal.MAX + 1).to_bytes(32, "big"), False),
])
def test_word_rules(t, word, ok):
    assert (word_defect(t, word) is None) == ok


def test_round_trip_and_mutations():
    rng = random.Random(5)
    checked = {"pad": 0, "value": 0}
    for _ in range(1000):
        params, values = random_case(rng, vyper=True)
        data, regions = encode_with_regions(SEL, params, values)
        sig = FunctionSignature(SEL, params)
        assert check_calldata(data, sig).valid
        words = word_types(data, params)
        for a, b, kind in regions:
            if b <= a or kind in ("selector", "offset", "num"):
                continue
            pos = rng.randrange(a, b)
            mutated = bytearray(data)
            mutated[pos] ^= rng.randrange(1, 256)
            slot = 4 + (pos - 4) // 32 * 32
            t = words.get(slot)
            want = mutated_is_valid(kind, t, bytes(mutated[slot : slot + 32]))
            got = check_calldata(bytes(mutated), sig).valid
            assert got == want, (str(params), kind, pos)
            checked[kind] = checked.get(kind, 0) + 1
    assert checked["pad"] > 1000 and checked["value"] > 1000


# short address -------------------------------------------------------------------


def _short_address_case():
    to = 0x62E2B4F4B9E95E6D6A6A1E6F5C4A7B09F3D1A200  # trailing zero byte
    good = encode_calldata(TRANSFER.selector, TRANSFER.params, [to, 0x2710])
    return good, good[:-33] + good[-32:]  # drop the address's last byte


def _evm_word(calldata: bytes, pos: int) -> int:
    # CALLDATALOAD semantics: bytes past the end read as zero
    return int.from_bytes(calldata[pos : pos + 32].ljust(32, b"\x00"), "big")


def test_short_address_case_attack_is_flagged():
    good, short = _short_address_case()
    assert len(short) - 4 == 63
    assert _evm_word(good, 36) == 0x2710
    assert _evm_word(short, 36) == 0x271000
    v = detect_short_address(short)
    assert not v.valid
    assert [(d.param, d.kind) for d in v.defects] == [(0, "short-address")]
    assert detect_short_address(good).valid


@given(st.integers(0, (1 << 160) - 1), st.integers(0, (1 << 256) - 1))
def test_well_formed_transfers_never_flagged(to, value):
    data = encode_calldata(TRANSFER.selector, TRANSFER.params, [to, value])
    assert detect_short_address(data).valid


@given(st.binary(min_size=64, max_size=200))
def test_long_arguments_never_flagged(args):
    assert detect_short_address(bytes.fromhex("a9059cbb") + args).valid


@given(st.integers(1, 31), st.integers(1, 255), st.integers(0, (1 << 128) - 1))
def test_nonzero_would_be_padding_is_not_flagged(missing, byte, value):
    data = encode_calldata(TRANSFER.selector, TRANSFER.params, [0x1234, value])
    short = bytearray(data[: len(data) - missing])
    short[-32] = byte  # the first byte that would be pulled into the address
    assert detect_short_address(bytes(short)).valid


@given(st.integers(1, 31), st.integers(0, (1 << 160) - 1), st.integers(0, (1 << 128) - 1))
def test_dropped_zero_bytes_are_flagged(missing, to, value):
    to = (to >> (8 * missing)) << (8 * missing)
    value %= 1 << (8 * (32 - missing))  # the bytes pulled into the address must be zero
    data = encode_calldata(TRANSFER.selector, TRANSFER.params, [to, value])
    short = data[: 36 - missing] + data[36:]
    assert _evm_word(short, 36) == (value << (8 * missing)) % (1 << 256)
    assert not detect_short_address(short).valid


def test_only_transfer_by_default():
    sig = parse_signature("approve(address,uint256)")
    data = encode_calldata(sig.selector, sig.params, [0x100, 5])
    with pytest.raises(NotTransferCall):
        detect_short_address(data)
    with pytest.raises(NotTransferCall):
        detect_short_address(data, extend=True)
    short = data[:35] + data[36:]
    assert not detect_short_address(short, extend=True, signature=sig).valid
    assert detect_short_address(data, extend=True, signature=sig).valid
    with pytest.raises(TooShort):
        detect_short_address(b"")
