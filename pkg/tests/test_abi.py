import random
import string

import eth_abi
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abigen import random_case, random_type, random_value
from keccak_ref import keccak256 as ref_keccak
from sigscope.abi import (
    Address,
    Bool,
    Bytes,
    BytesN,
    Decimal,
    DynArray,
    FunctionSignature,
    Int,
    MalformedSignature,
    StaticArray,
    String,
    Tuple,
    TooShort,
    UInt,
    ValueOutOfRange,
    VyperBytes,
    VyperString,
    array_of,
    compute_selector,
    encode_calldata,
    encode_with_regions,
    format_types,
    locate_fields,
    parse_signature,
    parse_type,
    parse_type_list,
)

SEL = bytes.fromhex("12345678")


def test_transfer_selector():
    assert compute_selector("transfer(address,uint256)").hex() == "a9059cbb"


@pytest.mark.parametrize("text", ["", "transfer(address, uint256)", "transfer(uint,address)", "f(uint7)",
                                  "f(", "(uint256)", "f(bytes33)"])
def test_malformed_signatures(text):
    with pytest.raises(MalformedSignature):
        compute_selector(text)


def test_random_selectors_match_reference_keccak():
    rng = random.Random(7)
    for _ in range(20):
        name = rng.choice(string.ascii_letters) + "".join(rng.choice(string.ascii_letters + "_0123456789")
                                                         for _ in range(rng.randint(0, 12)))
        params = [random_type(rng) for _ in range(rng.randint(0, 4))]
        text = f"{name}({','.join(p.canonical() for p in params)})"
        assert compute_selector(text) == ref_keccak(text.encode())[:4]


def test_vyper_types_hash_under_canonical_names():
    a = parse_signature("f(Bytes[40],decimal,String[3])")
    b = parse_signature("f(bytes,fixed168x10,string)")
    assert a.selector == b.selector
    assert format_types(a.params) == "Bytes[40],decimal,String[3]"


def test_uint32_layout():
    assert encode_calldata(SEL, [UInt(32)], [0x11223344]) == SEL + bytes(28) + bytes.fromhex("11223344")


def test_bytes4_layout():
    assert encode_calldata(SEL, [BytesN(4)], [b"abcd"]) == SEL + b"abcd" + bytes(28)


def test_dynamic_array_layout():
    out = encode_calldata(SEL, [DynArray(UInt())], [[1, 2]])
    words = [int.from_bytes(out[4 + 32 * i : 36 + 32 * i], "big") for i in range(4)]
    assert words == [0x20, 2, 1, 2]


@pytest.mark.parametrize("t,v", [(UInt(8), 256), (UInt(8), -1), (Int(8), 128), (Bool(), 2),
                                 (BytesN(4), b"abc"), (Address(), 1 << 160), (VyperBytes(3), b"abcd"),
                                 (Decimal(), Decimal.MAX + 1)])
def test_out_of_range(t, v):
    with pytest.raises(ValueOutOfRange):
        encode_calldata(SEL, [t], [v])


def _eth_value(t, v):
    if isinstance(t, (StaticArray, DynArray)):
        return [_eth_value(t.elem, x) for x in v]
    if isinstance(t, Tuple):
        return tuple(_eth_value(m, x) for m, x in zip(t.members, v))
    return v


def test_encoder_matches_eth_abi():
    rng = random.Random(11)
    for _ in range(1000):
        params, values = random_case(rng)
        ours = encode_calldata(SEL, params, values)
        ref = eth_abi.encode([p.canonical() for p in params], [_eth_value(p, v) for p, v in zip(params, values)])
        assert ours == SEL + ref, format_types(params)


def test_round_trip_has_no_defects_and_length_law():
    rng = random.Random(12)
    for _ in range(1000):
        params, values = random_case(rng, vyper=True)
        data = encode_calldata(SEL, params, values)
        layout = locate_fields(data, params)
        assert layout.defects == []
        assert layout.selector == 0x12345678
        assert (len(data) - 4) % 32 == 0
        if all(not p.is_dynamic for p in params):
            assert len(data) == 4 + sum(p.head_size for p in params)
        # every byte of the body is covered by exactly one region
        _, regions = encode_with_regions(SEL, params, values)
        cover = sorted((a, b) for a, b, _ in regions if b > a)
        pos = 0
        for a, b in cover:
            assert a == pos
            pos = b
        assert pos == len(data)


def test_locate_bytes_fields():
    data = encode_calldata(SEL, [Bytes()], [b"abcd"])
    (p,) = locate_fields(data, [Bytes()]).params
    assert p.offset_field == (4, 0x20)
    assert p.num_field == (36, 4)
    assert p.payloads == [(68, 4, Bytes())]
    assert p.extent == (36, 100)


def test_empty_layout():
    layout = locate_fields(SEL, [])
    assert layout.params == [] and layout.defects == []


def test_locate_too_short():
    with pytest.raises(TooShort):
        locate_fields(b"\x01\x02", [])


def test_dangling_offset():
    data = SEL + (0x1000).to_bytes(32, "big")
    layout = locate_fields(data, [Bytes()])
    assert [d.kind for d in layout.defects] == ["dangling-offset"]


def test_truncated_and_bad_structure():
    data = encode_calldata(SEL, [Bytes()], [b"x" * 40])
    assert [d.kind for d in locate_fields(data[:-1], [Bytes()]).defects] == ["truncated"]
    assert [d.kind for d in locate_fields(SEL + bytes(31), [UInt()]).defects] == ["truncated"]
    assert [d.kind for d in locate_fields(SEL + bytes(32), [Bytes()]).defects] == ["bad-structure"]
    big = encode_calldata(SEL, [Bytes()], [b"x" * 9])
    assert [d.kind for d in locate_fields(big, [VyperBytes(8)]).defects] == ["bad-structure"]


@settings(max_examples=1000)
@given(st.integers(0, 2**32))
def test_print_parse_round_trip(seed):
    t = random_type(random.Random(seed), vyper=True)
    assert parse_type(str(t)) == t
    assert parse_type(t.canonical()).canonical() == t.canonical()


def test_printed_forms():
    assert str(array_of(UInt(), [2, 3])) == "uint256[3][2]"
    assert str(array_of(UInt(), [None, 3])) == "uint256[3][]"
    assert str(Tuple((DynArray(UInt()), Address()))) == "(uint256[],address)"
    assert parse_type_list("uint8[],address") == [DynArray(UInt(8)), Address()]
    assert parse_type_list("") == []
    assert parse_type("uint") == UInt() and parse_type("int") == Int()
    assert str(VyperBytes(40)) == "Bytes[40]" and VyperString(5).canonical() == "string"
    assert String() != Bytes() and Bool() != UInt(8)


def test_function_signature_text():
    sig = FunctionSignature(0xA9059CBB, [Address(), UInt()])
    assert str(sig) == "0xa9059cbb(address,uint256)"
    assert parse_signature(str(sig)) == sig
    assert parse_signature("transfer(address,uint256)").selector == 0xA9059CBB
    assert sig.to_json()["types"] == "address,uint256"
    assert str(FunctionSignature(1, None)) == "0x00000001(?)"


def test_random_values_encode():
    rng = random.Random(3)
    for _ in range(50):
        t = random_type(rng, vyper=True)
        encode_calldata(SEL, [t], [random_value(rng, t)])
