import json

import pytest

from sigscope.abi import Address, Bool, Decimal, Int, StaticArray, Tuple, UInt, parse_signature
from sigscope.evm import decode
from sigscope.fixtures import (
    TEMPLATES,
    Fixture,
    UnsupportedCombination,
    assemble,
    build_fixture,
    corpus,
    dump_corpus,
    worked_example,
    static_matrix_example,
    dynamic_rows_example,
    load_corpus,
    scaling_fixture,
)
from sigscope.rules import recover

CORPUS = corpus()
ALL_RULES = {f"R{i}" for i in range(1, 32)}

# template id, parameters, rule ids the template stands for
DECLARED = [
    ("uintM-mask", {"M": 32}, {"R4", "R11"}),
    ("bytesM-mask", {}, {"R12"}),
    ("intM-signextend", {}, {"R13"}),
    ("bool-iszero²", {}, {"R14"}),
    ("signed-op", {}, {"R15"}),
    ("address-no-math", {}, {"R16"}),
    ("bytes-byteop", {}, {"R17"}),
    ("bytes32-byteop", {}, {"R18"}),
    ("static-array-external", {}, {"R3"}),
    ("static-array-public", {}, {"R6"}),
    ("static-array-public", {"dims": (2, 3)}, {"R9"}),
    ("dyn-array-public", {}, {"R1", "R5", "R7"}),
    ("dyn-array-public", {"inner": (3,)}, {"R1", "R10"}),
    ("bytes-public", {}, {"R1", "R5", "R8"}),
    ("dyn-array-external", {}, {"R1", "R2"}),
    ("nested-array", {}, {"R19", "R22"}),
    ("struct", {}, {"R19", "R21"}),
    ("vyper-prologue+word", {}, {"R20", "R25"}),
    ("vyper-list", {}, {"R24"}),
    ("vyper-bytes", {}, {"R23", "R26"}),
    ("vyper-refinements", {"t": Address()}, {"R27"}),
    ("vyper-refinements", {"t": Int(128)}, {"R28"}),
    ("vyper-refinements", {"t": Decimal()}, {"R29"}),
    ("vyper-refinements", {"t": Bool()}, {"R30"}),
]


def _applied(sig) -> set:
    return {r for per_param in sig.rules for r in per_param}


def _check(fx: Fixture):
    got = recover(fx.bytecode)
    assert [str(s) for s in got] == [str(fx.ground_truth)], fx.name
    (sig,) = got
    assert fx.rules_exercised <= _applied(sig), (fx.name, sorted(fx.rules_exercised - _applied(sig)))
    assert sorted({n["kind"] for n in sig.notes}) == sorted(set(fx.expected_notes)), fx.name
    return sig


@pytest.mark.parametrize("fx", CORPUS, ids=[f.name for f in CORPUS])
def test_corpus_fixture_recovers_exactly(fx):
    _check(fx)


def test_corpus_size_and_coverage():
    assert len(CORPUS) >= 40
    assert set().union(*(f.rules_exercised for f in CORPUS)) == ALL_RULES
    assert len({f.name for f in CORPUS}) == len(CORPUS)


@pytest.mark.parametrize("tid,params,rules", DECLARED, ids=[f"{t}-{i}" for i, (t, _, _) in enumerate(DECLARED)])
def test_template_exercises_its_rules(tid, params, rules):
    fx = assemble(tid, **params)
    assert rules <= fx.rules_exercised
    _check(fx)


def test_every_template_id_assembles():
    for tid in TEMPLATES:
        _check(assemble(tid))


def test_template_examples():
    assert recover(assemble("uintM-mask", M=32).bytecode)[0].types_text == "uint32"
    assert recover(assemble("bool-iszero²").bytecode)[0].types_text == "bool"
    (sig,) = recover(assemble("vyper-prologue+word", t=Address()).bytecode)
    assert sig.types_text == "address" and sig.dialect == "vyper"


def _push4_values(code: bytes) -> set:
    return {i.value for i in decode(code) if i.name == "PUSH4"}


@pytest.mark.parametrize("fx", CORPUS + [worked_example(), static_matrix_example(), dynamic_rows_example()], ids=lambda f: f.name)
def test_selector_is_embedded_and_decode_round_trips(fx):
    assert fx.ground_truth.selector in _push4_values(fx.bytecode)
    ins = decode(fx.bytecode)
    assert b"".join(bytes([i.opcode]) + i.operand for i in ins) == fx.bytecode
    assert fx.ground_truth.selector == parse_signature(str(fx.ground_truth)).selector


def test_named_selectors_are_hashed():
    fx = build_fixture("transfer", [Address(), UInt()], [])
    assert fx.ground_truth.selector == 0xA9059CBB


@pytest.mark.parametrize("tid,params", [
    ("static-array-public", {"dims": (2, 2, 2)}),
    ("dyn-array-public", {"inner": (None,)}),
    ("nested-array", {"elem": StaticArray(UInt(), 2)}),
    ("struct", {"rest": (Tuple((UInt(),)),)}),
    ("uintM-mask", {"M": 7}),
    ("no-such-template", {}),
])
def test_unsupported_combinations(tid, params):
    with pytest.raises((UnsupportedCombination, ValueError)):
        assemble(tid, **params)


def test_unsupported_combination_is_a_value_error():
    with pytest.raises(UnsupportedCombination):
        assemble("static-array-public", dims=(2, 2, 2))


def test_json_round_trip(tmp_path):
    path = tmp_path / "corpus.json"
    dump_corpus(str(path))
    again = load_corpus(str(path))
    assert [f.to_json() for f in again] == [f.to_json() for f in CORPUS]
    row = json.loads(path.read_text())[0]
    assert set(row) >= {"name", "bytecode", "ground_truth", "rules"}
    for fx in again[:5]:
        _check(fx)


def test_scaling_fixture_dims():
    for n in (1, 4, 8):
        fx = scaling_fixture(n)
        assert str(fx.ground_truth).endswith("(" + "uint256" + "[2]" * n + ")")
        _check(fx)


def test_shipped_corpus_matches_generator():
    assert [f.to_json() for f in load_corpus()] == [f.to_json() for f in CORPUS]
