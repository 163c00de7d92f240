"""Hand-assembled contracts with known signatures.

Each parameter type has an accessor: the instruction sequence a compiler
emits to read and use it. A fixture is one function built from accessors,
placed behind a Solidity or Vyper dispatcher, together with its ground-truth
signature and the inference rules it is meant to trigger.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable, Sequence

from .abi import (
    AbiType,
    Address,
    Bool,
    Bytes,
    BytesN,
    Decimal,
    DynArray,
    FunctionSignature,
    Int,
    StaticArray,
    String,
    Tuple,
    UInt,
    VyperBytes,
    VyperString,
    compute_selector,
    parse_signature,
)
from .asm import assemble_source


class UnsupportedCombination(ValueError):
    pass


@dataclass
class Fixture:
    name: str
    ground_truth: FunctionSignature
    bytecode: bytes
    rules_exercised: frozenset[str]
    expected_notes: tuple[str, ...] = ()
    source: str = field(default="", repr=False)

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "bytecode": "0x" + self.bytecode.hex(),
            "ground_truth": str(self.ground_truth),
            "dialect": self.ground_truth.dialect,
            "rules": sorted(self.rules_exercised, key=lambda r: int(r[1:])),
            "expected_notes": list(self.expected_notes),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Fixture":
        sig = parse_signature(data["ground_truth"])
        sig.dialect = data.get("dialect", "solidity")
        return cls(
            data["name"],
            sig,
            bytes.fromhex(data["bytecode"].removeprefix("0x")),
            frozenset(data["rules"]),
            tuple(data.get("expected_notes", ())),
        )


class _Labels:
    def __init__(self) -> None:
        self.n = itertools.count()

    def __call__(self, stem: str) -> str:
        return f"{stem}_{next(self.n)}"


# uses: consume the value on top of the stack ---------------------------------


def _mask_low(bits: int) -> int:
    return (1 << bits) - 1


def _mask_high(nbytes: int) -> int:
    return _mask_low(8 * nbytes) << (256 - 8 * nbytes)


def solidity_use(t: AbiType, signed_op: str = "SDIV") -> str:
    """Instructions that clean up and consume a word of type ``t``."""
    if isinstance(t, UInt):
        if t.bits == 256:
            return "PUSH1 0 SSTORE"
        tail = "PUSH1 1 ADD " if t.bits == 160 else ""
        return f"PUSH {hex(_mask_low(t.bits))} AND {tail}PUSH1 0 SSTORE"
    if isinstance(t, Int):
        if t.bits == 256:
            if signed_op in ("SDIV", "SMOD"):
                return f"PUSH1 3 SWAP1 {signed_op} PUSH1 0 SSTORE"
            return f"PUSH1 0 SWAP1 {signed_op} PUSH1 0 SSTORE"
        return f"PUSH1 {t.bits // 8 - 1} SIGNEXTEND PUSH1 0 SSTORE"
    if isinstance(t, Address):
        return f"PUSH20 {hex(_mask_low(160))} AND PUSH1 0 SSTORE"
    if isinstance(t, Bool):
        return "ISZERO ISZERO PUSH1 0 SSTORE"
    if isinstance(t, BytesN):
        if t.size == 32:
            return "PUSH1 0 BYTE PUSH1 0 SSTORE"
        return f"PUSH32 {hex(_mask_high(t.size))} AND PUSH1 0 SSTORE"
    raise UnsupportedCombination(f"no word use for {t}")


def vyper_use(t: AbiType, fail: str) -> str:
    """Vyper-style range checks on the value on top of the stack, then consume it.

    Bound constants live in memory: 2**160 at 0x20, int128 max/min at
    0x40/0x60 and the decimal max/min at 0x80/0xa0.
    """
    if isinstance(t, UInt) and t.bits == 256:
        return "PUSH1 0 SSTORE"
    if isinstance(t, Address):
        return f"PUSH1 0x20 MLOAD DUP2 LT ISZERO PUSH2 @{fail} JUMPI PUSH1 0 SSTORE"
    if isinstance(t, Bool):
        return f"PUSH1 2 DUP2 LT ISZERO PUSH2 @{fail} JUMPI PUSH1 0 SSTORE"
    if isinstance(t, (Int, Decimal)):
        if isinstance(t, Int) and t.bits != 128:
            raise UnsupportedCombination("Vyper integers are int128")
        hi, lo = ("0x40", "0x60") if isinstance(t, Int) else ("0x80", "0xa0")
        return (f"PUSH1 {hi} MLOAD DUP2 SGT PUSH2 @{fail} JUMPI "
                f"PUSH1 {lo} MLOAD DUP2 SLT PUSH2 @{fail} JUMPI PUSH1 0 SSTORE")
    if isinstance(t, BytesN) and t.size == 32:
        return "PUSH1 0 BYTE PUSH1 0 SSTORE"
    raise UnsupportedCombination(f"no Vyper use for {t}")


# accessors -------------------------------------------------------------------


def _dims_of(t: AbiType) -> tuple[list[int | None], AbiType]:
    dims: list[int | None] = []
    while isinstance(t, (StaticArray, DynArray)):
        dims.append(t.count if isinstance(t, StaticArray) else None)
        t = t.elem
    return dims, t


def _strides(dims: Sequence[int | None]) -> list[int]:
    out = []
    for k in range(len(dims)):
        s = 32
        for d in dims[k + 1 :]:
            s *= d or 1
        out.append(s)
    return out


def _bound_check(index: int, size: int, lab: _Labels) -> str:
    ok = lab("ok")
    return f"PUSH {index} PUSH {size} DUP2 LT PUSH2 @{ok} JUMPI INVALID {ok}:"


def _bump(size: int) -> str:
    """Advance the free memory pointer past a copy of ``size`` bytes."""
    return f"PUSH1 0x40 MLOAD PUSH {size} ADD PUSH1 0x40 MSTORE"


def _bump_by_num(head: int, scale: int, extra: int) -> str:
    # size depends on the length word, so read it again
    return (f"PUSH {head} CALLDATALOAD PUSH1 4 ADD CALLDATALOAD PUSH {scale} MUL PUSH {extra} ADD "
            "PUSH1 0x40 MLOAD ADD PUSH1 0x40 MSTORE")


class Accessor:
    def __init__(self, lab: _Labels, use: Callable[[AbiType], str], mode: str) -> None:
        self.lab = lab
        self.use = use
        self.mode = mode

    # static ---------------------------------------------------------------

    def word(self, t: AbiType, head: int) -> str:
        return f"PUSH {head} CALLDATALOAD {self.use(t)}"

    def static_array_external(self, t: AbiType, head: int) -> str:
        dims, elem = _dims_of(t)
        code = [f"PUSH {head}"]
        for d, stride in zip(dims, _strides(dims)):
            code.append(_bound_check(d - 1, d, self.lab))  # type: ignore[arg-type, operator]
            code.append(f"PUSH {stride} MUL ADD")
        code.append(f"CALLDATALOAD {self.use(elem)}")
        return " ".join(code)

    def static_array_public(self, t: AbiType, head: int) -> str:
        dims, elem = _dims_of(t)
        row = 32 * dims[-1]  # type: ignore[operator]
        if len(dims) == 1:
            copy = f"PUSH {row} PUSH {head} PUSH1 0x40 MLOAD CALLDATACOPY"
        elif len(dims) == 2:
            loop, end = self.lab("loop"), self.lab("end")
            copy = (
                f"PUSH1 0 {loop}: DUP1 PUSH {dims[0]} SWAP1 LT ISZERO PUSH2 @{end} JUMPI "
                f"PUSH {row} DUP2 PUSH {row} MUL PUSH {head} ADD "
                f"DUP3 PUSH {row} MUL PUSH1 0x40 MLOAD ADD CALLDATACOPY "
                f"DUP1 PUSH {row} MUL PUSH1 0x40 MLOAD ADD MLOAD {self.use(elem)} "
                f"PUSH1 1 ADD PUSH2 @{loop} JUMP {end}: POP"
            )
            return f"{copy} {_bump(32 * dims[0] * dims[1])}"  # type: ignore[operator]
        else:
            raise UnsupportedCombination("public static arrays above two dimensions")
        return f"{copy} PUSH1 0x40 MLOAD MLOAD {self.use(elem)} {_bump(row)}"

    # dynamic --------------------------------------------------------------

    @staticmethod
    def _offset_and_num(head: int) -> str:
        return f"PUSH {head} CALLDATALOAD DUP1 PUSH1 4 ADD CALLDATALOAD"

    def dyn_array_external(self, t: AbiType, head: int) -> str:
        dims, elem = _dims_of(t)
        strides = _strides(dims)
        ok = self.lab("ok")
        code = [self._offset_and_num(head), f"PUSH1 1 SWAP1 DUP2 LT PUSH2 @{ok} JUMPI INVALID {ok}:",
                f"PUSH {strides[0]} MUL"]
        for d, stride in zip(dims[1:], strides[1:]):
            code.append(_bound_check(0, d, self.lab))  # type: ignore[arg-type]
            code.append(f"PUSH {stride} MUL ADD")
        code.append(f"DUP2 ADD PUSH1 0x24 ADD CALLDATALOAD {self.use(elem)} POP")
        return " ".join(code)

    def dyn_array_public(self, t: AbiType, head: int) -> str:
        dims, elem = _dims_of(t)
        if len(dims) == 1:
            ok = self.lab("ok")
            return (
                f"{self._offset_and_num(head)} PUSH1 0x40 MLOAD DUP2 PUSH1 0x20 MUL "
                f"DUP1 DUP5 PUSH1 0x24 ADD DUP4 PUSH1 0x20 ADD CALLDATACOPY POP "
                f"PUSH1 0 DUP3 DUP2 LT PUSH2 @{ok} JUMPI INVALID {ok}: "
                f"PUSH1 0x20 MUL DUP2 ADD PUSH1 0x20 ADD MLOAD {self.use(elem)} POP POP POP "
                f"{_bump_by_num(head, 32, 32)}"
            )
        if any(d is None for d in dims[1:]) or len(dims) != 2:
            raise UnsupportedCombination("public dynamic arrays support one static inner dimension")
        row = 32 * dims[1]  # type: ignore[operator]
        loop, end = self.lab("loop"), self.lab("end")
        return (
            f"{self._offset_and_num(head)} PUSH1 0 {loop}: DUP2 DUP2 LT ISZERO PUSH2 @{end} JUMPI "
            f"PUSH {row} DUP2 PUSH {row} MUL DUP5 ADD PUSH1 0x24 ADD "
            f"DUP3 PUSH {row} MUL PUSH1 0x40 MLOAD ADD CALLDATACOPY "
            f"DUP1 PUSH {row} MUL PUSH1 0x40 MLOAD ADD MLOAD {self.use(elem)} "
            f"PUSH1 1 ADD PUSH2 @{loop} JUMP {end}: POP POP POP {_bump_by_num(head, row, 0)}"
        )

    def bytes_external(self, t: AbiType, head: int) -> str:
        if isinstance(t, String):
            return f"{self._offset_and_num(head)} PUSH1 0 SSTORE POP"
        ok = self.lab("ok")
        return (
            f"{self._offset_and_num(head)} PUSH1 5 SWAP1 DUP2 LT PUSH2 @{ok} JUMPI INVALID {ok}: "
            f"DUP2 ADD PUSH1 0x24 ADD CALLDATALOAD PUSH1 0 BYTE PUSH1 0 SSTORE POP"
        )

    def bytes_public(self, t: AbiType, head: int) -> str:
        code = (
            f"{self._offset_and_num(head)} DUP1 PUSH1 31 ADD PUSH1 32 SWAP1 DIV PUSH1 32 MUL "
            f"DUP3 PUSH1 0x24 ADD PUSH1 0x40 MLOAD PUSH1 0x20 ADD CALLDATACOPY POP POP"
        )
        if not isinstance(t, String):
            code += " PUSH1 0x41 PUSH1 0x40 MLOAD PUSH1 0x20 ADD MSTORE8"
        return f"{code} {_bump_by_num(head, 1, 63)}"

    def nested_array(self, t: AbiType, head: int) -> str:
        dims, elem = _dims_of(t)
        if len(dims) != 2 or dims[1] is not None:
            raise UnsupportedCombination("nested arrays support T[][] and T[][N]")
        ok1, ok2 = self.lab("ok"), self.lab("ok")
        if dims[0] is None:
            outer = (f"PUSH {head} CALLDATALOAD DUP1 PUSH1 4 ADD CALLDATALOAD "
                     f"PUSH1 1 SWAP1 DUP2 LT PUSH2 @{ok1} JUMPI INVALID {ok1}: "
                     f"PUSH1 0x20 MUL DUP2 ADD PUSH1 0x24 ADD CALLDATALOAD DUP2 PUSH1 0x24 ADD ADD")
        else:
            outer = (f"PUSH {head} CALLDATALOAD {_bound_check(0, dims[0], self.lab)} "
                     f"PUSH1 0x20 MUL DUP2 ADD PUSH1 4 ADD CALLDATALOAD DUP2 PUSH1 4 ADD ADD")
        return (f"{outer} DUP1 CALLDATALOAD PUSH1 1 SWAP1 DUP2 LT PUSH2 @{ok2} JUMPI INVALID {ok2}: "
                f"PUSH1 0x20 MUL ADD PUSH1 0x20 ADD CALLDATALOAD {self.use(elem)} POP")

    def struct(self, t: Tuple, head: int) -> str:
        members = t.members
        if not members or not isinstance(members[0], DynArray) or not all(m.is_word for m in members[1:]):
            raise UnsupportedCombination("structs support (T[], words...)")
        ok = self.lab("ok")
        elem = members[0].elem
        code = [
            f"PUSH {head} CALLDATALOAD DUP1 PUSH1 4 ADD DUP1 CALLDATALOAD DUP2 ADD DUP1 CALLDATALOAD",
            f"PUSH1 1 SWAP1 DUP2 LT PUSH2 @{ok} JUMPI INVALID {ok}:",
            f"PUSH1 0x20 MUL ADD PUSH1 0x20 ADD CALLDATALOAD {self.use(elem)}",
        ]
        for k, m in enumerate(members[1:], start=1):
            code.append(f"DUP1 PUSH {32 * k} ADD CALLDATALOAD {self.use(m)}")
        code.append("POP POP")
        return " ".join(code)

    def vyper_bytes(self, t: AbiType, head: int) -> str:
        n = t.max_len  # type: ignore[attr-defined]
        base = 0x140 + 0x100 * ((head - 4) // 32)  # one reserved slot per parameter
        code = f"PUSH {head} CALLDATALOAD PUSH1 4 ADD PUSH {32 + n} SWAP1 PUSH2 {hex(base)} CALLDATACOPY"
        if isinstance(t, VyperBytes):
            code += f" PUSH2 {hex(base + 0x20)} MLOAD PUSH1 0 BYTE PUSH1 0 SSTORE"
        return code

    def param(self, t: AbiType, head: int) -> str:
        if t.is_word:
            return self.word(t, head)
        if isinstance(t, (VyperBytes, VyperString)):
            return self.vyper_bytes(t, head)
        if isinstance(t, Bytes):
            return self.bytes_public(t, head) if self.mode == "public" else self.bytes_external(t, head)
        if isinstance(t, Tuple):
            return self.struct(t, head)
        dims, elem = _dims_of(t)
        if not elem.is_word:
            raise UnsupportedCombination(f"array items must be words: {t}")
        if len(dims) >= 2 and dims[-1] is None:
            return self.nested_array(t, head)
        if None not in dims:
            if self.mode == "public":
                return self.static_array_public(t, head)
            return self.static_array_external(t, head)
        if dims[0] is None and None not in dims[1:]:
            if self.mode == "public":
                return self.dyn_array_public(t, head)
            return self.dyn_array_external(t, head)
        raise UnsupportedCombination(f"no accessor for {t}")


# contracts -------------------------------------------------------------------


def _solidity_contract(functions: Sequence[tuple[int, str]], dispatch: str = "shr") -> str:
    head = "PUSH1 0x80 PUSH1 0x40 MSTORE PUSH1 4 CALLDATASIZE LT PUSH2 @fallback JUMPI "
    if dispatch == "div":
        head += f"PUSH1 0 CALLDATALOAD PUSH29 {hex(1 << 224)} SWAP1 DIV PUSH4 0xffffffff AND "
    else:
        head += "PUSH1 0 CALLDATALOAD PUSH1 0xe0 SHR "
    sels = [f"DUP1 PUSH4 {hex(sel)} EQ PUSH2 @fn_{i} JUMPI" for i, (sel, _) in enumerate(functions)]
    if dispatch == "bsearch" and len(functions) >= 2:
        order = sorted(range(len(functions)), key=lambda i: functions[i][0])
        half = len(order) // 2
        pivot = functions[order[half]][0]
        low = " ".join(sels[i] for i in order[:half])
        high = " ".join(sels[i] for i in order[half:])
        head += f"DUP1 PUSH4 {hex(pivot)} GT PUSH2 @low JUMPI {high} PUSH2 @fallback JUMP low: {low} "
    else:
        head += " ".join(sels) + " "
    body = " ".join(f"fn_{i}: {code} STOP" for i, (_, code) in enumerate(functions))
    return head + "fallback: PUSH1 0 DUP1 REVERT " + body


def _vyper_contract(functions: Sequence[tuple[int, str]]) -> str:
    code = [
        "PUSH1 0 CALLDATALOAD PUSH1 0x1c MSTORE",
        f"PUSH {hex(1 << 160)} PUSH1 0x20 MSTORE",
        f"PUSH {hex(2**127 - 1)} PUSH1 0x40 MSTORE",
        f"PUSH32 {hex((1 << 256) - 2**127)} PUSH1 0x60 MSTORE",
        f"PUSH {hex((2**127 - 1) * 10**10)} PUSH1 0x80 MSTORE",
        f"PUSH32 {hex((1 << 256) - 2**127 * 10**10)} PUSH1 0xa0 MSTORE",
    ]
    for i, (sel, body) in enumerate(functions):
        code.append(f"PUSH4 {hex(sel)} PUSH1 0 MLOAD EQ ISZERO PUSH2 @next_{i} JUMPI {body} STOP next_{i}:")
    code.append("PUSH1 0 DUP1 REVERT fail: PUSH1 0 DUP1 REVERT")
    return " ".join(code)


def function_body(params: Sequence[AbiType], dialect: str = "solidity", mode: str = "external",
                  signed_op: str = "SDIV", lab: _Labels | None = None) -> str:
    lab = lab or _Labels()
    if dialect == "vyper":
        acc = Accessor(lab, lambda t: vyper_use(t, "fail"), "external")
    else:
        acc = Accessor(lab, lambda t: solidity_use(t, signed_op), mode)
    parts = []
    head = 4
    for t in params:
        parts.append(acc.param(t, head))
        head += t.head_size
    return " ".join(parts)


def build_fixture(
    name: str,
    params: Sequence[AbiType],
    rules: Sequence[str],
    dialect: str = "solidity",
    mode: str = "external",
    dispatch: str = "shr",
    signed_op: str = "SDIV",
    notes: Sequence[str] = (),
    decoys: int = 0,
) -> Fixture:
    """Assemble a single-function contract for ``params``.

    ``decoys`` adds that many extra dispatcher comparisons whose targets
    are the fallback, so only one function entry is real.
    """
    fname = name.replace("-", "_")
    sel = int.from_bytes(compute_selector(f"{fname}({','.join(p.canonical() for p in params)})"), "big")
    body = function_body(params, dialect, mode, signed_op)
    if dialect == "vyper":
        src = _vyper_contract([(sel, body)])
    else:
        src = _solidity_contract([(sel, body)], dispatch)
    truth = FunctionSignature(sel, list(params), dialect)
    return Fixture(name, truth, assemble_source(src), frozenset(rules), tuple(notes), src)


def build_contract(functions: Sequence[tuple[str, Sequence[AbiType]]], dialect: str = "solidity",
                   mode: str = "external", dispatch: str = "shr") -> tuple[bytes, list[FunctionSignature]]:
    """Assemble a contract with several functions; returns bytecode and truths."""
    lab = _Labels()
    entries = []
    truths = []
    for name, params in functions:
        sel = int.from_bytes(compute_selector(f"{name}({','.join(p.canonical() for p in params)})"), "big")
        entries.append((sel, function_body(params, dialect, mode, lab=lab)))
        truths.append(FunctionSignature(sel, list(params), dialect))
    src = _vyper_contract(entries) if dialect == "vyper" else _solidity_contract(entries, dispatch)
    return assemble_source(src), truths


# templates ------------------------------------------------------------------------

TEMPLATES: dict[str, Callable[..., Fixture]] = {}


def _template(tid: str):
    def deco(fn):
        TEMPLATES[tid] = fn
        return fn
    return deco


@_template("uintM-mask")
def _t_uint(M: int = 256, **kw) -> Fixture:
    rules = ["R4"] if M == 256 else ["R4", "R11"]
    return build_fixture(f"uint{M}_mask", [UInt(M)], rules, **kw)


@_template("bytesM-mask")
def _t_bytesn(M: int = 4, **kw) -> Fixture:
    if M == 32:
        raise UnsupportedCombination("bytes32 has no mask; use bytes32-byteop")
    return build_fixture(f"bytes{M}_mask", [BytesN(M)], ["R4", "R12"], **kw)


@_template("intM-signextend")
def _t_int(M: int = 8, **kw) -> Fixture:
    if M == 256:
        raise UnsupportedCombination("int256 is not sign-extended; use signed-op")
    return build_fixture(f"int{M}_signextend", [Int(M)], ["R4", "R13"], **kw)


@_template("bool-iszero2")
def _t_bool(**kw) -> Fixture:
    return build_fixture("bool_iszero2", [Bool()], ["R4", "R14"], **kw)


@_template("signed-op")
def _t_signed(op: str = "SDIV", **kw) -> Fixture:
    return build_fixture(f"int256_{op.lower()}", [Int(256)], ["R4", "R15"], signed_op=op, **kw)


@_template("address-no-math")
def _t_address(**kw) -> Fixture:
    return build_fixture("address_no_math", [Address()], ["R4", "R11", "R16"], **kw)


@_template("bytes-byteop")
def _t_bytes(mode: str = "external", **kw) -> Fixture:
    rules = ["R1", "R17"] + (["R5", "R8"] if mode == "public" else [])
    return build_fixture(f"bytes_{mode}", [Bytes()], rules, mode=mode, **kw)


@_template("string-plain")
def _t_string(mode: str = "external", **kw) -> Fixture:
    rules = ["R1"] + (["R5", "R8"] if mode == "public" else [])
    return build_fixture(f"string_{mode}", [String()], rules, mode=mode, notes=("bytes-or-string",), **kw)


@_template("bytes32-byteop")
def _t_bytes32(**kw) -> Fixture:
    return build_fixture("bytes32_byteop", [BytesN(32)], ["R4", "R18"], **kw)


@_template("static-array-external")
def _t_static_ext(dims: Sequence[int] = (3,), elem: AbiType = UInt(), **kw) -> Fixture:
    t = _array(elem, dims)
    return build_fixture(f"static_ext_{_dname(dims, elem)}", [t], ["R3"], **kw)


@_template("static-array-public")
def _t_static_pub(dims: Sequence[int] = (3,), elem: AbiType = UInt(), **kw) -> Fixture:
    t = _array(elem, dims)
    return build_fixture(f"static_pub_{_dname(dims, elem)}", [t], ["R6"] if len(dims) == 1 else ["R9"], mode="public", **kw)


@_template("dyn-array-public")
def _t_dyn_pub(inner: Sequence[int] = (), elem: AbiType = UInt(), **kw) -> Fixture:
    if None in inner:
        raise UnsupportedCombination("dyn-array-public takes static inner dimensions; use nested-array")
    t = _array(elem, [None, *inner])
    rules = ["R1", "R5", "R7"] if not inner else ["R1", "R10"]
    return build_fixture(f"dyn_pub_{_dname([None, *inner], elem)}", [t], rules, mode="public", **kw)


@_template("dyn-array-external")
def _t_dyn_ext(inner: Sequence[int] = (), elem: AbiType = UInt(), **kw) -> Fixture:
    t = _array(elem, [None, *inner])
    return build_fixture(f"dyn_ext_{_dname([None, *inner], elem)}", [t], ["R1", "R2"], **kw)


@_template("nested-array")
def _t_nested(outer: int | None = None, elem: AbiType = UInt(), **kw) -> Fixture:
    t = _array(elem, [outer, None])
    return build_fixture(f"nested_{_dname([outer, None], elem)}", [t], ["R19", "R22"], **kw)


@_template("struct")
def _t_struct(elem: AbiType = UInt(), rest: Sequence[AbiType] = (UInt(),), **kw) -> Fixture:
    t = Tuple((DynArray(elem), *rest))
    return build_fixture("struct_dyn", [t], ["R19", "R21"], **kw)


@_template("vyper-word")
def _t_vyper_word(t: AbiType = UInt(), **kw) -> Fixture:
    rule = {Address: "R27", Int: "R28", Decimal: "R29", Bool: "R30", BytesN: "R31"}.get(type(t))
    rules = ["R20", "R25"] + ([rule] if rule else [])
    return build_fixture(f"vyper_{t}", [t], rules, dialect="vyper", **kw)


@_template("vyper-list")
def _t_vyper_list(dims: Sequence[int] = (3,), elem: AbiType = UInt(), **kw) -> Fixture:
    return build_fixture(f"vyper_list_{_dname(dims)}", [_array(elem, dims)], ["R20", "R24"], dialect="vyper", **kw)


@_template("vyper-bytes")
def _t_vyper_bytes(max_len: int = 40, string: bool = False, **kw) -> Fixture:
    t = VyperString(max_len) if string else VyperBytes(max_len)
    rules = ["R20", "R23"] + ([] if string else ["R26"])
    notes = ("bytes-or-string",) if string else ()
    return build_fixture(f"vyper_{'string' if string else 'bytes'}_{max_len}", [t], rules,
                         dialect="vyper", notes=notes, **kw)


@_template("bytes-public")
def _t_bytes_public(string: bool = False, **kw) -> Fixture:
    return _t_string(mode="public", **kw) if string else _t_bytes(mode="public", **kw)


@_template("vyper-refinements")
def _t_vyper_refine(t: AbiType = Address(), **kw) -> Fixture:
    if isinstance(t, UInt):
        raise UnsupportedCombination("uint256 has no Vyper refinement; use vyper-prologue+word")
    return _t_vyper_word(t=t, **kw)


TEMPLATES["bool-iszero\u00b2"] = _t_bool
TEMPLATES["vyper-prologue+word"] = _t_vyper_word


def _array(elem: AbiType, dims: Sequence[int | None]) -> AbiType:
    from .abi import array_of

    return array_of(elem, list(dims))


def _dname(dims: Sequence[int | None], elem: AbiType = UInt()) -> str:
    shape = "x".join("d" if d is None else str(d) for d in dims)
    return shape if elem == UInt() else f"{elem}_{shape}"


def assemble(template: str, **params: Any) -> Fixture:
    """Build a fixture from template ``template`` with type parameters."""
    if template not in TEMPLATES:
        raise UnsupportedCombination(f"unknown template {template!r}")
    try:
        return TEMPLATES[template](**params)
    except TypeError as exc:
        raise UnsupportedCombination(str(exc)) from None


# corpus -------------------------------------------------------------------------


def worked_example() -> Fixture:
    """test(uint8[] values, address to), public: the worked example."""
    return build_fixture("test", [DynArray(UInt(8)), Address()], ["R1", "R4", "R5", "R7", "R11", "R16"], mode="public")


def static_matrix_example() -> Fixture:
    """External uint256[3][2], reading x[1][0] behind two bound checks."""
    return build_fixture("static_matrix", [StaticArray(StaticArray(UInt(), 3), 2)], ["R3"])


def dynamic_rows_example() -> Fixture:
    """External uint256[3][], reading x[1][0] behind two bound checks."""
    return build_fixture("dynamic_rows", [DynArray(StaticArray(UInt(), 3))], ["R1", "R2"])


def _pad_to(src: str, offset: int) -> str:
    size = len(assemble_source(src))
    if size > offset:
        raise UnsupportedCombination(f"prologue is {size} bytes, past {offset:#x}")
    return src + " INVALID" * (offset - size)


def div_dispatch_example() -> bytes:
    """Solidity dispatch with the DIV selector form; selector 0x16d93ade enters at 0x55."""
    head = (f"PUSH1 0x80 PUSH1 0x40 MSTORE PUSH1 0 CALLDATALOAD PUSH29 {hex(1 << 224)} SWAP1 DIV "
            "PUSH4 0xffffffff AND PUSH4 0x16d93ade DUP2 EQ PUSH1 0x55 JUMPI PUSH1 0 DUP1 REVERT")
    return assemble_source(_pad_to(head, 0x55) + " JUMPDEST PUSH1 4 CALLDATALOAD PUSH1 0 SSTORE STOP")


def vyper_dispatch_example() -> bytes:
    """Vyper dispatch: selector 0xd178231c, entry right after the JUMPI, next test at 0x043c."""
    head = ("PUSH1 0 CALLDATALOAD PUSH1 0x1c MSTORE "
            "PUSH4 0xd178231c PUSH1 0x00 MLOAD EQ ISZERO PUSH2 0x043c JUMPI "
            "PUSH1 4 CALLDATALOAD PUSH1 0 SSTORE STOP")
    return assemble_source(_pad_to(head, 0x043C) + " JUMPDEST PUSH1 0 DUP1 REVERT")


def corpus() -> list[Fixture]:
    """The shipped fixture corpus."""
    fx = [worked_example(), static_matrix_example(), dynamic_rows_example()]
    for m in (8, 16, 32, 64, 128, 160, 256):
        fx.append(assemble("uintM-mask", M=m))
    fx.append(assemble("uintM-mask", M=32, dispatch="div"))
    fx[-1].name = "uint32_mask_div_dispatch"
    for m in (1, 4, 20):
        fx.append(assemble("bytesM-mask", M=m))
    for m in (8, 16, 64, 128):
        fx.append(assemble("intM-signextend", M=m))
    fx.append(assemble("bool-iszero2"))
    for op in ("SDIV", "SMOD", "SLT", "SGT"):
        fx.append(assemble("signed-op", op=op))
    fx.append(assemble("address-no-math"))
    fx.append(assemble("bytes32-byteop"))
    fx.append(assemble("bytes-byteop", mode="external"))
    fx.append(assemble("bytes-byteop", mode="public"))
    fx.append(assemble("string-plain", mode="external"))
    fx.append(assemble("string-plain", mode="public"))
    fx.append(assemble("static-array-external", dims=(3,)))
    fx.append(assemble("static-array-external", dims=(2,), elem=Address()))
    fx[-1].rules_exercised |= {"R11", "R16"}
    fx.append(assemble("static-array-external", dims=(2, 2, 2)))
    fx.append(assemble("static-array-public", dims=(4,)))
    fx.append(assemble("static-array-public", dims=(2, 3), elem=UInt(8)))
    fx[-1].rules_exercised |= {"R11"}
    fx.append(assemble("dyn-array-public"))
    fx.append(assemble("dyn-array-public", elem=Bool()))
    fx[-1].rules_exercised |= {"R14"}
    fx.append(assemble("dyn-array-public", inner=(3,)))
    fx.append(assemble("dyn-array-external"))
    fx.append(assemble("dyn-array-external", elem=Int(8)))
    fx[-1].rules_exercised |= {"R13"}
    fx.append(assemble("dyn-array-external", elem=BytesN(4)))
    fx[-1].rules_exercised |= {"R12"}
    fx.append(assemble("nested-array"))
    fx.append(assemble("nested-array", outer=2))
    fx.append(assemble("struct"))
    fx.append(assemble("struct", rest=(Address(), Bool())))
    fx[-1].name = "struct_dyn_address_bool"
    fx[-1].rules_exercised |= {"R4", "R11", "R14", "R16"}
    fx.append(build_fixture("three_words", [UInt(), Address(), Bool()], ["R4", "R11", "R14", "R16"],
                            notes=("flattened-struct",)))
    fx.append(build_fixture("mixed_external", [Address(), DynArray(UInt()), BytesN(32), StaticArray(UInt(16), 2)],
                            ["R1", "R2", "R3", "R4", "R11", "R16", "R18"], notes=("flattened-struct",)))
    fx.append(build_fixture("mixed_bsearch", [Int(32), Bytes()], ["R1", "R4", "R13", "R17"], dispatch="bsearch"))
    for t in (UInt(), Address(), Int(128), Decimal(), Bool(), BytesN(32)):
        fx.append(assemble("vyper-word", t=t))
    fx.append(assemble("vyper-list", dims=(3,)))
    fx.append(assemble("vyper-list", dims=(2,), elem=Address()))
    fx[-1].rules_exercised |= {"R27"}
    fx.append(assemble("vyper-bytes", max_len=40))
    fx.append(assemble("vyper-bytes", max_len=64, string=True))
    fx.append(build_fixture("vyper_mixed", [Address(), Int(128), Bool(), UInt()],
                            ["R20", "R25", "R27", "R28", "R30"], dialect="vyper", notes=("flattened-struct",)))
    return fx


def scaling_fixture(n: int) -> Fixture:
    """An external n-dimensional static array with two items per dimension."""
    return assemble("static-array-external", dims=(2,) * n)


def dump_corpus(path: str, fixtures: Sequence[Fixture] | None = None) -> None:
    with open(path, "w") as fh:
        json.dump([f.to_json() for f in (fixtures or corpus())], fh, indent=1)


def load_corpus(path: str | None = None) -> list[Fixture]:
    """Read a dumped corpus; without ``path``, the copy shipped with the package."""
    if path is None:
        text = resources.files(__package__).joinpath("data/corpus.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return [Fixture.from_json(d) for d in json.loads(text)]
