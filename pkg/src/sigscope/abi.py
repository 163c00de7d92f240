"""ABI type model, selector hashing, calldata encoding and field location."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Sequence

from Crypto.Hash import keccak


class MalformedSignature(ValueError):
    pass


class ValueOutOfRange(ValueError):
    pass


class TooShort(ValueError):
    pass


# types -----------------------------------------------------------------------


class AbiType:
    """Base class for parameter types.

    ``str(t)`` is the printed form. ``t.canonical()`` is the form used when
    hashing a signature; the two differ only for Vyper types.
    """

    def canonical(self) -> str:
        return str(self)

    @property
    def is_dynamic(self) -> bool:
        return False

    @property
    def head_size(self) -> int:
        return 32

    @property
    def is_word(self) -> bool:
        """True for types that occupy one padded 32-byte word."""
        return True


@dataclass(frozen=True)
class UInt(AbiType):
    bits: int = 256

    def __post_init__(self) -> None:
        if self.bits % 8 or not 8 <= self.bits <= 256:
            raise MalformedSignature(f"bad uint width {self.bits}")

    def __str__(self) -> str:
        return f"uint{self.bits}"


@dataclass(frozen=True)
class Int(AbiType):
    bits: int = 256

    def __post_init__(self) -> None:
        if self.bits % 8 or not 8 <= self.bits <= 256:
            raise MalformedSignature(f"bad int width {self.bits}")

    def __str__(self) -> str:
        return f"int{self.bits}"


@dataclass(frozen=True)
class Address(AbiType):
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class Bool(AbiType):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class BytesN(AbiType):
    size: int = 32

    def __post_init__(self) -> None:
        if not 1 <= self.size <= 32:
            raise MalformedSignature(f"bad bytes width {self.size}")

    def __str__(self) -> str:
        return f"bytes{self.size}"


@dataclass(frozen=True)
class Decimal(AbiType):
    """Vyper decimal: a signed fixed-point word scaled by 10**10."""

    SCALE = 10**10
    MAX = (2**127 - 1) * 10**10
    MIN = -(2**127) * 10**10

    def __str__(self) -> str:
        return "decimal"

    def canonical(self) -> str:
        return "fixed168x10"


@dataclass(frozen=True)
class Bytes(AbiType):
    def __str__(self) -> str:
        return "bytes"

    @property
    def is_dynamic(self) -> bool:
        return True

    @property
    def is_word(self) -> bool:
        return False


@dataclass(frozen=True)
class String(Bytes):
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class VyperBytes(Bytes):
    max_len: int = 32

    def __str__(self) -> str:
        return f"Bytes[{self.max_len}]"

    def canonical(self) -> str:
        return "bytes"


@dataclass(frozen=True)
class VyperString(Bytes):
    max_len: int = 32

    def __str__(self) -> str:
        return f"String[{self.max_len}]"

    def canonical(self) -> str:
        return "string"


@dataclass(frozen=True)
class StaticArray(AbiType):
    elem: AbiType
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise MalformedSignature("static array length must be positive")

    def __str__(self) -> str:
        return f"{self.elem}[{self.count}]"

    def canonical(self) -> str:
        return f"{self.elem.canonical()}[{self.count}]"

    @property
    def is_dynamic(self) -> bool:
        return self.elem.is_dynamic

    @property
    def head_size(self) -> int:
        return 32 if self.is_dynamic else self.count * self.elem.head_size

    @property
    def is_word(self) -> bool:
        return False


@dataclass(frozen=True)
class DynArray(AbiType):
    elem: AbiType

    def __str__(self) -> str:
        return f"{self.elem}[]"

    def canonical(self) -> str:
        return f"{self.elem.canonical()}[]"

    @property
    def is_dynamic(self) -> bool:
        return True

    @property
    def is_word(self) -> bool:
        return False


@dataclass(frozen=True)
class Tuple(AbiType):
    members: tuple[AbiType, ...]

    def __str__(self) -> str:
        return "(" + ",".join(str(m) for m in self.members) + ")"

    def canonical(self) -> str:
        return "(" + ",".join(m.canonical() for m in self.members) + ")"

    @property
    def is_dynamic(self) -> bool:
        return any(m.is_dynamic for m in self.members)

    @property
    def head_size(self) -> int:
        return 32 if self.is_dynamic else sum(m.head_size for m in self.members)

    @property
    def is_word(self) -> bool:
        return False


def array_of(elem: AbiType, dims: Sequence[int | None]) -> AbiType:
    """Wrap ``elem`` in arrays. ``dims`` lists sizes outermost first, None for dynamic.

    ``array_of(UInt(), [2, 3])`` is ``uint256[3][2]``: two rows of three.
    """
    t = elem
    for d in reversed(list(dims)):
        t = DynArray(t) if d is None else StaticArray(t, d)
    return t


# parsing ---------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_BASE = re.compile(r"[A-Za-z][A-Za-z0-9]*")


def _parse_base(name: str) -> AbiType:
    if name == "address":
        return Address()
    if name == "bool":
        return Bool()
    if name == "bytes":
        return Bytes()
    if name == "string":
        return String()
    if name in ("decimal", "fixed168x10"):
        return Decimal()
    if name in ("uint", "int"):
        return UInt() if name == "uint" else Int()
    m = re.fullmatch(r"(u?int)(\d+)", name)
    if m:
        bits = int(m.group(2))
        return UInt(bits) if m.group(1) == "uint" else Int(bits)
    m = re.fullmatch(r"bytes(\d+)", name)
    if m:
        return BytesN(int(m.group(1)))
    raise MalformedSignature(f"unknown type {name!r}")


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise MalformedSignature(f"expected {ch!r} at {self.pos} in {self.text!r}")
        self.pos += 1

    def type_list(self, close: str) -> list[AbiType]:
        out: list[AbiType] = []
        if self.peek() == close:
            return out
        while True:
            out.append(self.type())
            if self.peek() == ",":
                self.pos += 1
                continue
            return out

    def number(self) -> int:
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            raise MalformedSignature(f"expected a number at {self.pos} in {self.text!r}")
        self.pos = m.end()
        return int(m.group())

    def type(self) -> AbiType:
        t: AbiType
        if self.peek() == "(":
            self.pos += 1
            members = self.type_list(")")
            self.expect(")")
            t = Tuple(tuple(members))
        else:
            m = _BASE.match(self.text, self.pos)
            if not m:
                raise MalformedSignature(f"expected a type at {self.pos} in {self.text!r}")
            self.pos = m.end()
            name = m.group()
            if name in ("Bytes", "String"):
                self.expect("[")
                n = self.number()
                self.expect("]")
                t = VyperBytes(n) if name == "Bytes" else VyperString(n)
            else:
                t = _parse_base(name)
        while self.peek() == "[":
            self.pos += 1
            if self.peek() == "]":
                self.pos += 1
                t = DynArray(t)
            else:
                n = self.number()
                self.expect("]")
                t = StaticArray(t, n)
        return t


def parse_type(text: str) -> AbiType:
    p = _Parser(text)
    t = p.type()
    if p.pos != len(text):
        raise MalformedSignature(f"trailing text in {text!r}")
    return t


def parse_type_list(text: str) -> list[AbiType]:
    """Parse ``"T1,T2,..."`` (without the surrounding parentheses)."""
    p = _Parser(text)
    out = p.type_list("")
    if p.pos != len(text):
        raise MalformedSignature(f"trailing text in {text!r}")
    return out


def format_types(params: Sequence[AbiType]) -> str:
    return ",".join(str(p) for p in params)


# selectors -------------------------------------------------------------------


def keccak256(data: bytes) -> bytes:
    h = keccak.new(digest_bits=256)
    h.update(data)
    return h.digest()


def split_signature(text: str) -> tuple[str, list[AbiType]]:
    m = _IDENT.match(text)
    if not m or m.end() >= len(text) or text[m.end()] != "(" or not text.endswith(")"):
        raise MalformedSignature(f"not a function signature: {text!r}")
    return m.group(), parse_type_list(text[m.end() + 1 : -1])


def compute_selector(signature: str) -> bytes:
    """First four bytes of Keccak-256 over a canonical ``name(type,...)`` string."""
    if not signature or any(c.isspace() for c in signature):
        raise MalformedSignature(f"not canonical: {signature!r}")
    name, params = split_signature(signature)
    canonical = f"{name}({','.join(p.canonical() for p in params)})"
    if canonical != signature:
        raise MalformedSignature(f"not canonical: {signature!r} (expected {canonical!r})")
    return keccak256(signature.encode())[:4]


# signatures ------------------------------------------------------------------


@dataclass
class FunctionSignature:
    selector: int
    params: list[AbiType] | None
    dialect: str = "solidity"
    notes: list[dict[str, Any]] = field(default_factory=list)
    rules: list[list[str]] = field(default_factory=list)

    @property
    def types_text(self) -> str | None:
        return None if self.params is None else format_types(self.params)

    def __str__(self) -> str:
        return f"0x{self.selector:08x}({self.types_text if self.params is not None else '?'})"

    def to_json(self) -> dict[str, Any]:
        return {
            "selector": f"0x{self.selector:08x}",
            "signature": str(self) if self.params is not None else None,
            "types": self.types_text,
            "dialect": self.dialect,
            "notes": self.notes,
            "rules": self.rules,
        }


def parse_signature(text: str) -> FunctionSignature:
    """Parse ``0x12345678(types)`` or ``name(types)``."""
    text = text.strip()
    m = re.fullmatch(r"0x([0-9a-fA-F]{8})\((.*)\)", text)
    if m:
        return FunctionSignature(int(m.group(1), 16), parse_type_list(m.group(2)))
    name, params = split_signature(text)
    sel = compute_selector(f"{name}({','.join(p.canonical() for p in params)})")
    return FunctionSignature(int.from_bytes(sel, "big"), params)


# encoding --------------------------------------------------------------------

Region = tuple[int, int, str]


def _word(v: int) -> bytes:
    return (v % (1 << 256)).to_bytes(32, "big")


def _encode_word(t: AbiType, v: Any) -> tuple[bytes, list[Region]]:
    if isinstance(t, UInt):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < 1 << t.bits:
            raise ValueOutOfRange(f"{v!r} does not fit {t}")
        pad = 32 - t.bits // 8
        return _word(v), [(0, pad, "pad"), (pad, 32, "value")]
    if isinstance(t, Int):
        if not isinstance(v, int) or not -(1 << (t.bits - 1)) <= v < 1 << (t.bits - 1):
            raise ValueOutOfRange(f"{v!r} does not fit {t}")
        pad = 32 - t.bits // 8
        return _word(v), [(0, pad, "pad"), (pad, pad + 1, "sign"), (pad + 1, 32, "value")]
    if isinstance(t, Address):
        if isinstance(v, (bytes, bytearray)):
            if len(v) != 20:
                raise ValueOutOfRange("address must be 20 bytes")
            v = int.from_bytes(v, "big")
        if not isinstance(v, int) or not 0 <= v < 1 << 160:
            raise ValueOutOfRange(f"{v!r} is not an address")
        return _word(v), [(0, 12, "pad"), (12, 32, "value")]
    if isinstance(t, Bool):
        if v not in (0, 1):
            raise ValueOutOfRange(f"{v!r} is not a bool")
        return _word(int(v)), [(0, 31, "pad"), (31, 32, "bool")]
    if isinstance(t, BytesN):
        if not isinstance(v, (bytes, bytearray)) or len(v) != t.size:
            raise ValueOutOfRange(f"{v!r} does not fit {t}")
        return bytes(v).ljust(32, b"\x00"), [(0, t.size, "value"), (t.size, 32, "pad")]
    if isinstance(t, Decimal):
        if not isinstance(v, int) or not Decimal.MIN <= v <= Decimal.MAX:
            raise ValueOutOfRange(f"{v!r} is outside the decimal range")
        # bits 168.. must be pure sign extension; byte 11 straddles the range limit
        return _word(v), [(0, 11, "pad"), (11, 12, "range"), (12, 32, "value")]
    raise TypeError(f"not a word type: {t}")


def _shift(regions: list[Region], by: int) -> list[Region]:
    return [(a + by, b + by, k) for a, b, k in regions]


def _encode_sequence(types: Sequence[AbiType], values: Sequence[Any]) -> tuple[bytes, list[Region]]:
    if len(types) != len(values):
        raise ValueOutOfRange(f"expected {len(types)} values, got {len(values)}")
    head_len = sum(t.head_size for t in types)
    head = bytearray()
    tail = bytearray()
    head_regions: list[Region] = []
    tail_regions: list[Region] = []
    for t, v in zip(types, values):
        if t.is_dynamic:
            head_regions.append((len(head), len(head) + 32, "offset"))
            head += _word(head_len + len(tail))
            enc, regs = _encode(t, v)
            tail_regions += _shift(regs, head_len + len(tail))
            tail += enc
        else:
            enc, regs = _encode(t, v)
            head_regions += _shift(regs, len(head))
            head += enc
    return bytes(head + tail), head_regions + tail_regions


def _encode(t: AbiType, v: Any) -> tuple[bytes, list[Region]]:
    if t.is_word:
        return _encode_word(t, v)
    if isinstance(t, Bytes):
        data = v.encode() if isinstance(v, str) else bytes(v)
        if isinstance(t, String) != isinstance(v, str) and not isinstance(t, (VyperBytes, VyperString)):
            raise ValueOutOfRange(f"{v!r} does not fit {t}")
        max_len = getattr(t, "max_len", None)
        if max_len is not None and len(data) > max_len:
            raise ValueOutOfRange(f"{len(data)} bytes exceed {t}")
        padded = -(-len(data) // 32) * 32
        regions: list[Region] = [(0, 32, "num"), (32, 32 + len(data), "value")]
        if padded > len(data):
            regions.append((32 + len(data), 32 + padded, "pad"))
        return _word(len(data)) + data.ljust(padded, b"\x00"), regions
    if isinstance(t, StaticArray):
        if len(v) != t.count:
            raise ValueOutOfRange(f"{t} needs {t.count} items, got {len(v)}")
        return _encode_sequence([t.elem] * t.count, v)
    if isinstance(t, DynArray):
        enc, regs = _encode_sequence([t.elem] * len(v), v)
        return _word(len(v)) + enc, [(0, 32, "num")] + _shift(regs, 32)
    if isinstance(t, Tuple):
        return _encode_sequence(t.members, v)
    raise TypeError(f"cannot encode {t}")


def _selector_bytes(selector: int | bytes) -> bytes:
    if isinstance(selector, int):
        return selector.to_bytes(4, "big")
    if len(selector) != 4:
        raise ValueOutOfRange("selector must be 4 bytes")
    return bytes(selector)


def encode_with_regions(
    selector: int | bytes, params: Sequence[AbiType], values: Sequence[Any]
) -> tuple[bytes, list[Region]]:
    """Encode calldata and return a map of byte regions by role.

    Region kinds: ``selector``, ``pad`` (must be zero or sign extension),
    ``value`` (free), ``sign`` (top value byte of a signed int), ``bool``,
    ``range`` (decimal boundary byte), ``offset`` and ``num``.
    """
    body, regions = _encode_sequence(list(params), list(values))
    return _selector_bytes(selector) + body, [(0, 4, "selector")] + _shift(regions, 4)


def encode_calldata(selector: int | bytes, params: Sequence[AbiType], values: Sequence[Any]) -> bytes:
    return encode_with_regions(selector, params, values)[0]


# field location ----------------------------------------------------------------


@dataclass
class Defect:
    param: int
    kind: str
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        return {"param": self.param, "kind": self.kind, "detail": self.detail}


@dataclass
class ParamLayout:
    index: int
    type: AbiType
    head_position: int
    offset_field: tuple[int, int] | None = None
    num_field: tuple[int, int] | None = None
    extent: tuple[int, int] = (0, 0)
    words: list[tuple[int, AbiType]] = field(default_factory=list)
    payloads: list[tuple[int, int, AbiType]] = field(default_factory=list)


@dataclass
class CalldataLayout:
    selector: int
    params: list[ParamLayout]
    defects: list[Defect]


class _Locator:
    def __init__(self, data: bytes, param: ParamLayout, defects: list[Defect]) -> None:
        self.data = data
        self.param = param
        self.defects = defects
        self.hi = param.head_position

    def word(self, pos: int) -> int | None:
        if pos + 32 > len(self.data):
            self.defect("truncated", f"word at {pos} runs past the end")
            return None
        self.hi = max(self.hi, pos + 32)
        return int.from_bytes(self.data[pos : pos + 32], "big")

    def defect(self, kind: str, detail: str) -> None:
        self.defects.append(Defect(self.param.index, kind, detail))

    def sequence(self, types: Sequence[AbiType], base: int, top: bool = False) -> bool:
        pos = base
        head_len = sum(t.head_size for t in types)
        for t in types:
            if t.is_dynamic:
                off = self.word(pos)
                if off is None:
                    return False
                target = base + off
                if top:
                    self.param.offset_field = (pos, off)
                if off < head_len:
                    self.defect("bad-structure", f"offset {off:#x} at {pos} points into the head")
                    return False
                if target >= len(self.data):
                    self.defect("dangling-offset", f"offset {off:#x} at {pos} points past the end")
                    return False
                if not self.value(t, target, top):
                    return False
            elif not self.value(t, pos, False):
                return False
            pos += t.head_size
        return True

    def value(self, t: AbiType, pos: int, top: bool) -> bool:
        if t.is_word:
            if self.word(pos) is None:
                return False
            self.param.words.append((pos, t))
            return True
        if isinstance(t, Bytes):
            n = self.word(pos)
            if n is None:
                return False
            if top:
                self.param.num_field = (pos, n)
            max_len = getattr(t, "max_len", None)
            if max_len is not None and n > max_len:
                self.defect("bad-structure", f"length {n} exceeds {t}")
                return False
            padded = -(-n // 32) * 32
            if pos + 32 + padded > len(self.data):
                self.defect("truncated", f"payload of {n} bytes at {pos + 32} runs past the end")
                return False
            self.hi = max(self.hi, pos + 32 + padded)
            self.param.payloads.append((pos + 32, n, t))
            return True
        if isinstance(t, StaticArray):
            return self.sequence([t.elem] * t.count, pos)
        if isinstance(t, DynArray):
            n = self.word(pos)
            if n is None:
                return False
            if top:
                self.param.num_field = (pos, n)
            if pos + 32 + n * t.elem.head_size > len(self.data):
                self.defect("truncated", f"{n} items at {pos + 32} run past the end")
                return False
            return self.sequence([t.elem] * n, pos + 32)
        if isinstance(t, Tuple):
            return self.sequence(list(t.members), pos)
        raise TypeError(f"cannot locate {t}")


def locate_fields(calldata: bytes, params: Sequence[AbiType]) -> CalldataLayout:
    """Walk the head and tail of ``calldata`` for ``params``.

    Structural problems are collected as defects rather than raised, so a
    damaged encoding still yields whatever fields could be located.
    """
    if len(calldata) < 4:
        raise TooShort(f"calldata has {len(calldata)} bytes, need at least 4")
    selector = int.from_bytes(calldata[:4], "big")
    defects: list[Defect] = []
    out: list[ParamLayout] = []
    pos = 4
    head_len = sum(t.head_size for t in params)
    for i, t in enumerate(params):
        layout = ParamLayout(i, t, pos)
        loc = _Locator(calldata, layout, defects)
        if t.is_dynamic:
            off = loc.word(pos)
            if off is not None:
                layout.offset_field = (pos, off)
                if off < head_len:
                    loc.defect("bad-structure", f"offset {off:#x} points into the head")
                elif 4 + off >= len(calldata):
                    loc.defect("dangling-offset", f"offset {off:#x} points past the end")
                else:
                    loc.value(t, 4 + off, True)
            start = 4 + layout.offset_field[1] if layout.offset_field else pos
        else:
            loc.value(t, pos, False)
            start = pos
        layout.extent = (start, max(loc.hi, start))
        out.append(layout)
        pos += t.head_size
    return CalldataLayout(selector, out, defects)
