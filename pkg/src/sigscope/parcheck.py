"""Calldata validation against a recovered signature, and short-address detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .abi import (
    AbiType,
    Address,
    Bool,
    BytesN,
    Decimal,
    Defect,
    FunctionSignature,
    Int,
    TooShort,
    UInt,
    locate_fields,
)

TRANSFER_SELECTOR = 0xA9059CBB


class SelectorMismatch(ValueError):
    pass


class SignatureUnavailable(LookupError):
    pass


class NotTransferCall(ValueError):
    pass


@dataclass
class CalldataVerdict:
    valid: bool
    defects: list[Defect] = field(default_factory=list)
    selector: int = 0
    signature: FunctionSignature | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "valid": self.valid,
            "selector": f"0x{self.selector:08x}",
            "signature": str(self.signature) if self.signature is not None else None,
            "defects": [d.to_json() for d in self.defects],
        }


def word_defect(t: AbiType, word: bytes) -> str | None:
    """Why a 32-byte ``word`` is not a clean encoding of ``t``, or None."""
    v = int.from_bytes(word, "big")
    if isinstance(t, UInt):
        return None if v >> t.bits == 0 else f"high bytes of {t} are not zero"
    if isinstance(t, Int):
        high = v >> (t.bits - 1)  # pad bits plus the sign bit
        if high in (0, (1 << (257 - t.bits)) - 1):
            return None
        return f"high bytes of {t} are not a sign extension"
    if isinstance(t, Address):
        return None if v >> 160 == 0 else "high 12 bytes of address are not zero"
    if isinstance(t, Bool):
        return None if v in (0, 1) else f"bool word is {v:#x}"
    if isinstance(t, BytesN):
        low = v & ((1 << (8 * (32 - t.size))) - 1)
        return None if low == 0 else f"low bytes of {t} are not zero"
    if isinstance(t, Decimal):
        s = v - (1 << 256) if v >> 255 else v
        return None if Decimal.MIN <= s <= Decimal.MAX else "decimal out of range"
    raise TypeError(f"not a word type: {t}")


def _pick_signature(selector: int, signature: FunctionSignature | Iterable[FunctionSignature]
                    | Mapping[int, FunctionSignature]) -> FunctionSignature:
    if isinstance(signature, FunctionSignature):
        if signature.selector != selector:
            raise SelectorMismatch(f"calldata selector 0x{selector:08x} != 0x{signature.selector:08x}")
        sig = signature
    else:
        pool = signature.values() if isinstance(signature, Mapping) else signature
        sig = next((s for s in pool if s.selector == selector), None)  # type: ignore[assignment]
        if sig is None:
            raise SignatureUnavailable(f"no signature for selector 0x{selector:08x}")
    if sig.params is None:
        raise SignatureUnavailable(f"signature for 0x{selector:08x} was not recovered")
    return sig


def check_calldata(calldata: bytes, signature: FunctionSignature | Iterable[FunctionSignature]
                   | Mapping[int, FunctionSignature]) -> CalldataVerdict:
    """Check that ``calldata`` is a well-formed invocation of ``signature``.

    ``signature`` may be one signature or a collection, in which case the
    one matching the calldata selector is used.
    """
    if len(calldata) < 4:
        raise TooShort(f"calldata has {len(calldata)} bytes, need at least 4")
    selector = int.from_bytes(calldata[:4], "big")
    sig = _pick_signature(selector, signature)
    layout = locate_fields(calldata, sig.params)  # type: ignore[arg-type]
    defects = list(layout.defects)
    for p in layout.params:
        for pos, t in p.words:
            why = word_defect(t, calldata[pos : pos + 32])
            if why:
                defects.append(Defect(p.index, "bad-padding", f"{why} at {pos}"))
        for pos, n, t in p.payloads:
            end = pos + -(-n // 32) * 32
            if any(calldata[pos + n : end]):
                defects.append(Defect(p.index, "bad-padding", f"{t} payload padding at {pos + n} is not zero"))
    defects.sort(key=lambda d: d.param)
    return CalldataVerdict(not defects, defects, selector, sig)


def _expected_arg_length(sig: FunctionSignature | None) -> int | None:
    if sig is None or not sig.params or any(t.is_dynamic for t in sig.params):
        return None
    if len(sig.params) < 2 or not isinstance(sig.params[-2], Address) or not isinstance(sig.params[-1], (UInt, Int)):
        return None
    return sum(t.head_size for t in sig.params)


def detect_short_address(calldata: bytes, extend: bool = False,
                         signature: FunctionSignature | None = None) -> CalldataVerdict:
    """Flag calldata whose trailing address bytes were dropped.

    By default only ``transfer(address,uint256)`` calls are examined. With
    ``extend`` any static signature ending in (address, integer) is, using
    ``signature`` for the expected argument length.
    """
    if len(calldata) < 4:
        raise TooShort(f"calldata has {len(calldata)} bytes, need at least 4")
    selector = int.from_bytes(calldata[:4], "big")
    if selector == TRANSFER_SELECTOR:
        expected, addr_param = 64, 0
    else:
        expected = _expected_arg_length(signature) if extend and signature and signature.selector == selector else None
        if expected is None:
            raise NotTransferCall(f"selector 0x{selector:08x} is not transfer(address,uint256)")
        addr_param = len(signature.params) - 2  # type: ignore[union-attr, arg-type]
    args = calldata[4:]
    n = len(args)
    verdict = CalldataVerdict(True, [], selector, signature)
    # the integer word must still be partly present for the shift to happen
    if expected - 32 < n < expected:
        missing = expected - n
        last = args[n - 32 :]
        if not any(last[:missing]):
            verdict.valid = False
            verdict.defects.append(Defect(addr_param, "short-address",
                                          f"arguments are {n} bytes, {missing} short of {expected}"))
    return verdict
