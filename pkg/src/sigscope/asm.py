"""A small two-pass EVM assembler for hand-written fixtures.

Syntax, whitespace separated::

    PUSH1 0x80 PUSH1 0x40 MSTORE   ; comments run to end of line
    PUSH2 @loop JUMP                ; label reference (always 2 bytes)
    loop:                           ; label definition, emits JUMPDEST
    PUSH 0x1234                     ; PUSH with the smallest width that fits

Operands accept hex (``0x..``) or decimal.
"""

from __future__ import annotations

from .evm import MNEMONICS


class AsmError(ValueError):
    pass


def _tokens(source: str) -> list[str]:
    out: list[str] = []
    for line in source.splitlines():
        out += line.split(";", 1)[0].split()
    return out


def _int(tok: str) -> int:
    try:
        return int(tok, 0)
    except ValueError:
        raise AsmError(f"bad number {tok!r}") from None


def assemble_source(source: str) -> bytes:
    toks = _tokens(source)
    # pass 1: sizes and label offsets
    items: list[tuple[int, int | str | None, int]] = []  # (opcode, operand, width)
    labels: dict[str, int] = {}
    pc = 0
    i = 0
    while i < len(toks):
        tok = toks[i]
        i += 1
        if tok.endswith(":"):
            name = tok[:-1]
            if name in labels:
                raise AsmError(f"duplicate label {name}")
            labels[name] = pc
            items.append((MNEMONICS["JUMPDEST"], None, 0))
            pc += 1
            continue
        up = tok.upper()
        if up == "PUSH" or (up.startswith("PUSH") and up != "PUSH0"):
            if i >= len(toks):
                raise AsmError(f"{tok} without operand")
            arg = toks[i]
            i += 1
            if arg.startswith("@"):
                width = 2 if up == "PUSH" else int(up[4:])
                items.append((0x5F + width, arg[1:], width))
            else:
                value = _int(arg)
                width = max(1, (value.bit_length() + 7) // 8) if up == "PUSH" else int(up[4:])
                if value >= 1 << (8 * width):
                    raise AsmError(f"{arg} does not fit {tok}")
                items.append((0x5F + width, value, width))
            pc += 1 + width
            continue
        if up not in MNEMONICS:
            raise AsmError(f"unknown mnemonic {tok!r}")
        items.append((MNEMONICS[up], None, 0))
        pc += 1
    # pass 2: emit
    out = bytearray()
    for op, arg, width in items:
        out.append(op)
        if width:
            if isinstance(arg, str):
                if arg not in labels:
                    raise AsmError(f"undefined label {arg}")
                arg = labels[arg]
            out += int(arg).to_bytes(width, "big")  # type: ignore[arg-type]
    return bytes(out)
