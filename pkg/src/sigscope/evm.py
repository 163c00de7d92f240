"""EVM instruction decoding and basic-block partitioning."""

from __future__ import annotations

from dataclasses import dataclass, field

# byte -> (mnemonic, stack inputs, stack outputs)
OPCODES: dict[int, tuple[str, int, int]] = {
    0x00: ("STOP", 0, 0),
    0x01: ("ADD", 2, 1),
    0x02: ("MUL", 2, 1),
    0x03: ("SUB", 2, 1),
    0x04: ("DIV", 2, 1),
    0x05: ("SDIV", 2, 1),
    0x06: ("MOD", 2, 1),
    0x07: ("SMOD", 2, 1),
    0x08: ("ADDMOD", 3, 1),
    0x09: ("MULMOD", 3, 1),
    0x0A: ("EXP", 2, 1),
    0x0B: ("SIGNEXTEND", 2, 1),
    0x10: ("LT", 2, 1),
    0x11: ("GT", 2, 1),
    0x12: ("SLT", 2, 1),
    0x13: ("SGT", 2, 1),
    0x14: ("EQ", 2, 1),
    0x15: ("ISZERO", 1, 1),
    0x16: ("AND", 2, 1),
    0x17: ("OR", 2, 1),
    0x18: ("XOR", 2, 1),
    0x19: ("NOT", 1, 1),
    0x1A: ("BYTE", 2, 1),
    0x1B: ("SHL", 2, 1),
    0x1C: ("SHR", 2, 1),
    0x1D: ("SAR", 2, 1),
    0x20: ("SHA3", 2, 1),
    0x30: ("ADDRESS", 0, 1),
    0x31: ("BALANCE", 1, 1),
    0x32: ("ORIGIN", 0, 1),
    0x33: ("CALLER", 0, 1),
    0x34: ("CALLVALUE", 0, 1),
    0x35: ("CALLDATALOAD", 1, 1),
    0x36: ("CALLDATASIZE", 0, 1),
    0x37: ("CALLDATACOPY", 3, 0),
    0x38: ("CODESIZE", 0, 1),
    0x39: ("CODECOPY", 3, 0),
    0x3A: ("GASPRICE", 0, 1),
    0x3B: ("EXTCODESIZE", 1, 1),
    0x3C: ("EXTCODECOPY", 4, 0),
    0x3D: ("RETURNDATASIZE", 0, 1),
    0x3E: ("RETURNDATACOPY", 3, 0),
    0x3F: ("EXTCODEHASH", 1, 1),
    0x40: ("BLOCKHASH", 1, 1),
    0x41: ("COINBASE", 0, 1),
    0x42: ("TIMESTAMP", 0, 1),
    0x43: ("NUMBER", 0, 1),
    0x44: ("PREVRANDAO", 0, 1),
    0x45: ("GASLIMIT", 0, 1),
    0x46: ("CHAINID", 0, 1),
    0x47: ("SELFBALANCE", 0, 1),
    0x48: ("BASEFEE", 0, 1),
    0x49: ("BLOBHASH", 1, 1),
    0x4A: ("BLOBBASEFEE", 0, 1),
    0x50: ("POP", 1, 0),
    0x51: ("MLOAD", 1, 1),
    0x52: ("MSTORE", 2, 0),
    0x53: ("MSTORE8", 2, 0),
    0x54: ("SLOAD", 1, 1),
    0x55: ("SSTORE", 2, 0),
    0x56: ("JUMP", 1, 0),
    0x57: ("JUMPI", 2, 0),
    0x58: ("PC", 0, 1),
    0x59: ("MSIZE", 0, 1),
    0x5A: ("GAS", 0, 1),
    0x5B: ("JUMPDEST", 0, 0),
    0x5C: ("TLOAD", 1, 1),
    0x5D: ("TSTORE", 2, 0),
    0x5E: ("MCOPY", 3, 0),
    0x5F: ("PUSH0", 0, 1),
    0xA0: ("LOG0", 2, 0),
    0xA1: ("LOG1", 3, 0),
    0xA2: ("LOG2", 4, 0),
    0xA3: ("LOG3", 5, 0),
    0xA4: ("LOG4", 6, 0),
    0xF0: ("CREATE", 3, 1),
    0xF1: ("CALL", 7, 1),
    0xF2: ("CALLCODE", 7, 1),
    0xF3: ("RETURN", 2, 0),
    0xF4: ("DELEGATECALL", 6, 1),
    0xF5: ("CREATE2", 4, 1),
    0xFA: ("STATICCALL", 6, 1),
    0xFD: ("REVERT", 2, 0),
    0xFE: ("INVALID", 0, 0),
    0xFF: ("SELFDESTRUCT", 1, 0),
}
for _n in range(1, 33):
    OPCODES[0x5F + _n] = (f"PUSH{_n}", 0, 1)
for _n in range(1, 17):
    OPCODES[0x7F + _n] = (f"DUP{_n}", _n, _n + 1)
    OPCODES[0x8F + _n] = (f"SWAP{_n}", _n + 1, _n + 1)

MNEMONICS: dict[str, int] = {name: byte for byte, (name, _, _) in OPCODES.items()}

TERMINATORS = frozenset({"JUMP", "JUMPI", "STOP", "RETURN", "REVERT", "INVALID"})


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction. Unknown bytes decode with ``name == "INVALID"``."""

    offset: int
    opcode: int
    operand: bytes = b""

    @property
    def name(self) -> str:
        entry = OPCODES.get(self.opcode)
        return entry[0] if entry else "INVALID"

    @property
    def size(self) -> int:
        return 1 + len(self.operand)

    @property
    def value(self) -> int | None:
        """Integer value of a PUSH operand, None for other instructions."""
        if not self.is_push:
            return None
        return int.from_bytes(self.operand, "big")

    @property
    def is_push(self) -> bool:
        return 0x5F <= self.opcode <= 0x7F

    @property
    def pops(self) -> int:
        entry = OPCODES.get(self.opcode)
        return entry[1] if entry else 0

    @property
    def pushes(self) -> int:
        entry = OPCODES.get(self.opcode)
        return entry[2] if entry else 0

    def __str__(self) -> str:
        text = f"{self.offset:04x}: {self.name}"
        if self.operand:
            text += " 0x" + self.operand.hex()
        return text


@dataclass(frozen=True)
class BasicBlock:
    start_offset: int
    instructions: tuple[Instruction, ...] = field(repr=False)

    @property
    def terminator(self) -> str:
        last = self.instructions[-1].name
        return last if last in TERMINATORS else "fallthrough"

    @property
    def end_offset(self) -> int:
        """Offset just past the block's last instruction."""
        last = self.instructions[-1]
        return last.offset + last.size


def push_width(opcode: int) -> int:
    return opcode - 0x5F if 0x5F <= opcode <= 0x7F else 0


def decode(bytecode: bytes) -> list[Instruction]:
    """Decode raw runtime bytecode.

    Every byte is consumed exactly once. A PUSH whose immediate runs past the
    end of the code is zero-extended to its declared width, which is how the
    EVM itself reads code beyond the end.
    """
    code = bytes(bytecode)
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        width = push_width(op)
        operand = code[pc + 1 : pc + 1 + width]
        if len(operand) < width:
            operand = operand.ljust(width, b"\x00")
        out.append(Instruction(pc, op, operand))
        pc += 1 + width
    return out


def partition_blocks(instructions: list[Instruction]) -> list[BasicBlock]:
    """Split instructions into basic blocks.

    A block starts at the first instruction, after any terminator, and at
    every JUMPDEST; it ends at a terminator or right before the next start.
    """
    blocks: list[BasicBlock] = []
    current: list[Instruction] = []
    for ins in instructions:
        if ins.name == "JUMPDEST" and current:
            blocks.append(BasicBlock(current[0].offset, tuple(current)))
            current = []
        current.append(ins)
        if ins.name in TERMINATORS:
            blocks.append(BasicBlock(current[0].offset, tuple(current)))
            current = []
    if current:
        blocks.append(BasicBlock(current[0].offset, tuple(current)))
    return blocks


def parse_hex(text: str) -> bytes:
    """Parse a hex string with optional 0x prefix and surrounding whitespace."""
    s = "".join(text.split())
    if s[:2] in ("0x", "0X"):
        s = s[2:]
    if len(s) % 2:
        raise ValueError("hex string has an odd number of digits")
    return bytes.fromhex(s)


def disassemble(bytecode: bytes) -> str:
    """Pretty-print instructions grouped by block, blocks separated by a blank line."""
    blocks = partition_blocks(decode(bytecode))
    return "\n\n".join("\n".join(str(i) for i in b.instructions) for b in blocks)
