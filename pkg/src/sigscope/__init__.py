"""Recover EVM function signatures from runtime bytecode and check calldata against them."""

from .abi import FunctionSignature, compute_selector, encode_calldata, parse_signature, parse_type
from .dispatcher import DispatchNotFound, detect_dialect, extract_functions
from .evm import decode, disassemble, partition_blocks
from .rules import coarse_infer, count_and_order, fine_infer, recover
from .tase import execute_function

__all__ = [
    "DispatchNotFound",
    "FunctionSignature",
    "coarse_infer",
    "compute_selector",
    "count_and_order",
    "decode",
    "detect_dialect",
    "disassemble",
    "encode_calldata",
    "execute_function",
    "extract_functions",
    "fine_infer",
    "parse_signature",
    "parse_type",
    "partition_blocks",
    "recover",
]

__version__ = "0.1.0"
