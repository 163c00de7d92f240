"""Command-line interface: recover, check, disasm, selector."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Any, Sequence

from . import __version__
from .abi import FunctionSignature, MalformedSignature, TooShort, compute_selector, parse_signature
from .evm import disassemble, parse_hex
from .parcheck import (
    TRANSFER_SELECTOR,
    NotTransferCall,
    SelectorMismatch,
    SignatureUnavailable,
    check_calldata,
    detect_short_address,
)
from .rpc import DEFAULT_WORKERS, ENV_ENDPOINT, fetch_code, map_bounded
from .tase import DEFAULT_PATH_BUDGET

SCHEMA = "sigscope/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_ADDRESS = re.compile(r"0x[0-9a-fA-F]{40}")


class InputError(Exception):
    pass


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2)


def read_bytecode(arg: str, endpoint: str | None) -> tuple[bytes, list[str]]:
    """Bytecode from a file (hex text or raw bytes) or, for an address, from RPC."""
    if _ADDRESS.fullmatch(arg) and not os.path.exists(arg):
        rec = fetch_code(endpoint, arg)
        return rec.bytecode, rec.notes
    try:
        with open(arg, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {arg}: {exc.strerror}") from None
    try:
        text = raw.decode("ascii").strip()
    except UnicodeDecodeError:
        return raw, []
    if not text:
        raise InputError(f"{arg} is empty")
    try:
        return parse_hex(text), []
    except ValueError as exc:
        raise InputError(f"{arg} is not hex bytecode: {exc}") from None


def _function_json(sig: FunctionSignature, seconds: float | None) -> dict[str, Any]:
    out = sig.to_json()
    if seconds is not None:
        out["time_s"] = round(seconds, 6)
    return out


def _recover_one(arg: str, args: argparse.Namespace) -> dict[str, Any]:
    from .rules import recover_timed

    entry: dict[str, Any] = {"input": arg}
    try:
        code, notes = read_bytecode(arg, args.rpc_endpoint)
        if not code:
            raise InputError("EmptyCode: no bytecode")
        timed = recover_timed(code, args.path_budget)
    except Exception as exc:
        entry["error"] = {"kind": type(exc).__name__, "detail": str(exc)}
        return entry
    entry["notes"] = notes + timed.notes
    entry["functions"] = [_function_json(s, None if args.no_timing else dt) for s, dt in timed]
    return entry


def cmd_recover(args: argparse.Namespace) -> int:
    results = map_bounded(lambda a: _recover_one(a, args), args.inputs, args.workers)
    contracts = [r if isinstance(r, dict) else {"input": a, "error": {"kind": type(r).__name__, "detail": str(r)}}
                 for a, r in zip(args.inputs, results)]
    if args.format == "text":
        for c in contracts:
            if "error" in c:
                print(f"{c['input']}: error: {c['error']['kind']}: {c['error']['detail']}", file=sys.stderr)
                continue
            for f in c["functions"]:
                print(f["signature"] or f"{f['selector']}(?)")
    else:
        print(_dump({"schema": SCHEMA, "contracts": contracts}))
    return EXIT_OK if any("error" not in c for c in contracts) else EXIT_FAIL


def _load_signatures(args: argparse.Namespace) -> list[FunctionSignature]:
    sigs = [parse_signature(t) for t in args.signature or []]
    for path in args.signatures or []:
        with open(path) as fh:
            report = json.load(fh)
        for c in report.get("contracts", []):
            for f in c.get("functions", []):
                if f.get("signature"):
                    sig = parse_signature(f["signature"])
                    sig.dialect = f.get("dialect", sig.dialect)
                    sigs.append(sig)
    return sigs


def cmd_check(args: argparse.Namespace) -> int:
    out: dict[str, Any] = {"schema": SCHEMA}
    try:
        calldata = parse_hex(args.calldata)
        if len(calldata) < 4:
            raise TooShort(f"calldata has {len(calldata)} bytes, need at least 4")
        sigs = _load_signatures(args)
        selector = int.from_bytes(calldata[:4], "big")
        verdict = check_calldata(calldata, sigs)
        if selector == TRANSFER_SELECTOR or args.extend_short_address:
            try:
                short = detect_short_address(calldata, args.extend_short_address, verdict.signature)
            except NotTransferCall:
                short = None
            if short is not None and not short.valid:
                # the truncation is explained by the dropped address bytes
                rest = [d for d in verdict.defects if d.kind != "truncated"]
                verdict.defects = short.defects + rest
                verdict.valid = False
    except (TooShort, SignatureUnavailable, SelectorMismatch, MalformedSignature, ValueError, OSError) as exc:
        out["error"] = {"kind": type(exc).__name__, "detail": str(exc)}
        print(_dump(out))
        return EXIT_FAIL
    out.update(verdict.to_json())
    if args.format == "text":
        print("valid" if verdict.valid else "invalid: " + ", ".join(f"param {d.param} {d.kind}" for d in verdict.defects))
    else:
        print(_dump(out))
    return EXIT_OK


def cmd_disasm(args: argparse.Namespace) -> int:
    src = args.bytecode
    try:
        code = read_bytecode(src, None)[0] if os.path.exists(src) else parse_hex(src)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(disassemble(code))
    return EXIT_OK


def cmd_selector(args: argparse.Namespace) -> int:
    try:
        print(compute_selector(args.signature).hex())
    except MalformedSignature as exc:
        print(f"error: MalformedSignature: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--rpc-endpoint", default=os.environ.get(ENV_ENDPOINT),
                        help=f"JSON-RPC URL (default: ${ENV_ENDPOINT})")
    common.add_argument("--path-budget", type=int, default=DEFAULT_PATH_BUDGET, metavar="N")
    common.add_argument("--no-timing", action="store_true", help="omit wall times for reproducible reports")
    common.add_argument("--extend-short-address", action="store_true",
                        help="scan any (…,address,uintM) signature for short addresses, not only transfer")
    common.add_argument("--workers", type=int, default=DEFAULT_WORKERS)

    p = argparse.ArgumentParser(prog="sigscope", description="Recover EVM function signatures and check calldata.")
    p.add_argument("--version", action="version", version=f"sigscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("recover", parents=[common], help="recover signatures from bytecode files or addresses")
    r.add_argument("inputs", nargs="+", help="hex/binary bytecode files or 0x-addresses (fetched over RPC)")
    r.set_defaults(func=cmd_recover)

    c = sub.add_parser("check", parents=[common], help="validate calldata against signatures")
    c.add_argument("calldata", help="hex calldata")
    c.add_argument("--signature", action="append", help="signature text, e.g. transfer(address,uint256)")
    c.add_argument("--signatures", action="append", metavar="REPORT", help="a recover JSON report")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("disasm", parents=[common], help="disassemble bytecode into basic blocks")
    d.add_argument("bytecode", help="hex bytecode or a file holding it")
    d.set_defaults(func=cmd_disasm)

    s = sub.add_parser("selector", parents=[common], help="print the 4-byte selector of a signature")
    s.add_argument("signature")
    s.set_defaults(func=cmd_selector)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.path_budget < 1 or args.workers < 1:
        print("error: --path-budget and --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
