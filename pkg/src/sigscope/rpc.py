"""Fetch runtime bytecode and transaction input over Ethereum JSON-RPC."""

from __future__ import annotations

import itertools
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, TypeVar

import requests

ENV_ENDPOINT = "SIGSCOPE_RPC"
DEFAULT_WORKERS = 8
ATTEMPTS = 3
BACKOFF_BASE = 0.25
BACKOFF_CAP = 2.0

_HEX = re.compile(r"0x([0-9a-fA-F]*)")
_ids = itertools.count(1)

T = TypeVar("T")
R = TypeVar("R")


class NetworkError(ConnectionError):
    """The endpoint could not be reached after all retries."""


class RpcError(RuntimeError):
    """The node answered with an error or an undecodable result."""


class NotFound(LookupError):
    pass


class EmptyCode(Warning):
    """The address holds no code (an externally owned account)."""


@dataclass
class CodeRecord:
    address: bytes
    bytecode: bytes
    fetched_at_block: str | int = "latest"
    notes: list[str] = field(default_factory=list)


@dataclass
class TxInputRecord:
    tx_hash: bytes
    input: bytes
    to: bytes | None


def resolve_endpoint(endpoint: str | None = None) -> str:
    endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
    if not endpoint:
        raise ValueError(f"no RPC endpoint given and {ENV_ENDPOINT} is unset")
    return endpoint


def _hex_bytes(text: Any, what: str, size: int | None = None) -> bytes:
    m = _HEX.fullmatch(text) if isinstance(text, str) else None
    if m is None or len(m.group(1)) % 2:
        raise RpcError(f"malformed hex for {what}: {text!r}")
    out = bytes.fromhex(m.group(1))
    if size is not None and len(out) != size:
        raise RpcError(f"{what} must be {size} bytes, got {len(out)}")
    return out


def _parse_hex_arg(value: str | bytes, size: int, what: str) -> tuple[bytes, str]:
    raw = value if isinstance(value, bytes) else bytes.fromhex(value.removeprefix("0x"))
    if len(raw) != size:
        raise ValueError(f"{what} must be {size} bytes")
    return raw, "0x" + raw.hex()


def call(endpoint: str, method: str, params: list[Any], session: requests.Session | None = None,
         timeout: float = 10.0, sleep: Callable[[float], None] = time.sleep) -> Any:
    """One JSON-RPC 2.0 call with retries on transport failures."""
    payload = {"jsonrpc": "2.0", "id": next(_ids), "method": method, "params": params}
    post = (session or requests).post
    last: Exception | None = None
    for attempt in range(ATTEMPTS):
        try:
            resp = post(endpoint, json=payload, timeout=timeout)
            if resp.status_code >= 500:
                raise requests.HTTPError(f"HTTP {resp.status_code}")
            body = resp.json()
            break
        except (requests.ConnectionError, requests.Timeout, requests.HTTPError) as exc:
            last = exc
            if attempt + 1 < ATTEMPTS:
                sleep(min(BACKOFF_CAP, BACKOFF_BASE * 2**attempt))
        except ValueError as exc:
            raise RpcError(f"response is not JSON: {exc}") from None
    else:
        raise NetworkError(f"{method} failed after {ATTEMPTS} attempts: {last}")
    if not isinstance(body, dict):
        raise RpcError(f"unexpected response {body!r}")
    if body.get("error") is not None:
        err = body["error"]
        raise RpcError(err.get("message", str(err)) if isinstance(err, dict) else str(err))
    if "result" not in body:
        raise RpcError("response has no result")
    return body["result"]


def fetch_code(endpoint: str | None, address: str | bytes, block: str | int = "latest",
               session: requests.Session | None = None) -> CodeRecord:
    raw, text = _parse_hex_arg(address, 20, "address")
    tag = block if isinstance(block, str) else hex(block)
    code = _hex_bytes(call(resolve_endpoint(endpoint), "eth_getCode", [text, tag], session), "code")
    rec = CodeRecord(raw, code, block)
    if not code:
        rec.notes.append("EmptyCode")
    return rec


def fetch_tx_input(endpoint: str | None, tx_hash: str | bytes,
                   session: requests.Session | None = None) -> TxInputRecord:
    raw, text = _parse_hex_arg(tx_hash, 32, "transaction hash")
    tx = call(resolve_endpoint(endpoint), "eth_getTransactionByHash", [text], session)
    if tx is None:
        raise NotFound(f"transaction {text} not found")
    if not isinstance(tx, dict):
        raise RpcError(f"unexpected transaction object {tx!r}")
    to = tx.get("to")
    return TxInputRecord(raw, _hex_bytes(tx.get("input", "0x"), "input"),
                         None if to is None else _hex_bytes(to, "to", 20))


def map_bounded(fn: Callable[[T], R], items: Iterable[T], workers: int = DEFAULT_WORKERS) -> list[R | Exception]:
    """Apply ``fn`` with a bounded thread pool; results keep input order.

    Exceptions are returned in place of results so one failure does not
    cancel the batch.
    """
    def safe(x: T) -> R | Exception:
        try:
            return fn(x)
        except Exception as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(safe, items))


def fetch_codes(endpoint: str | None, addresses: Iterable[str], workers: int = DEFAULT_WORKERS) -> list[CodeRecord | Exception]:
    endpoint = resolve_endpoint(endpoint)
    return map_bounded(lambda a: fetch_code(endpoint, a), addresses, workers)
