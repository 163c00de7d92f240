"""Canonical symbolic expressions over 256-bit words.

Expressions are immutable and hash-consed by structure. All construction
goes through the smart constructors in this module (``add``, ``mul``,
``apply`` ...), which keep a canonical form: linear parts are flattened into
a constant plus integer-weighted terms, commutative operands are sorted and
constant arithmetic is folded. Two expressions that canonicalize to the same
tree compare equal.

Comparisons between constants are kept symbolic on purpose: a loop guard such
as ``0 < 3`` has to survive as a comparison so that its bound can be read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from Crypto.Hash import keccak

WORD = 1 << 256
MASK = WORD - 1
SIGN_BIT = 1 << 255


def to_signed(v: int) -> int:
    return v - WORD if v & SIGN_BIT else v


def to_word(v: int) -> int:
    return v % WORD


class Expr:
    """Base class. Subclasses are frozen dataclasses with a cached key."""

    __slots__ = ()

    def key(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def __lt__(self, other: "Expr") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        return self.key()

    @property
    def is_const(self) -> bool:
        return isinstance(self, Const)


def _cache(obj: object, text: str) -> None:
    object.__setattr__(obj, "_key", text)
    object.__setattr__(obj, "_hash", hash(text))


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: int
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.value % WORD)
        _cache(self, hex(self.value))

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Const) and other.value == self.value


@dataclass(frozen=True, eq=False)
class CalldataWord(Expr):
    """The 32-byte word CALLDATALOAD returns for location ``loc``."""

    loc: Expr
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _cache(self, f"cd[{self.loc.key()}]")

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CalldataWord) and other._key == self._key


@dataclass(frozen=True, eq=False)
class Env(Expr):
    """A free symbol for anything read from the environment."""

    kind: str
    ident: int = 0
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _cache(self, f"{self.kind}#{self.ident}")

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Env) and other._key == self._key


@dataclass(frozen=True, eq=False)
class ArgSymbol(Expr):
    """Marks a value as belonging to parameter ``index``."""

    index: int
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _cache(self, f"arg{self.index}")

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ArgSymbol) and other.index == self.index


@dataclass(frozen=True, eq=False)
class Lin(Expr):
    """``const + sum(coef * term)`` modulo 2**256, terms sorted by key."""

    const: int
    terms: tuple[tuple[Expr, int], ...]
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        parts = []
        for t, c in self.terms:
            sc = to_signed(c)
            parts.append(t.key() if sc == 1 else f"{sc}*{t.key()}")
        if self.const:
            parts.append(str(to_signed(self.const)))
        _cache(self, "(" + " + ".join(parts) + ")")

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lin) and other._key == self._key


@dataclass(frozen=True, eq=False)
class Op(Expr):
    name: str
    args: tuple[Expr, ...]
    _key: str = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _cache(self, f"{self.name}(" + ",".join(a.key() for a in self.args) + ")")

    def key(self) -> str:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Op) and other._key == self._key


ZERO = Const(0)
ONE = Const(1)

COMMUTATIVE = frozenset({"MUL", "AND", "OR", "XOR", "EQ"})
COMPARISONS = frozenset({"LT", "GT", "SLT", "SGT", "EQ"})


# concrete semantics ---------------------------------------------------------


def _div(a: int, b: int) -> int:
    return a // b if b else 0


def _sdiv(a: int, b: int) -> int:
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0:
        return 0
    q = abs(sa) // abs(sb)
    return to_word(-q if (sa < 0) != (sb < 0) else q)


def _mod(a: int, b: int) -> int:
    return a % b if b else 0


def _smod(a: int, b: int) -> int:
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0:
        return 0
    r = abs(sa) % abs(sb)
    return to_word(-r if sa < 0 else r)


def _signextend(b: int, x: int) -> int:
    if b >= 31:
        return x
    bit = b * 8 + 7
    low = (1 << (bit + 1)) - 1
    return (x | (MASK ^ low)) if x >> bit & 1 else x & low


def _byte(i: int, x: int) -> int:
    return (x >> (248 - 8 * i)) & 0xFF if i < 32 else 0


def _sar(s: int, x: int) -> int:
    sx = to_signed(x)
    if s >= 256:
        return MASK if sx < 0 else 0
    return to_word(sx >> s)


def _sha3(*words: int) -> int:
    h = keccak.new(digest_bits=256)
    h.update(b"".join(w.to_bytes(32, "big") for w in words))
    return int.from_bytes(h.digest(), "big")


SEMANTICS: dict[str, Callable[..., int]] = {
    "ADD": lambda a, b: (a + b) % WORD,
    "MUL": lambda a, b: (a * b) % WORD,
    "SUB": lambda a, b: (a - b) % WORD,
    "DIV": _div,
    "SDIV": _sdiv,
    "MOD": _mod,
    "SMOD": _smod,
    "ADDMOD": lambda a, b, n: (a + b) % n if n else 0,
    "MULMOD": lambda a, b, n: (a * b) % n if n else 0,
    "EXP": lambda a, b: pow(a, b, WORD),
    "SIGNEXTEND": _signextend,
    "LT": lambda a, b: int(a < b),
    "GT": lambda a, b: int(a > b),
    "SLT": lambda a, b: int(to_signed(a) < to_signed(b)),
    "SGT": lambda a, b: int(to_signed(a) > to_signed(b)),
    "EQ": lambda a, b: int(a == b),
    "ISZERO": lambda a: int(a == 0),
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
    "NOT": lambda a: MASK ^ a,
    "BYTE": _byte,
    "SHL": lambda s, x: (x << s) % WORD if s < 256 else 0,
    "SHR": lambda s, x: x >> s if s < 256 else 0,
    "SAR": _sar,
    "SHA3": _sha3,
}


# linear helpers ---------------------------------------------------------------


def linear_parts(e: Expr) -> tuple[int, dict[Expr, int]]:
    """Split ``e`` into a constant and a term->coefficient map."""
    if isinstance(e, Const):
        return e.value, {}
    if isinstance(e, Lin):
        return e.const, dict(e.terms)
    return 0, {e: 1}


def from_linear(const: int, terms: dict[Expr, int]) -> Expr:
    const %= WORD
    items = sorted(((t, c % WORD) for t, c in terms.items() if c % WORD), key=lambda tc: tc[0].key())
    if not items:
        return Const(const)
    if const == 0 and len(items) == 1 and items[0][1] == 1:
        return items[0][0]
    return Lin(const, tuple(items))


def add(*xs: Expr) -> Expr:
    const = 0
    terms: dict[Expr, int] = {}
    for x in xs:
        c, ts = linear_parts(x)
        const += c
        for t, k in ts.items():
            terms[t] = terms.get(t, 0) + k
    return from_linear(const, terms)


def scale(x: Expr, k: int) -> Expr:
    c, ts = linear_parts(x)
    return from_linear(c * k, {t: v * k for t, v in ts.items()})


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, scale(b, -1))


def const(v: int) -> Const:
    return Const(v)


# smart constructors -------------------------------------------------------------


def max_bits(e: Expr) -> int:
    """Upper bound on the bit length of any value ``e`` can take."""
    if isinstance(e, Const):
        return e.value.bit_length()
    if isinstance(e, Op):
        n = e.name
        if n in COMPARISONS or n == "ISZERO":
            return 1
        if n == "BYTE":
            return 8
        if n == "SHR" and e.args[0].is_const:
            return max(0, 256 - e.args[0].value)  # type: ignore[attr-defined]
        if n == "AND":
            return min(max_bits(a) for a in e.args)
        if n in ("OR", "XOR"):
            return max(max_bits(a) for a in e.args)
    return 256


def _power_of_two(v: int) -> int | None:
    return v.bit_length() - 1 if v and v & (v - 1) == 0 else None


def _make(name: str, args: tuple[Expr, ...]) -> Expr:
    if name in COMMUTATIVE:
        args = tuple(sorted(args, key=lambda a: a.key()))
    return Op(name, args)


def apply(name: str, *args: Expr) -> Expr:
    """Build the canonical form of opcode ``name`` applied to ``args``.

    Argument order follows the EVM stack convention: ``apply("SUB", a, b)``
    is ``a - b`` and ``apply("SHR", shift, value)`` is ``value >> shift``.
    """
    if name == "ADD":
        return add(*args)
    if name == "SUB":
        return sub(*args)
    consts = all(isinstance(a, Const) for a in args)
    if consts and name not in COMPARISONS:
        return Const(SEMANTICS[name](*(a.value for a in args)))  # type: ignore[attr-defined]
    handler = _SIMPLIFIERS.get(name)
    if handler is not None:
        out = handler(*args)
        if out is not None:
            return out
    return _make(name, args)


def _mul(a: Expr, b: Expr) -> Expr | None:
    if isinstance(a, Const):
        return scale(b, a.value)
    if isinstance(b, Const):
        return scale(a, b.value)
    return None


def _div_simpl(a: Expr, b: Expr) -> Expr | None:
    if isinstance(b, Const):
        if b.value == 0:
            return ZERO
        k = _power_of_two(b.value)
        if k is not None:
            return apply("SHR", Const(k), a)
    return None


def _shr(s: Expr, x: Expr) -> Expr | None:
    if isinstance(s, Const):
        if s.value == 0:
            return x
        if s.value >= 256:
            return ZERO
        if isinstance(x, Op) and x.name == "SHR" and isinstance(x.args[0], Const):
            return apply("SHR", Const(min(256, s.value + x.args[0].value)), x.args[1])
        if max_bits(x) <= s.value:
            return ZERO
    return None


def _shl(s: Expr, x: Expr) -> Expr | None:
    if isinstance(s, Const):
        if s.value >= 256:
            return ZERO
        return scale(x, 1 << s.value)
    return None


def _and(a: Expr, b: Expr) -> Expr | None:
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if not isinstance(a, Const):
        return None
    c = a.value
    if c == 0:
        return ZERO
    if c == MASK:
        return b
    if isinstance(b, Op) and b.name == "AND":
        inner_consts = [x for x in b.args if isinstance(x, Const)]
        if inner_consts:
            rest = [x for x in b.args if not isinstance(x, Const)]
            merged = c
            for ic in inner_consts:
                merged &= ic.value
            return apply("AND", Const(merged), *rest) if len(rest) == 1 else None
    low = _power_of_two(c + 1)
    if low is not None and max_bits(b) <= low:
        return b
    return None


def _iszero(a: Expr) -> Expr | None:
    return None


def _not(a: Expr) -> Expr | None:
    if isinstance(a, Op) and a.name == "NOT":
        return a.args[0]
    return None


def _or(a: Expr, b: Expr) -> Expr | None:
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Const) and x.value == 0:
            return y
    return None


def _xor(a: Expr, b: Expr) -> Expr | None:
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Const) and x.value == 0:
            return y
    if a == b:
        return ZERO
    return None


_SIMPLIFIERS: dict[str, Callable[..., Expr | None]] = {
    "MUL": _mul,
    "DIV": _div_simpl,
    "SHR": _shr,
    "SHL": _shl,
    "AND": _and,
    "ISZERO": _iszero,
    "NOT": _not,
    "OR": _or,
    "XOR": _xor,
}


# queries ----------------------------------------------------------------------


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, CalldataWord):
        return (e.loc,)
    if isinstance(e, Lin):
        return tuple(t for t, _ in e.terms)
    if isinstance(e, Op):
        return e.args
    return ()


def subterms(e: Expr) -> Iterator[Expr]:
    """Yield ``e`` and every sub-expression, pre-order."""
    stack = [e]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(children(cur)))


def contains(p: Expr, q: Expr) -> bool:
    """True when ``q`` occurs as a sub-expression of ``p``."""
    return any(s == q for s in subterms(p))


def calldata_words(e: Expr) -> list[CalldataWord]:
    return [s for s in subterms(e) if isinstance(s, CalldataWord)]


def is_head_word(e: Expr) -> bool:
    """A CALLDATALOAD at a constant location."""
    return isinstance(e, CalldataWord) and isinstance(e.loc, Const)


def leaves(e: Expr) -> set[Expr]:
    """Free symbols of ``e``. A CalldataWord counts as one leaf."""
    out: set[Expr] = set()
    stack = [e]
    while stack:
        cur = stack.pop()
        if isinstance(cur, (CalldataWord, Env, ArgSymbol)):
            out.add(cur)
        elif isinstance(cur, (Lin, Op)):
            stack.extend(children(cur))
    return out


def evaluate(e: Expr, assign: Callable[[Expr], int]) -> int:
    """Evaluate ``e`` with ``assign`` giving values for free symbols."""
    memo: dict[Expr, int] = {}

    def ev(x: Expr) -> int:
        if x in memo:
            return memo[x]
        if isinstance(x, Const):
            v = x.value
        elif isinstance(x, (CalldataWord, Env, ArgSymbol)):
            v = assign(x) % WORD
        elif isinstance(x, Lin):
            v = (x.const + sum(c * ev(t) for t, c in x.terms)) % WORD
        elif isinstance(x, Op):
            v = SEMANTICS[x.name](*(ev(a) for a in x.args))
        else:  # pragma: no cover
            raise TypeError(x)
        memo[x] = v
        return v

    return ev(e)


def equivalent(a: Expr, b: Expr, samples: int = 24, seed: int = 0x5EED) -> bool:
    """Probabilistic equivalence: compare values on random assignments.

    Free symbols get a mix of small and full-width values so both carry-free
    and wrapping behaviour are exercised.
    """
    import random

    if a == b:
        return True
    rng = random.Random(seed)
    for i in range(samples):
        table: dict[Expr, int] = {}

        def assign(x: Expr) -> int:
            if x not in table:
                table[x] = rng.getrandbits(16) if i % 2 == 0 else rng.getrandbits(256)
            return table[x]

        if evaluate(a, assign) != evaluate(b, assign):
            return False
    return True
