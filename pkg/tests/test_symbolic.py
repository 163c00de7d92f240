import random

from hypothesis import given, settings
from hypothesis import strategies as st

from sigscope import symbolic as S
from evmref import ARITY, LEAVES, M, W, ref_eval
from sigscope.symbolic import CalldataWord, Const

_interesting = st.sampled_from(
    [0, 1, 2, 3, 4, 5, 8, 31, 32, 36, 64, 224, 255, 256, 0xFF, 0xFFFFFFFF, (1 << 160) - 1,
     1 << 224, M, M - 31, 1 << 255, ((1 << 32) - 1) << 224]
)


def _trees(depth):
    leaf = st.one_of(st.sampled_from(range(len(LEAVES))).map(lambda i: ("sym", i)),
                     st.one_of(_interesting, st.integers(0, M)).map(lambda v: ("const", v)))
    if depth == 0:
        return leaf
    sub = _trees(depth - 1)
    node = st.sampled_from(sorted(ARITY)).flatmap(
        lambda op: st.tuples(*[sub] * ARITY[op]).map(lambda args: ("op", op, args))
    )
    return st.one_of(leaf, node)


def _build(t):
    if t[0] == "sym":
        return LEAVES[t[1]]
    if t[0] == "const":
        return Const(t[1])
    return S.apply(t[1], *(_build(a) for a in t[2]))


def _assignments(rng, n):
    out = []
    for k in range(n):
        if k % 3 == 0:
            out.append([rng.getrandbits(8) for _ in LEAVES])
        elif k % 3 == 1:
            out.append([rng.getrandbits(64) for _ in LEAVES])
        else:
            out.append([rng.getrandbits(256) for _ in LEAVES])
    return out


@settings(max_examples=1000)
@given(_trees(4), st.integers(0, 2**32))
def test_canonical_form_is_sound(tree, seed):
    expr = _build(tree)
    for env in _assignments(random.Random(seed), 100):
        table = dict(zip(LEAVES, env))
        assert S.evaluate(expr, table.__getitem__) == ref_eval(tree, env)


# linear fragment: a term-multiset oracle ----------------------------------------

def _lin_trees(depth):
    leaf = st.one_of(st.sampled_from(range(len(LEAVES))).map(lambda i: ("sym", i)),
                     st.integers(0, M).map(lambda v: ("const", v)))
    if depth == 0:
        return leaf
    sub = _lin_trees(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(st.sampled_from(["ADD", "SUB"]), sub, sub).map(lambda x: ("op", x[0], (x[1], x[2]))),
        st.tuples(st.one_of(_interesting, st.integers(0, M)), sub).map(lambda x: ("op", "MUL", (("const", x[0]), x[1]))),
        st.tuples(st.integers(0, 255), sub).map(lambda x: ("op", "SHL", (("const", x[0]), x[1]))),
    )


def _multiset(t):
    """(constant, {leaf index: coefficient}) by direct expansion."""
    if t[0] == "sym":
        return 0, {t[1]: 1}
    if t[0] == "const":
        return t[1], {}
    name, (a, b) = t[1], t[2]
    if name in ("ADD", "SUB"):
        ca, ta = _multiset(a)
        cb, tb = _multiset(b)
        sign = 1 if name == "ADD" else -1
        terms = dict(ta)
        for k, v in tb.items():
            terms[k] = terms.get(k, 0) + sign * v
        return (ca + sign * cb) % W, {k: v % W for k, v in terms.items() if v % W}
    k = a[1] if name == "MUL" else pow(2, a[1])
    cb, tb = _multiset(b)
    return (cb * k) % W, {i: (v * k) % W for i, v in tb.items() if (v * k) % W}


@settings(max_examples=1000)
@given(_lin_trees(5))
def test_linear_canonicalization_matches_multiset(tree):
    c, terms = S.linear_parts(_build(tree))
    want_c, want_terms = _multiset(tree)
    assert c == want_c
    assert {LEAVES.index(t): v for t, v in terms.items()} == want_terms


def test_offset_arithmetic_flattens():
    x = CalldataWord(Const(4))
    e = S.apply("ADD", S.apply("ADD", Const(4), x), Const(32))
    assert e == S.add(x, Const(36))
    assert S.linear_parts(e) == (36, {x: 1})
    # same value built in another order
    assert e == S.apply("ADD", Const(36), x)


def test_structural_equality_is_order_free():
    a, b = LEAVES[0], LEAVES[1]
    assert S.apply("AND", a, b) == S.apply("AND", b, a)
    assert S.apply("MUL", a, b) == S.apply("MUL", b, a)
    assert S.apply("SUB", a, b) != S.apply("SUB", b, a)


def test_constant_comparisons_stay_symbolic():
    guard = S.apply("LT", Const(1), Const(3))
    assert isinstance(guard, S.Op) and guard.name == "LT"
    assert S.apply("ADD", Const(1), Const(3)) == Const(4)


def test_selector_forms_agree():
    cd0 = CalldataWord(Const(0))
    via_div = S.apply("AND", S.apply("DIV", cd0, Const(1 << 224)), Const(0xFFFFFFFF))
    via_shr = S.apply("SHR", Const(224), cd0)
    assert via_div == via_shr


def test_contains_and_calldata_words():
    x = CalldataWord(Const(4))
    y = CalldataWord(S.add(x, Const(4)))
    e = S.add(S.scale(y, 32), x, Const(0x24))
    assert S.contains(e, x) and S.contains(e, y)
    assert set(S.calldata_words(e)) == {x, y}
    assert S.is_head_word(x) and not S.is_head_word(y)


def test_equivalent():
    y = CalldataWord(Const(0x44))
    ceil = S.scale(S.apply("SHR", Const(5), S.add(y, Const(31))), 32)
    via_div = S.apply("MUL", S.apply("DIV", S.add(y, Const(31)), Const(32)), Const(32))
    assert S.equivalent(ceil, via_div)
    assert not S.equivalent(ceil, S.scale(y, 32))
