"""Random single-function fixtures built from the accessor library."""

import random

from sigscope.abi import Address, Bool, Bytes, BytesN, Decimal, DynArray, Int, StaticArray, String, Tuple, UInt, VyperBytes, VyperString, array_of


def random_word(rng: random.Random, vyper: bool = False):
    if vyper:
        return rng.choice([UInt(), Address(), Int(128), Decimal(), Bool(), BytesN(32)])
    k = rng.randrange(6)
    if k == 0:
        return UInt(8 * rng.randint(1, 32))
    if k == 1:
        return Int(8 * rng.randint(1, 32))
    if k == 2:
        return Address()
    if k == 3:
        return Bool()
    return BytesN(rng.randint(1, 32))


def random_param(rng: random.Random, mode: str):
    r = rng.random()
    w = random_word(rng)
    if r < 0.4:
        return w
    if r < 0.55:
        return array_of(w, [rng.randint(1, 3) for _ in range(rng.randint(1, 2 if mode == "public" else 3))])
    if r < 0.7:
        inner = [rng.randint(1, 3) for _ in range(rng.randint(0, 1))]
        return array_of(w, [None, *inner])
    if r < 0.8:
        return rng.choice([Bytes(), String()])
    if mode == "public":
        return w
    if r < 0.9:
        return array_of(w, [rng.choice([None, 2]), None])
    return Tuple((DynArray(w), *[random_word(rng) for _ in range(rng.randint(1, 2))]))


def random_params(rng: random.Random, vyper: bool = False, mode: str = "external"):
    n = rng.randint(1, 4)
    if vyper:
        out = []
        for _ in range(n):
            r = rng.random()
            if r < 0.6:
                out.append(random_word(rng, True))
            elif r < 0.8:
                out.append(StaticArray(rng.choice([UInt(), Address(), Int(128)]), rng.randint(1, 3)))
            else:
                out.append((VyperBytes if rng.random() < 0.5 else VyperString)(rng.randint(1, 80)))
        return out
    return [random_param(rng, mode) for _ in range(n)]
