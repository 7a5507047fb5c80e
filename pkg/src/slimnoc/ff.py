"""Finite fields GF(q) as explicit operation tables.

Elements are integer ids.  For prime q the id is the residue itself.  For
q = p^m the id of the polynomial c0 + c1 x + ... + c_{m-1} x^{m-1} is
sum(c_i p^i), so 0 and 1 come first and the rest follow in coefficient
lexicographic order (highest degree most significant).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd

import numpy as np


class NonPrimePower(ValueError):
    pass


class NotPrimitive(ValueError):
    pass


def prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, m) with q == p**m, or None."""
    if q < 2:
        return None
    n, p = q, None
    d = 2
    while d * d <= n:
        if n % d == 0:
            p = d
            break
        d += 1
    if p is None:
        return q, 1
    m = 0
    while n % p == 0:
        n //= p
        m += 1
    return (p, m) if n == 1 else None


def _poly_mod(a: list[int], mod: list[int], p: int) -> list[int]:
    # a, mod: little-endian coefficient lists, mod monic
    a = a[:]
    dm = len(mod) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * mod[j]) % p
    return [c % p for c in a[:dm]] + [0] * max(0, dm - len(a))


def _divides(d: list[int], a: list[int], p: int) -> bool:
    return not any(_poly_mod(a, d, p))


def _monic(p: int, deg: int):
    # monic polynomials of given degree, lower coefficients in id order
    for low in product(range(p), repeat=deg):
        yield list(reversed(low)) + [1]


def irreducible_poly(p: int, m: int) -> list[int]:
    """Smallest monic irreducible polynomial of degree m over GF(p)."""
    for cand in _monic(p, m):
        if cand[0] == 0:
            continue
        if not any(_divides(d, cand, p)
                   for deg in range(1, m // 2 + 1) for d in _monic(p, deg)):
            return cand
    raise AssertionError("no irreducible polynomial")  # unreachable


def _digits(x: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(x % p)
        x //= p
    return out


def _poly_name(c: list[int]) -> str:
    terms = []
    for i in range(len(c) - 1, -1, -1):
        if not c[i]:
            continue
        coef = "" if (c[i] == 1 and i) else str(c[i])
        mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
        terms.append(coef + mono)
    return "+".join(terms) or "0"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FieldTable:
    q: int
    char: int
    degree: int
    modulus: tuple[int, ...]
    elements: tuple[str, ...]
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray  # multiplicative inverse, inv[0] = 0 by convention

    def sub(self, a: int, b: int) -> int:
        return int(self.add[a, self.neg[b]])

    def power(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul[r, a])
        return r

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "elements": list(self.elements),
            "add": self.add.tolist(),
            "mul": self.mul.tolist(),
            "neg": self.neg.tolist(),
        }


def make_field(q: int) -> FieldTable:
    pm = prime_power(q)
    if pm is None:
        raise NonPrimePower(f"{q} is not a prime power")
    p, m = pm
    if m == 1:
        idx = np.arange(q)
        add = (idx[:, None] + idx[None, :]) % q
        mul = (idx[:, None] * idx[None, :]) % q
        names = tuple(str(i) for i in range(q))
        modulus = (0, 1)
    else:
        mod = irreducible_poly(p, m)
        modulus = tuple(mod)
        polys = [_digits(i, p, m) for i in range(q)]
        enc = {tuple(c): i for i, c in enumerate(polys)}
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(q):
                add[a, b] = enc[tuple((x + y) % p for x, y in zip(polys[a], polys[b]))]
                prod = [0] * (2 * m - 1)
                for i, x in enumerate(polys[a]):
                    for j, y in enumerate(polys[b]):
                        prod[i + j] += x * y
                mul[a, b] = enc[tuple(_poly_mod(prod, mod, p))]
        names = tuple(_poly_name(c) for c in polys)
    add = add.astype(np.int64)
    mul = mul.astype(np.int64)
    neg = np.argmin(add, axis=1).astype(np.int64)  # add[a, neg[a]] == 0
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
    return FieldTable(q, p, m, modulus, names, _readonly(add), _readonly(mul),
                      _readonly(neg), _readonly(inv))


def multiplicative_order(field: FieldTable, a: int) -> int:
    if a == 0:
        return 0
    x, n = a, 1
    while x != 1:
        x = int(field.mul[x, a])
        n += 1
    return n


def is_primitive(field: FieldTable, a: int) -> bool:
    return a != 0 and multiplicative_order(field, a) == field.q - 1


def find_generator(field: FieldTable) -> int:
    """Smallest element id generating the multiplicative group."""
    for a in range(1, field.q):
        if is_primitive(field, a):
            return a
    raise AssertionError("finite field without primitive element")


def count_generators(field: FieldTable) -> int:
    return sum(is_primitive(field, a) for a in range(1, field.q))


def totient(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


@dataclass(frozen=True)
class GeneratorSets:
    xi: int
    X: frozenset[int]
    X_prime: frozenset[int]


def field_u(q: int) -> int:
    """The u in q = 4w + u; q = 2 is reported as u = 0."""
    r = q % 4
    return {0: 0, 1: 1, 3: -1, 2: 0}[r]


def generator_sets(field: FieldTable, xi: int, u: int) -> GeneratorSets:
    """MMS generator sets for the Slim Fly family.

    u = 1:  X = even powers xi^0..xi^(q-3),  X' = odd powers xi^1..xi^(q-2)
    u = 0:  X = even powers xi^0..xi^(q-2),  X' = odd powers xi^1..xi^(q-1)
    u = -1: X = {xi^0, xi^2, .., xi^(2w-2)} + {xi^(2w-1), xi^(2w+1), .., xi^(4w-3)}
            X' = {xi^1, xi^3, .., xi^(2w-1)} + {xi^(2w), xi^(2w+2), .., xi^(4w-2)}
    """
    q = field.q
    if u not in (-1, 0, 1):
        raise ValueError(f"u must be -1, 0 or 1, got {u}")
    if not is_primitive(field, xi):
        raise NotPrimitive(f"element {field.elements[xi]} does not generate GF({q})*")
    if (q - u) % 4 and q != 2:
        raise ValueError(f"q={q} is not of the form 4w{u:+d}")
    pw = [field.power(xi, e) for e in range(q)]
    if u == 1:
        xs = range(0, q - 2, 2)
        xps = range(1, q - 1, 2)
    elif u == 0:
        xs = range(0, q - 1, 2)
        xps = range(1, q, 2)
    else:
        w = (q + 1) // 4
        xs = list(range(0, 2 * w - 1, 2)) + list(range(2 * w - 1, 4 * w - 2, 2))
        xps = list(range(1, 2 * w, 2)) + list(range(2 * w, 4 * w - 1, 2))
    return GeneratorSets(xi, frozenset(pw[e] for e in xs), frozenset(pw[e] for e in xps))
