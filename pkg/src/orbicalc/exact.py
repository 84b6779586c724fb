"""Exact arithmetic over cyclotomic fields Q(zeta_N) and over Z[1/n].

Cyclotomic numbers are stored as reduced residues modulo the N-th cyclotomic
polynomial, with Fraction coefficients in the power basis 1, z, ..., z^(phi(N)-1)
where z = zeta_N.  All arithmetic is exact; floating point appears only in the
optional complex-embedding sanity helpers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi needs a positive integer")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of n in increasing order."""
    n = abs(int(n))
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def divisors(n: int) -> list[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def support_divides(value: int, n: int) -> bool:
    """True if every prime divisor of value divides n (value != 0)."""
    v = abs(int(value))
    if v == 0:
        return False
    for p in prime_factors(n):
        while v % p == 0:
            v //= p
    return v == 1


def is_n_local(q: Fraction, n: int) -> bool:
    """True if q lies in Z[1/n]: the denominator's prime support divides n."""
    d = q.denominator
    return d == 1 or support_divides(d, n)


@dataclass(frozen=True)
class LocalizedScalar:
    """Element of Z[1/n]: a reduced fraction whose denominator is n-smooth."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if math.gcd(self.numerator, self.denominator) != 1:
            raise ValueError("fraction not reduced")

    @classmethod
    def from_fraction(cls, q: Fraction, n: int) -> "LocalizedScalar":
        if not is_n_local(q, n):
            raise ValueError(f"{q} is not in Z[1/{n}]")
        return cls(q.numerator, q.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


# ---------------------------------------------------------------------------
# integer polynomial helpers (ascending coefficient lists)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, ascending, computed by exact division of x^n - 1."""
    if n < 1:
        raise ValueError("conductor must be positive")
    if n == 1:
        return (-1, 1)
    # x^n - 1 divided by the product of Phi_d for proper divisors d of n
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1
    for d in range(1, n):
        if n % d == 0:
            num = _int_poly_divexact(num, cyclotomic_polynomial(d))
    return tuple(num)


def _int_poly_divexact(num: Sequence[int], den: Sequence[int]) -> list[int]:
    num = list(num)
    den = list(den)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c, r = divmod(num[i + len(den) - 1], den[-1])
        if r != 0:
            raise ArithmeticError("non-exact polynomial division")
        q[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num):
        raise ArithmeticError("non-exact polynomial division")
    return q


def _frac_poly_mod(coeffs: list[Fraction], modulus: Sequence[int]) -> list[Fraction]:
    """Remainder of a Fraction polynomial modulo a monic integer polynomial."""
    deg_m = len(modulus) - 1
    r = list(coeffs)
    for i in range(len(r) - 1, deg_m - 1, -1):
        c = r[i]
        if c:
            for j in range(deg_m + 1):
                r[i - deg_m + j] -= c * modulus[j]
    del r[deg_m:]
    while len(r) < deg_m:
        r.append(Fraction(0))
    return r


def _frac_poly_divmod(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    db = len(b) - 1
    while db >= 0 and b[db] == 0:
        db -= 1
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead = b[db]
    q = [Fraction(0)] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        c = a[-1] / lead
        k = len(a) - 1 - db
        q[k] = c
        for j in range(db + 1):
            a[k + j] -= c * b[j]
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _frac_poly_ext_gcd(a: list[Fraction], b: list[Fraction]):
    """Extended Euclid over Q[x]: returns (g, s, t) with s*a + t*b = g."""
    r0, r1 = list(a), list(b)
    s0, s1 = [Fraction(1)], [Fraction(0)]
    t0, t1 = [Fraction(0)], [Fraction(1)]
    while any(r1):
        q, r = _frac_poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _frac_poly_sub(s0, _frac_poly_mul(q, s1))
        t0, t1 = t1, _frac_poly_sub(t0, _frac_poly_mul(q, t1))
    return r0, s0, t0


def _frac_poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _frac_poly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] -= y
    return out


# ---------------------------------------------------------------------------
# Cyclotomic numbers
# ---------------------------------------------------------------------------

class Cyclotomic:
    """Exact element of Q(zeta_N), reduced modulo Phi_N.

    The conductor is part of the value; mixed-conductor arithmetic lifts both
    operands to the lcm conductor first.
    """

    __slots__ = ("conductor", "coeffs")

    def __init__(self, conductor: int, coeffs: Iterable[Fraction]):
        coeffs = [Fraction(c) for c in coeffs]
        deg = euler_phi(conductor)
        if len(coeffs) > deg:
            coeffs = _frac_poly_mod(coeffs, cyclotomic_polynomial(conductor))
        while len(coeffs) < deg:
            coeffs.append(Fraction(0))
        object.__setattr__(self, "conductor", conductor)
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, *args):
        raise AttributeError("Cyclotomic values are immutable")

    # -- constructors --------------------------------------------------
    @classmethod
    def zeta(cls, n: int, power: int = 1) -> "Cyclotomic":
        power %= n
        coeffs = [Fraction(0)] * (power + 1)
        coeffs[power] = Fraction(1)
        return cls(n, coeffs)

    @classmethod
    def rational(cls, q, conductor: int = 1) -> "Cyclotomic":
        return cls(conductor, [Fraction(q)])

    # -- structural helpers --------------------------------------------
    def lift(self, conductor: int) -> "Cyclotomic":
        """Rewrite in Q(zeta_M) for a multiple M of the conductor."""
        if conductor == self.conductor:
            return self
        if conductor % self.conductor != 0:
            raise ValueError("can only lift to a multiple of the conductor")
        step = conductor // self.conductor
        out = [Fraction(0)] * (len(self.coeffs) * step)
        for i, c in enumerate(self.coeffs):
            if c:
                out[i * step] += c
        return Cyclotomic(conductor, out)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    # -- ring operations -----------------------------------------------
    def _match(self, other) -> tuple["Cyclotomic", "Cyclotomic"]:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other, self.conductor)
        if not isinstance(other, Cyclotomic):
            return NotImplemented, NotImplemented
        if self.conductor == other.conductor:
            return self, other
        m = _lcm(self.conductor, other.conductor)
        return self.lift(m), other.lift(m)

    def __add__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        return Cyclotomic(a.conductor, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.conductor, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        return Cyclotomic(a.conductor, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._match(other)
        if a is NotImplemented:
            return NotImplemented
        prod = _frac_poly_mul(a.coeffs, b.coeffs)
        return Cyclotomic(a.conductor, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other, self.conductor)
        return self * other.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = Cyclotomic.rational(1, self.conductor)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("cyclotomic division by zero")
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.conductor)]
        g, s, _ = _frac_poly_ext_gcd(list(self.coeffs), phi)
        # g is a nonzero constant since Phi_N is irreducible over Q
        if len([c for c in g if c != 0]) != 1 or g[0] == 0:
            raise ArithmeticError("inverse failed: gcd with Phi_N not constant")
        inv = [c / g[0] for c in s]
        return Cyclotomic(self.conductor, inv)

    def galois(self, a: int) -> "Cyclotomic":
        """Apply the automorphism zeta_N -> zeta_N^a; requires gcd(a, N) = 1."""
        n = self.conductor
        if math.gcd(a, n) != 1:
            raise ValueError(f"galois exponent {a} not coprime to conductor {n}")
        out = [Fraction(0)] * n
        for i, c in enumerate(self.coeffs):
            if c:
                out[(a * i) % n] += c
        return Cyclotomic(n, out)

    def conj(self) -> "Cyclotomic":
        """Complex conjugation zeta -> zeta^{-1}."""
        return self.galois(self.conductor - 1 if self.conductor > 1 else 1)

    # -- comparisons / misc ----------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._match(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.conductor, self.coeffs))

    def __bool__(self):
        return not self.is_zero()

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.conductor)
        return sum(float(c) * z**i for i, c in enumerate(self.coeffs))

    def sort_key(self):
        return (self.conductor, self.coeffs)

    def __repr__(self):
        if self.is_rational():
            return f"Cyc({self.coeffs[0]})"
        terms = " + ".join(
            f"{c}*z{self.conductor}^{i}" for i, c in enumerate(self.coeffs) if c
        )
        return f"Cyc({terms})"


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def cyclotomic_arith(op: str, x: Cyclotomic, y: Cyclotomic | None = None,
                     a: int | None = None) -> Cyclotomic:
    """Dispatcher for the four supported field operations.

    op is one of "add", "mul", "inverse", "conj_a"; "conj_a" takes the Galois
    exponent in `a` and requires gcd(a, conductor) = 1.
    """
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inverse":
        return x.inverse()
    if op == "conj_a":
        if a is None:
            raise ValueError("conj_a requires the exponent a")
        return x.galois(a)
    raise ValueError(f"unknown cyclotomic operation {op!r}")
