"""Unit-modulus scalars in two flavours, plus a small cyclotomic field.

``ExactPhase(k, n)`` stands for exp(2 pi i k / n) and multiplies by adding
exponents, so equality is decided without rounding.  ``FloatPhase`` wraps a
complex number and renormalizes after every product so long chains of
multiplications do not drift off the unit circle.

``Cyclotomic`` elements are rational combinations of n-th roots of unity
reduced modulo the n-th cyclotomic polynomial.  They are only used for
small exact matrix identities (the finite Fourier transform being unitary,
for instance); everything heavy runs in floating point.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

TWO_PI = 2.0 * math.pi


class ExactPhase:
    """exp(2 pi i k / order), stored as a reduced exponent."""

    __slots__ = ("k", "order")

    def __init__(self, k: int, order: int):
        if order <= 0:
            raise ValueError("order must be positive")
        self.k = k % order
        self.order = order

    # arithmetic -----------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, ExactPhase):
            if other.order == self.order:
                return ExactPhase(self.k + other.k, self.order)
            n = math.lcm(self.order, other.order)
            return ExactPhase(self.k * (n // self.order) + other.k * (n // other.order), n)
        if isinstance(other, FloatPhase):
            return FloatPhase(complex(self) * other.z)
        return NotImplemented

    def conj(self) -> "ExactPhase":
        return ExactPhase(-self.k, self.order)

    def __pow__(self, m: int) -> "ExactPhase":
        return ExactPhase(self.k * m, self.order)

    def __complex__(self) -> complex:
        return cmath.exp(1j * TWO_PI * self.k / self.order)

    @property
    def value(self) -> complex:
        return complex(self)

    def turns(self) -> Fraction:
        return Fraction(self.k, self.order)

    def is_one(self) -> bool:
        return self.k == 0

    # identity -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, ExactPhase):
            return self.turns() == other.turns()
        return NotImplemented

    def __hash__(self):
        return hash(self.turns())

    def __repr__(self):
        return f"ExactPhase({self.k}, {self.order})"


class FloatPhase:
    """A complex number of modulus one (renormalized on construction)."""

    __slots__ = ("z",)

    def __init__(self, z: complex):
        z = complex(z)
        r = abs(z)
        if r == 0.0:
            raise ValueError("a phase cannot be zero")
        self.z = z / r

    def __mul__(self, other):
        if isinstance(other, FloatPhase):
            return FloatPhase(self.z * other.z)
        if isinstance(other, ExactPhase):
            return FloatPhase(self.z * complex(other))
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "FloatPhase":
        return FloatPhase(self.z.conjugate())

    def __pow__(self, m: int) -> "FloatPhase":
        return FloatPhase(self.z**m)

    def __complex__(self) -> complex:
        return self.z

    @property
    def value(self) -> complex:
        return self.z

    def is_one(self, tol: float = 0.0) -> bool:
        return abs(self.z - 1.0) <= tol

    def __repr__(self):
        return f"FloatPhase({self.z!r})"


Phase = Union[ExactPhase, FloatPhase]

ONE = ExactPhase(0, 1)


def phase_error(a: Phase, b: Phase) -> float:
    """Distance between two phases; exactly 0.0 when exact phases coincide."""
    if isinstance(a, ExactPhase) and isinstance(b, ExactPhase):
        if a == b:
            return 0.0
    return abs(complex(a) - complex(b))


def phase_product(*factors: Phase) -> Phase:
    out: Phase = ONE
    for f in factors:
        out = out * f
    return out


def to_exponent(value: Phase, order: int) -> int:
    """Exponent k with value = exp(2 pi i k / order); exact phases only."""
    if not isinstance(value, ExactPhase):
        raise TypeError("only exact phases carry an exponent")
    t = value.turns() * order
    if t.denominator != 1:
        raise ValueError(f"{value!r} is not an {order}-th root of unity")
    return int(t.numerator) % order


# ---------------------------------------------------------------------------
# cyclotomic field Q(zeta_n)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_divide(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % lead:
            raise ArithmeticError("inexact polynomial division")
        c //= lead
        out[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    if any(num[: len(den) - 1]):
        raise ArithmeticError("nonzero remainder")
    return out


class Cyclotomic:
    """Element of Q(zeta_n) in the power basis 1, zeta, ..., zeta^(deg-1)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs):
        self.n = n
        self.coeffs = _reduce(n, [Fraction(c) for c in coeffs])

    @classmethod
    def zero(cls, n: int) -> "Cyclotomic":
        return cls(n, [])

    @classmethod
    def rational(cls, n: int, r) -> "Cyclotomic":
        return cls(n, [Fraction(r)])

    @classmethod
    def root(cls, n: int, k: int) -> "Cyclotomic":
        k %= n
        return cls(n, [0] * k + [1])

    @classmethod
    def from_phase(cls, n: int, ph: ExactPhase) -> "Cyclotomic":
        return cls.root(n, to_exponent(ph, n))

    def _check(self, other: "Cyclotomic"):
        if self.n != other.n:
            raise ValueError("cyclotomic orders differ")

    def __add__(self, other):
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        self._check(other)
        m = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (m - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (m - len(other.coeffs))
        return Cyclotomic(self.n, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Cyclotomic(self.n, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.n, [c * other for c in self.coeffs])
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        self._check(other)
        if not self.coeffs or not other.coeffs:
            return Cyclotomic.zero(self.n)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Cyclotomic(self.n, out)

    __rmul__ = __mul__

    def conj(self) -> "Cyclotomic":
        out = Cyclotomic.zero(self.n)
        for k, c in enumerate(self.coeffs):
            if c:
                out = out + Cyclotomic.root(self.n, -k) * c
        return out

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.n == other.n and (self - other).is_zero()
        if isinstance(other, (int, Fraction)):
            return self == Cyclotomic.rational(self.n, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def __complex__(self):
        z = cmath.exp(1j * TWO_PI / self.n)
        return complex(sum(float(c) * z**k for k, c in enumerate(self.coeffs)))

    def __repr__(self):
        return f"Cyclotomic({self.n}, {[str(c) for c in self.coeffs]})"


def _reduce(n: int, coeffs: list[Fraction]) -> tuple[Fraction, ...]:
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    c = list(coeffs)
    # phi is monic, so plain long division works over the rationals
    for i in range(len(c) - 1, deg - 1, -1):
        lead = c[i]
        if lead:
            for j, pj in enumerate(phi):
                c[i - deg + j] -= lead * pj
    c = c[:deg]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def exact_matmul(a: list[list[Cyclotomic]], b: list[list[Cyclotomic]]) -> list[list[Cyclotomic]]:
    n = a[0][0].n
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = Cyclotomic.zero(n)
            for k in range(inner):
                if a[i][k].coeffs and b[k][j].coeffs:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def exact_adjoint(a: list[list[Cyclotomic]]) -> list[list[Cyclotomic]]:
    return [[a[i][j].conj() for i in range(len(a))] for j in range(len(a[0]))]
