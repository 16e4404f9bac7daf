"""Shared value types: exact rationals, complex values, cusp shapes, filling classes.

Everything here is an immutable value.  Exact data rides alongside the floats
where it exists (rational real part and rational squared modulus of a cusp
shape) so that downstream code can do exact comparisons instead of tolerance
games.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

SHAPE_EXACT_TOL = 1e-10


class DehnFillError(Exception):
    """Base class for all library errors."""


class DataError(DehnFillError):
    """Input data violates an invariant."""


class NumericError(DehnFillError):
    """A numerical procedure failed (non-convergence, degenerate denominator)."""


class NotCoprime(DataError):
    pass


class ZeroPair(DataError):
    pass


class BadMatrix(DataError):
    pass


class InvariantViolation(DataError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to build an exact rational from a float")
    return Fraction(x)


@dataclass(frozen=True)
class ComplexVal:
    re: float
    im: float
    precision_hint: int = 15

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise InvariantViolation("ComplexVal", f"non-finite component ({self.re}, {self.im})")

    @classmethod
    def of(cls, z: complex, precision_hint: int = 15) -> "ComplexVal":
        z = complex(z)
        return cls(z.real, z.imag, precision_hint)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return abs(self.z)


@dataclass(frozen=True)
class CuspShape:
    """A point of the upper half-plane, optionally with exact Re and |.|^2."""

    value: ComplexVal
    re_exact: Optional[Fraction] = None
    norm_sq_exact: Optional[Fraction] = None

    def __post_init__(self):
        z = self.value.z
        if not z.imag > 0:
            raise InvariantViolation("c1", f"imaginary part must be positive, got {z.imag!r}")
        if self.re_exact is not None and abs(z.real - float(self.re_exact)) > SHAPE_EXACT_TOL:
            raise InvariantViolation("re_exact", f"{self.re_exact} disagrees with {z.real!r}")
        if self.norm_sq_exact is not None:
            if abs(abs(z) ** 2 - float(self.norm_sq_exact)) > SHAPE_EXACT_TOL * max(1.0, abs(z) ** 2):
                raise InvariantViolation("norm_sq_exact", f"{self.norm_sq_exact} disagrees with {abs(z) ** 2!r}")
        if self.is_exact and self.norm_sq_exact <= self.re_exact**2:
            raise InvariantViolation("norm_sq_exact", "exact data does not describe an upper half-plane point")

    @classmethod
    def from_complex(cls, z: complex, precision_hint: int = 15) -> "CuspShape":
        return cls(ComplexVal.of(z, precision_hint))

    @classmethod
    def from_exact(cls, re: RationalLike, norm_sq: RationalLike) -> "CuspShape":
        """Build a quadratic shape from its rational real part and squared modulus."""
        re, norm_sq = as_rational(re), as_rational(norm_sq)
        im_sq = norm_sq - re * re
        if im_sq <= 0:
            raise InvariantViolation("norm_sq_exact", "norm_sq must exceed re^2")
        return cls(ComplexVal(float(re), math.sqrt(im_sq)), re, norm_sq)

    @property
    def z(self) -> complex:
        return self.value.z

    @property
    def is_exact(self) -> bool:
        return self.re_exact is not None and self.norm_sq_exact is not None

    def require_exact(self) -> tuple[Fraction, Fraction]:
        if not self.is_exact:
            raise DataError("this operation needs exact Re(c1) and |c1|^2")
        return self.re_exact, self.norm_sq_exact


@dataclass(frozen=True)
class NZCoefficients:
    """Odd coefficients of v = c1 u + c3 u^3 + c5 u^5 + c7 u^7 + ...

    A missing coefficient means "unknown", not zero; the series is usable up to
    the first gap.
    """

    c1: CuspShape
    c3: Optional[ComplexVal] = None
    c5: Optional[ComplexVal] = None
    c7: Optional[ComplexVal] = None

    @property
    def max_order(self) -> int:
        order = 2
        for c in (self.c3, self.c5, self.c7):
            if c is None:
                break
            order += 2
        return order

    def series(self) -> list[complex]:
        """The usable coefficients [c1, c3, ...] up to the first gap."""
        out = [self.c1.z]
        for c in (self.c3, self.c5, self.c7):
            if c is None:
                break
            out.append(c.z)
        return out

    def truncated(self, max_order: int) -> "NZCoefficients":
        """Drop coefficients whose terms lie beyond (2pi/A)^max_order."""
        keep = (max_order - 2) // 2
        cs = [self.c3, self.c5, self.c7]
        cs = [c if i < keep else None for i, c in enumerate(cs)]
        return NZCoefficients(self.c1, *cs)


@dataclass(frozen=True, order=True)
class FillingClass:
    """A coprime pair (p, q) up to overall sign, stored in canonical form."""

    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 and self.q == 0:
            raise ZeroPair("(0, 0) is not a filling coefficient")
        if math.gcd(self.p, self.q) != 1:
            raise NotCoprime(f"({self.p}, {self.q}) is not coprime")
        if not (self.q > 0 or (self.q == 0 and self.p > 0)):
            raise InvariantViolation("FillingClass", f"({self.p}, {self.q}) is not the canonical sign")

    def __iter__(self):
        return iter((self.p, self.q))

    def __str__(self):
        return f"({self.p},{self.q})"

    @property
    def height(self) -> int:
        return abs(self.p) + abs(self.q)


def canonicalize(p: int, q: int) -> FillingClass:
    if p == 0 and q == 0:
        raise ZeroPair("(0, 0) is not a filling coefficient")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"({p}, {q}) is not coprime")
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return FillingClass(p, q)


def euclid_complement(f: FillingClass) -> tuple[int, int]:
    """Integers (r, s) with p*s - q*r = 1, normalized so that 0 <= s < |q|."""
    p, q = f.p, f.q
    if q == 0:
        return 0, p  # p == 1 for a canonical class
    s = pow(p, -1, abs(q)) if abs(q) > 1 else 0
    r, rem = divmod(p * s - 1, q)
    assert rem == 0
    return r, s


@dataclass(frozen=True)
class UnimodularMap:
    """Basis change m~ = m^a l^b, l~ = m^c l^d with ad - bc = 1.

    Acts on shapes by c1 -> (c + d c1)/(a + b c1) and on filling coefficients
    by (p, q) -> (d p - c q, -b p + a q).  As a Mobius transformation this is
    the matrix [[d, c], [b, a]].
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise BadMatrix(f"determinant of {self} is not 1")

    @classmethod
    def identity(cls) -> "UnimodularMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def S(cls) -> "UnimodularMap":
        return cls(0, 1, -1, 0)

    @classmethod
    def T(cls, n: int = 1) -> "UnimodularMap":
        return cls(1, 0, n, 1)

    @classmethod
    def from_mobius(cls, m: tuple[tuple[int, int], tuple[int, int]]) -> "UnimodularMap":
        (d, c), (b, a) = m
        return cls(a, b, c, d)

    def mobius(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.d, self.c), (self.b, self.a))

    def then(self, other: "UnimodularMap") -> "UnimodularMap":
        """Composite map: apply self first, then other."""
        (a1, b1), (c1, d1) = other.mobius()
        (a2, b2), (c2, d2) = self.mobius()
        return UnimodularMap.from_mobius(
            ((a1 * a2 + b1 * c2, a1 * b2 + b1 * d2), (c1 * a2 + d1 * c2, c1 * b2 + d1 * d2))
        )

    def __matmul__(self, other: "UnimodularMap") -> "UnimodularMap":
        # function composition: (g @ h)(z) = g(h(z))
        return other.then(self)

    def inverse(self) -> "UnimodularMap":
        return UnimodularMap(self.d, -self.b, -self.c, self.a)

    def apply_complex(self, z: complex) -> complex:
        den = self.a + self.b * z
        return (self.c + self.d * z) / den

    def push_filling(self, p: int, q: int) -> tuple[int, int]:
        return self.d * p - self.c * q, -self.b * p + self.a * q

    def pull_filling(self, pt: int, qt: int) -> tuple[int, int]:
        return self.a * pt + self.c * qt, self.b * pt + self.d * qt

    def __str__(self):
        return f"(a,b,c,d)=({self.a},{self.b},{self.c},{self.d})"
