"""Modular group action on cusp shapes and reduction to the standard domain.

The standard domain is the usual half-open fundamental domain of PSL(2, Z):

    0 <= Re(c) <= 1/2 and |c|^2 >= 1,   or   -1/2 < Re(c) < 0 and |c|^2 > 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ComplexVal, CuspShape, DataError, NumericError, UnimodularMap

OMEGA = complex(0.5, math.sqrt(3) / 2)
MAX_REDUCTION_STEPS = 10_000


class DegenerateDenominator(NumericError):
    pass


class NonConvergence(NumericError):
    pass


class NotStandard(DataError):
    pass


class ShapeClass(enum.Enum):
    Generic = "Generic"
    I = "I"  # noqa: E741
    Omega = "Omega"


class Boundary(enum.Enum):
    ReZero = "ReZero"
    ReHalf = "ReHalf"
    UnitNorm = "UnitNorm"


@dataclass(frozen=True)
class ReductionResult:
    standard_shape: CuspShape
    word: UnimodularMap
    steps: tuple[str, ...] = field(default_factory=tuple)


def _exact_image(g: UnimodularMap, re: Fraction, n: Fraction) -> tuple[Fraction, Fraction]:
    a, b, c, d = g.a, g.b, g.c, g.d
    den = a * a + 2 * a * b * re + b * b * n
    new_re = (a * c + b * d * n + (b * c + a * d) * re) / den
    new_n = (c * c + 2 * c * d * re + d * d * n) / den
    return new_re, new_n


def shape_from_exact(re: Fraction, n: Fraction, precision_hint: int = 15) -> CuspShape:
    return CuspShape(ComplexVal(float(re), math.sqrt(n - re * re), precision_hint), re, n)


def apply_rounded(g: UnimodularMap, z: complex) -> complex:
    """(c + d z)/(a + b z) evaluated exactly on the binary value of z, then rounded.

    Long words have large entries and the float formula loses digits to
    cancellation in a + b z; this keeps the image correctly rounded.
    """
    x, y = Fraction(z.real), Fraction(z.imag)
    u, w = g.c + g.d * x, g.a + g.b * x
    den = w * w + (g.b * y) ** 2
    if den == 0:
        raise DegenerateDenominator(f"a + b c1 = 0 for {g}")
    return complex(float((u * w + g.d * g.b * y * y) / den), float(y / den))


def mobius_apply(g: UnimodularMap, c: CuspShape) -> CuspShape:
    """Image of c under the basis change g, i.e. (c + d c1)/(a + b c1)."""
    z = c.z
    den = g.a + g.b * z
    if abs(den) < 1e-15:
        raise DegenerateDenominator(f"|a + b c1| = {abs(den):.3g} for {g}")
    hint = c.value.precision_hint
    if c.is_exact:
        re, n = _exact_image(g, c.re_exact, c.norm_sq_exact)
        return shape_from_exact(re, n, hint)
    return CuspShape(ComplexVal.of(apply_rounded(g, z), hint))


def is_standard(c: CuspShape, eps: float = 1e-12) -> bool:
    if c.is_exact:
        re, n = c.re_exact, c.norm_sq_exact
        return (0 <= re <= Fraction(1, 2) and n >= 1) or (Fraction(-1, 2) < re < 0 and n > 1)
    return _float_standard(c.z, eps)


def _reduce_float(z0: complex, eps: float):
    z = z0
    word = UnimodularMap.identity()
    steps = []

    def act(g, token):
        nonlocal z, word
        z = g.apply_complex(z)
        word = g @ word
        steps.append(token)

    budget = MAX_REDUCTION_STEPS
    while True:
        for _ in range(budget):
            budget -= 1
            n = -math.floor(z.real + 0.5)
            if n:
                act(UnimodularMap.T(n), f"T^{n}")
            if abs(z) ** 2 < 1 - eps:
                act(UnimodularMap.S(), "S")
                continue
            break
        else:
            raise NonConvergence(f"no reduction after {MAX_REDUCTION_STEPS} steps")
        if abs(z.real + 0.5) <= eps:
            act(UnimodularMap.T(1), "T^1")
        if abs(abs(z) ** 2 - 1) <= eps and z.real < -eps:
            act(UnimodularMap.S(), "S")
        # the stepwise value drifts on long words; recompute from the word
        z = apply_rounded(word, z0)
        if _float_standard(z, eps) or budget <= 0:
            return z, word, steps


def _float_standard(z: complex, eps: float) -> bool:
    x, n = z.real, abs(z) ** 2
    if x >= -eps:
        return x <= 0.5 + eps and n >= 1 - eps
    return x > -0.5 + eps and n > 1 + eps


def _reduce_exact(re: Fraction, n: Fraction):
    word = UnimodularMap.identity()
    steps = []
    half = Fraction(1, 2)

    def act(g, token):
        nonlocal re, n, word
        re, n = _exact_image(g, re, n)
        word = g @ word
        steps.append(token)

    for _ in range(MAX_REDUCTION_STEPS):
        k = -math.floor(re + half)
        if k:
            act(UnimodularMap.T(k), f"T^{k}")
        if n < 1:
            act(UnimodularMap.S(), "S")
            continue
        break
    else:
        raise NonConvergence(f"no reduction after {MAX_REDUCTION_STEPS} steps")
    if re == -half:
        act(UnimodularMap.T(1), "T^1")
    if n == 1 and re < 0:
        act(UnimodularMap.S(), "S")
    return re, n, word, steps


def reduce_to_fundamental(c: CuspShape, eps: float = 1e-12) -> ReductionResult:
    """Move c into the standard domain by translations and inversions.

    Exact shapes are reduced in exact arithmetic; float shapes use eps for the
    boundary decisions.  Shapes within eps of the excluded left boundary are
    pushed onto the included right boundary.
    """
    hint = c.value.precision_hint
    if c.is_exact:
        re, n, word, steps = _reduce_exact(c.re_exact, c.norm_sq_exact)
        return ReductionResult(shape_from_exact(re, n, hint), word, tuple(steps))
    z, word, steps = _reduce_float(c.z, eps)
    return ReductionResult(CuspShape(ComplexVal.of(z, hint)), word, tuple(steps))


def elliptic_class(c: CuspShape, eps: float = 1e-9) -> ShapeClass:
    if not is_standard(c, eps):
        raise NotStandard(f"{c.z} is not in the standard domain")
    if c.is_exact:
        if c.norm_sq_exact == 1 and c.re_exact == 0:
            return ShapeClass.I
        if c.norm_sq_exact == 1 and c.re_exact == Fraction(1, 2):
            return ShapeClass.Omega
        return ShapeClass.Generic
    if abs(c.z - 1j) < eps:
        return ShapeClass.I
    if abs(c.z - OMEGA) < eps:
        return ShapeClass.Omega
    return ShapeClass.Generic


def boundary_class(c: CuspShape, eps: float = 1e-9) -> frozenset[Boundary]:
    """Which of Re = 0, Re = 1/2, |c| = 1 the shape lies on."""
    out = set()
    if c.is_exact:
        re, n = c.re_exact, c.norm_sq_exact
        if re == 0:
            out.add(Boundary.ReZero)
        if re == Fraction(1, 2):
            out.add(Boundary.ReHalf)
        if n == 1:
            out.add(Boundary.UnitNorm)
        return frozenset(out)
    z = c.z
    if abs(z.real) < eps:
        out.add(Boundary.ReZero)
    if abs(z.real - 0.5) < eps:
        out.add(Boundary.ReHalf)
    if abs(abs(z) - 1) < eps:
        out.add(Boundary.UnitNorm)
    return frozenset(out)
