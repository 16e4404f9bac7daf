"""Neumann-Zagier asymptotics: holonomies, volume change, complex length.

Throughout, A = p + c1 q (or x + c1 y for real generalized coefficients) and
the log-holonomies satisfy v = c1 u + c3 u^3 + c5 u^5 + c7 u^7 + ... with
p u + q v = 2 pi i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .core import (
    ComplexVal,
    CuspShape,
    DataError,
    FillingClass,
    NumericError,
    NZCoefficients,
    UnimodularMap,
    canonicalize,
    euclid_complement,
)
from .moduli import mobius_apply

TWO_PI = 2 * math.pi
PI_SQ = math.pi**2
ZERO_A_TOL = 1e-12

Pair = Union[FillingClass, Sequence[float]]


class ZeroA(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class QZero(DataError):
    pass


@dataclass(frozen=True)
class HolonomyPair:
    u: ComplexVal
    v: ComplexVal
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class VolumeChange:
    value: float
    order: int
    error_scale: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class CVolClass:
    """A complex-volume change, imaginary part taken mod pi^2."""

    re: float
    im_mod: float

    def __post_init__(self):
        if not 0 <= self.im_mod < PI_SQ:
            raise ValueError(f"im_mod {self.im_mod} outside [0, pi^2)")


def _xy(f: Pair) -> tuple:
    x, y = f
    return x, y


def _A(x, y, nz_or_c1) -> complex:
    c1 = nz_or_c1.c1 if isinstance(nz_or_c1, NZCoefficients) else nz_or_c1
    A = x + c1.z * y
    if abs(A) < ZERO_A_TOL:
        raise ZeroA(f"|A| = {abs(A):.3g} at ({x}, {y})")
    return A


def _order(nz: NZCoefficients, max_order: Optional[int], cap: int = 8) -> int:
    order = min(nz.max_order, cap)
    if max_order is not None:
        order = min(order, max_order)
    return order


def u_asymptotic(f: Pair, nz: NZCoefficients) -> ComplexVal:
    """Two-term expansion 2 pi i/A - c3 (q/A) (2 pi i/A)^3."""
    p, q = _xy(f)
    A = _A(p, q, nz)
    t = 2j * math.pi / A
    u = t
    if nz.c3 is not None:
        u -= nz.c3.z * (q / A) * t**3
    return ComplexVal.of(u)


def _series(coeffs: Sequence[complex], u: complex) -> tuple[complex, complex]:
    """v(u) and v'(u) for the odd series with the given coefficients."""
    u2 = u * u
    v = dv = 0j
    power = u  # u^(2k+1)
    dpower = 1 + 0j  # u^(2k)
    for k, c in enumerate(coeffs):
        n = 2 * k + 1
        v += c * power
        dv += n * c * dpower
        power *= u2
        dpower *= u2
    return v, dv


def solve_holonomy(f: Pair, nz: NZCoefficients, tol: float = 1e-13, max_iter: int = 64) -> HolonomyPair:
    """Solve p u + q v(u) = 2 pi i by damped Newton from u0 = 2 pi i/A.

    Raises NoConvergence when the iterate leaves |u| < 2 (the truncated
    series is no model of anything there) or max_iter runs out.
    """
    p, q = _xy(f)
    A = _A(p, q, nz)
    coeffs = nz.series()
    target = 2j * math.pi

    def resid(u):
        v, dv = _series(coeffs, u)
        return p * u + q * v - target, p + q * dv, v

    u = target / A
    F, dF, v = resid(u)
    for it in range(max_iter + 1):
        if abs(F) < tol:
            return HolonomyPair(ComplexVal.of(u), ComplexVal.of(v), abs(F), it)
        if it == max_iter:
            break
        if dF == 0:
            raise NoConvergence(f"zero derivative at u = {u}")
        step = F / dF
        for _ in range(40):
            new = u - step
            if abs(new) >= 2:
                raise NoConvergence(f"iterate left |u| < 2 at ({p}, {q})")
            nF, ndF, nv = resid(new)
            if abs(nF) <= abs(F):
                break
            step /= 2
        else:
            raise NoConvergence(f"damping failed at ({p}, {q})")
        if new == u:
            # stagnated at rounding level
            return HolonomyPair(ComplexVal.of(u), ComplexVal.of(v), abs(F), it)
        u, F, dF, v = new, nF, ndF, nv
    raise NoConvergence(f"no convergence in {max_iter} iterations at ({p}, {q}), residual {abs(F):.3g}")


def theta(f: Pair, nz: NZCoefficients, max_order: Optional[int] = None) -> VolumeChange:
    """Truncated volume change vol M(x,y) - vol M in powers of 2 pi/A."""
    x, y = _xy(f)
    A = _A(x, y, nz)
    order = _order(nz, max_order)
    c1 = nz.c1.z
    value = -c1.imag * PI_SQ / abs(A) ** 2
    if order >= 4:
        w2 = (TWO_PI / A) ** 2
        w4 = w2 * w2
        c3 = nz.c3.z
        s = 0.5 * c3 * w4
        if order >= 6:
            r = y / A
            c5 = nz.c5.z
            s += (3 * c3 * c3 * r - c5) * w4 * w2 / 3
            if order >= 8:
                c7 = nz.c7.z
                s += (12 * c3**3 * r * r - 8 * c3 * c5 * r + c7) * w4 * w4 / 4
        value += 0.25 * s.imag
    return VolumeChange(value, order, abs(A) ** -(order + 2))


def phi(x: float, y: float, nz: NZCoefficients, max_order: Optional[int] = None) -> VolumeChange:
    """Explicit real expansion of the volume change, through degree -6.

    Related to theta by theta(p, q) = phi(p + Re(c1) q, Im(c1) q).
    """
    n = x * x + y * y
    if n < ZERO_A_TOL**2:
        raise ZeroA(f"|A| = {math.sqrt(n):.3g} at ({x}, {y})")
    order = _order(nz, max_order, cap=6)
    c1 = nz.c1.z
    value = -c1.imag * PI_SQ / n
    if order >= 4:
        c3 = nz.c3.z
        n4 = n**4
        value += 2 * math.pi**4 * (
            c3.real * (-4 * x**3 * y + 4 * x * y**3) / n4
            + c3.imag * (x**4 - 6 * x**2 * y**2 + y**4) / n4
        )
    if order >= 6:
        c3sq = nz.c3.z ** 2
        c5 = nz.c5.z
        n6, n7 = n**6, n**7
        k = 3 * y / c1.imag
        value += 16 * math.pi**6 / 3 * (
            k * c3sq.real * (-7 * x**6 * y + 35 * x**4 * y**3 - 21 * x**2 * y**5 + y**7) / n7
            + k * c3sq.imag * (x**7 - 21 * x**5 * y**2 + 35 * x**3 * y**4 - 7 * x * y**6) / n7
            - c5.real * (-6 * x**5 * y + 20 * x**3 * y**3 - 6 * x * y**5) / n6
            - c5.imag * (x**6 - 15 * x**4 * y**2 + 15 * x**2 * y**4 - y**6) / n6
        )
    return VolumeChange(value, order, n ** (-(order + 2) / 2))


def _mod(x: float, m: float) -> float:
    r = x % m
    return 0.0 if r >= m else r


def complex_length(f: Pair, nz: NZCoefficients, **solver_kw) -> ComplexVal:
    """Complex length -(r u + s v) of the core geodesic, Im taken in [0, 2 pi)."""
    fc = canonicalize(*_xy(f))
    hol = solve_holonomy(fc, nz, **solver_kw)
    r, s = euclid_complement(fc)
    ell = -(r * hol.u.z + s * hol.v.z)
    return ComplexVal(ell.real, _mod(ell.imag, TWO_PI))


def complex_length_from_u(f: FillingClass, hol: HolonomyPair) -> ComplexVal:
    """Same quantity via u/q - 2 pi i s/q, or -v/p - 2 pi i r/p when q = 0."""
    r, s = euclid_complement(f)
    if f.q != 0:
        ell = hol.u.z / f.q - 2j * math.pi * s / f.q
    else:
        ell = -hol.v.z / f.p - 2j * math.pi * r / f.p
    return ComplexVal(ell.real, _mod(ell.imag, TWO_PI))


def holonomy_map(f: Pair) -> UnimodularMap:
    """g_(p,q)(z) = (s z + r)/(q z + p) as a basis change."""
    fc = canonicalize(*_xy(f))
    r, s = euclid_complement(fc)
    return UnimodularMap(fc.p, fc.q, r, s)


def holonomy_shape(f: Pair, c1: CuspShape) -> CuspShape:
    return mobius_apply(holonomy_map(f), c1)


def holonomy_point(f: Pair, c1: CuspShape) -> ComplexVal:
    """B/A = (s c1 + r)/(q c1 + p), defined up to integer translation."""
    return holonomy_shape(f, c1).value


def cvol_change_leading(f: Pair, c1: CuspShape) -> CVolClass:
    """Leading complex-volume change i pi^2 g_(p,q)(c1), mod i pi^2."""
    fc = canonicalize(*_xy(f))
    if fc.q == 0:
        raise QZero("the leading complex-volume term needs q != 0")
    g = holonomy_point(fc, c1).z
    return CVolClass(-PI_SQ * g.imag, _mod(PI_SQ * g.real, PI_SQ))


def theta_many(pairs: Iterable[Pair], nz: NZCoefficients, max_order: Optional[int] = None,
               workers: Optional[int] = None) -> list[VolumeChange]:
    """theta over many pairs; output order follows input order."""
    pairs = list(pairs)
    if not workers or workers <= 1:
        return [theta(f, nz, max_order) for f in pairs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda f: theta(f, nz, max_order), pairs))
