"""Partner maps: filling transformations predicted to preserve volume.

Maps are rational 2x2 matrices acting on column vectors (p, q).  A map is
only defined on pairs where the image is integral; those divisibility
conditions are derived from the matrix itself.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .core import (
    CuspShape,
    FillingClass,
    NotCoprime,
    UnimodularMap,
    ZeroPair,
    as_rational,
    canonicalize,
)
from .moduli import (
    Boundary,
    ShapeClass,
    boundary_class,
    elliptic_class,
    is_standard,
    mobius_apply,
    reduce_to_fundamental,
)

RATIONAL_RESIDUAL = 1e-9


class PartnerKind(enum.Enum):
    EqualCVol = "EqualCVol"
    ConjCVol = "ConjCVol"
    RationalRe = "RationalRe"
    MobiusConjugated = "MobiusConjugated"


Matrix = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


def _mat(rows) -> Matrix:
    (a, b), (c, d) = rows
    return ((as_rational(a), as_rational(b)), (as_rational(c), as_rational(d)))


def _matmul(x: Matrix, y: Matrix) -> Matrix:
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2)) for i in range(2)
    )


@dataclass(frozen=True)
class Congruence:
    """The condition a p + b q = 0 (mod n)."""

    a: int
    b: int
    n: int

    def holds(self, p: int, q: int) -> bool:
        return (self.a * p + self.b * q) % self.n == 0

    def __str__(self):
        terms = []
        for coef, var in ((self.a, "p"), (self.b, "q")):
            if coef % self.n:
                terms.append(var if coef == 1 else f"{coef}{var}")
        lhs = " + ".join(terms) or "0"
        return f"{lhs} = 0 (mod {self.n})"


def _row_congruence(row) -> Optional[Congruence]:
    n = math.lcm(row[0].denominator, row[1].denominator)
    if n == 1:
        return None
    return Congruence(int(row[0] * n) % n, int(row[1] * n) % n, n)


@dataclass(frozen=True)
class PartnerMap:
    kind: PartnerKind
    matrix_action: Matrix
    provenance: str
    divisibility: tuple[Congruence, ...] = field(default=())

    def __post_init__(self):
        m = _mat(self.matrix_action)
        object.__setattr__(self, "matrix_action", m)
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        if abs(det) != 1:
            raise ValueError(f"partner matrix must have determinant +-1, got {det}")
        if not self.divisibility:
            conds = tuple(dict.fromkeys(c for c in map(_row_congruence, m) if c is not None))
            object.__setattr__(self, "divisibility", conds)

    @classmethod
    def of(cls, kind: PartnerKind, rows, provenance: str) -> "PartnerMap":
        return cls(kind, _mat(rows), provenance)

    def raw(self, p: int, q: int) -> tuple[Fraction, Fraction]:
        (a, b), (c, d) = self.matrix_action
        return a * p + b * q, c * p + d * q

    def failed_conditions(self, f) -> list[Congruence]:
        p, q = f
        return [c for c in self.divisibility if not c.holds(p, q)]

    def apply(self, f) -> Optional[FillingClass]:
        """Image of f, or None when it is not an integral coprime pair."""
        x, y = self.raw(*f)
        if x.denominator != 1 or y.denominator != 1:
            return None
        try:
            return canonicalize(int(x), int(y))
        except (NotCoprime, ZeroPair):
            return None

    def then(self, other: "PartnerMap", kind=None, provenance=None) -> "PartnerMap":
        """Apply self first, then other."""
        return PartnerMap(
            kind or PartnerKind.MobiusConjugated,
            _matmul(other.matrix_action, self.matrix_action),
            provenance or f"{self.provenance};{other.provenance}",
        )


# equal complex volume
EQ_I = PartnerMap.of(PartnerKind.EqualCVol, ((0, -1), (1, 0)), "equal-cvol:I")
EQ_OMEGA_1 = PartnerMap.of(PartnerKind.EqualCVol, ((0, -1), (1, 1)), "equal-cvol:Omega")
EQ_OMEGA_2 = PartnerMap.of(PartnerKind.EqualCVol, ((-1, -1), (1, 0)), "equal-cvol:Omega")

# conjugate complex volume
CONJ_RE_ZERO = PartnerMap.of(PartnerKind.ConjCVol, ((-1, 0), (0, 1)), "conj-cvol:ReZero")
CONJ_RE_HALF = PartnerMap.of(PartnerKind.ConjCVol, ((-1, -1), (0, 1)), "conj-cvol:ReHalf")
CONJ_UNIT = PartnerMap.of(PartnerKind.ConjCVol, ((0, 1), (1, 0)), "conj-cvol:UnitNorm")
CONJ_OMEGA = PartnerMap.of(PartnerKind.ConjCVol, ((-1, 0), (1, 1)), "conj-cvol:Omega")

# found numerically for t12031 (c1 = (-1+8i)/5); stored, not derived
ECCENTRIC_T12031 = PartnerMap.of(
    PartnerKind.MobiusConjugated,
    ((Fraction(-1, 8), Fraction(13, 8)), (Fraction(-5, 8), Fraction(1, 8))),
    "fixture:t12031",
)


def equal_cvol_maps(shape_class: ShapeClass) -> list[PartnerMap]:
    if shape_class is ShapeClass.I:
        return [EQ_I]
    if shape_class is ShapeClass.Omega:
        return [EQ_OMEGA_1, EQ_OMEGA_2]
    return []


def conj_cvol_maps(boundary: Iterable[Boundary], shape_class: ShapeClass = ShapeClass.Generic) -> list[PartnerMap]:
    boundary = set(boundary)
    if shape_class is ShapeClass.I:
        boundary |= {Boundary.ReZero, Boundary.UnitNorm}
    if shape_class is ShapeClass.Omega:
        boundary |= {Boundary.ReHalf, Boundary.UnitNorm}
    out = []
    if Boundary.ReZero in boundary:
        out.append(CONJ_RE_ZERO)
    if Boundary.ReHalf in boundary:
        out.append(CONJ_RE_HALF)
    if shape_class is ShapeClass.Omega:
        out.append(CONJ_OMEGA)
    if Boundary.UnitNorm in boundary:
        out.append(CONJ_UNIT)
    return out


def equal_cvol_partners(f: FillingClass, shape_class: ShapeClass) -> set[FillingClass]:
    return {f} | {m.apply(f) for m in equal_cvol_maps(shape_class)}


def conj_cvol_partners(f: FillingClass, boundary: Iterable[Boundary],
                       shape_class: ShapeClass = ShapeClass.Generic) -> set[FillingClass]:
    return {m.apply(f) for m in conj_cvol_maps(boundary, shape_class)}


def rational_re_map(re) -> PartnerMap:
    """(p, q) -> (p + 2 re q, -q)."""
    re = as_rational(re)
    return PartnerMap.of(PartnerKind.RationalRe, ((1, 2 * re), (0, -1)), f"rational-re:{re}")


def rational_re_partner(f, re) -> Optional[FillingClass]:
    return rational_re_map(re).apply(f)


def conjugated_map(g: UnimodularMap, new_re) -> PartnerMap:
    """Pull back the rational-Re map along the basis change g."""
    push = _mat(((g.d, -g.c), (-g.b, g.a)))
    pull = _mat(((g.a, g.c), (g.b, g.d)))
    inner = rational_re_map(new_re).matrix_action
    m = _matmul(pull, _matmul(inner, push))
    return PartnerMap(PartnerKind.MobiusConjugated, m, f"conjugated:{g}:re={as_rational(new_re)}")


def conjugated_partner(f, g: UnimodularMap, new_re) -> Optional[FillingClass]:
    return conjugated_map(g, new_re).apply(f)


def orbit_maps(shape: CuspShape) -> list[PartnerMap]:
    """Every catalog map that applies to a standard shape."""
    cls = elliptic_class(shape)
    maps = equal_cvol_maps(cls) + conj_cvol_maps(boundary_class(shape), cls)
    if shape.re_exact is not None:
        maps.append(rational_re_map(shape.re_exact))
    return maps


def full_orbit_provenance(f: FillingClass, shape: CuspShape) -> dict[FillingClass, tuple[str, ...]]:
    """Closure of f under the catalog, with a shortest chain of maps for each member.

    Non-standard shapes are reduced first and the orbit is pulled back.
    """
    if not is_standard(shape):
        red = reduce_to_fundamental(shape)
        g = red.word
        ft = canonicalize(*g.push_filling(f.p, f.q))
        inner = full_orbit_provenance(ft, red.standard_shape)
        return {canonicalize(*g.pull_filling(h.p, h.q)): chain for h, chain in inner.items()}
    maps = orbit_maps(shape)
    seen = {f: ()}
    todo = deque([f])
    while todo:
        h = todo.popleft()
        for m in maps:
            img = m.apply(h)
            if img is not None and img not in seen:
                seen[img] = seen[h] + (m.provenance,)
                todo.append(img)
    return seen


def full_orbit(f: FillingClass, shape: CuspShape) -> set[FillingClass]:
    return set(full_orbit_provenance(f, shape))


@dataclass(frozen=True)
class QLinearSolution:
    alpha: int
    beta: int
    gamma: int
    root: Optional[Fraction]  # None for the root at infinity (gamma = 0)
    basis_change: UnimodularMap
    new_re: Fraction


def unimodular_completion(a: int, b: int) -> tuple[int, int]:
    """(c, d) with a d - b c = 1, minimal |c| + |d|, then smaller |c|."""
    if math.gcd(a, b) != 1:
        raise NotCoprime(f"({a}, {b}) is not coprime")
    if b == 0:
        return 0, a  # a = +-1
    if a == 0:
        return -b, 0
    # particular solution, then scan the one-parameter family (c + k a, d + k b)
    d0 = pow(a, -1, abs(b))
    c0 = (a * d0 - 1) // b
    # |c| + |d| is convex in k with breakpoints near -c0/a and -d0/b
    lo = math.floor(min(-c0 / a, -d0 / b)) - 1
    hi = math.ceil(max(-c0 / a, -d0 / b)) + 1
    best = None
    for k in range(lo, hi + 1):
        c, d = c0 + k * a, d0 + k * b
        key = (abs(c) + abs(d), abs(c), c, d)
        if best is None or key < best:
            best = key
    return best[2], best[3]


def _new_re(g: UnimodularMap, rel: tuple[int, int, int]) -> Optional[Fraction]:
    """Re(g(c1)) for any c1 on the line alpha + beta Re + gamma |c1|^2 = 0."""
    a, b, c, d = g.a, g.b, g.c, g.d
    num = (a * c, b * c + a * d, b * d)
    den = (a * a, 2 * a * b, b * b)
    found = None
    for i, j in ((0, 2), (0, 1), (1, 2)):
        bottom = den[i] * rel[j] - den[j] * rel[i]
        if bottom:
            lam = Fraction(num[i] * rel[j] - num[j] * rel[i], bottom)
            if found is None:
                found = lam
            elif lam != found:
                return None
    return found


def solve_qlinear(f: FillingClass, f2: FillingClass) -> Optional[QLinearSolution]:
    """Basis change turning an equal-norm pair into a rational-Re pair.

    |p + c1 q|^2 = |p' + c1 q'|^2 is the relation alpha + beta Re + gamma N = 0;
    a/b is a root of gamma t^2 - beta t + alpha, and the resulting map has
    rational real part on the whole line.
    """
    p, q = f
    pp, qq = f2
    alpha = p * p - pp * pp
    beta = 2 * (p * q - pp * qq)
    gamma = q * q - qq * qq
    if beta == 0 and gamma == 0:
        return None
    disc = beta * beta - 4 * alpha * gamma
    cross = p * qq - pp * q
    assert disc == 4 * cross * cross, "discriminant identity failed"
    root_disc = math.isqrt(disc)
    assert root_disc * root_disc == disc
    # roots of gamma a^2 - beta a b + alpha b^2 as points (a : b) of the projective line
    if gamma == 0:
        roots = [None, Fraction(alpha, beta)]
    else:
        finite = {Fraction(beta + sgn * root_disc, 2 * gamma) for sgn in (1, -1)}
        roots = sorted(finite, key=lambda t: (abs(t.numerator) + t.denominator, t < 0, t))
    for t in roots:
        a, b = (1, 0) if t is None else (t.numerator, t.denominator)
        c, d = unimodular_completion(a, b)
        g = UnimodularMap(a, b, c, d)
        new_re = _new_re(g, (alpha, beta, gamma))
        if new_re is not None:
            return QLinearSolution(alpha, beta, gamma, t, g, new_re)
    return None


def _rationalize(x: float, max_den: int) -> Optional[Fraction]:
    fr = Fraction(x).limit_denominator(max_den)
    return fr if abs(float(fr) - x) < RATIONAL_RESIDUAL else None


def _words(max_word: int):
    """Reduced words in S and T^n (|n| <= max_word) of at most max_word letters.

    Yields (tokens, map) with map the composite read right to left, so that
    ("S", "T^2") is z -> -1/(z + 2).  Words ending (outermost) in a T are
    skipped: they only translate the real part by an integer.
    """
    exps = [n for n in range(-max_word, max_word + 1) if n]
    S = UnimodularMap.S()
    out = [((), UnimodularMap.identity())]
    frontier = [((), UnimodularMap.identity())]
    for _ in range(max_word):
        nxt = []
        for tokens, g in frontier:
            last = tokens[0] if tokens else None
            if last != "S":
                nxt.append((("S",) + tokens, S @ g))
            if last is None or last == "S":
                for n in exps:
                    nxt.append(((f"T^{n}",) + tokens, UnimodularMap.T(n) @ g))
        frontier = nxt
        out.extend(nxt)
    return [(t, g) for t, g in out if not t or t[0] == "S"]


def mobius_rational_search(shape: CuspShape, max_word: int = 6, max_den: int = 200) -> list[tuple[UnimodularMap, Fraction, tuple[str, ...]]]:
    """Basis changes whose image of c1 has (apparently) rational real part.

    Float shapes are tested with a continued-fraction detector, so hits are
    candidates only.
    """
    hits = []
    seen = set()
    for tokens, g in _words(max_word):
        img = mobius_apply(g, shape)
        if img.is_exact:
            re = img.re_exact if img.re_exact.denominator <= max_den else None
        else:
            re = _rationalize(img.z.real, max_den)
        if re is None:
            continue
        key = (re - math.floor(re), round(img.z.imag, 9))
        if key in seen:
            continue
        seen.add(key)
        hits.append((g, re, tokens))
    return hits
