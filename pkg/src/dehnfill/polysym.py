"""Bivariate integer Laurent polynomials in m, l and monomial-substitution symmetry checks.

Fixture matrices live in data/polys/<name>.txt: one matrix row per line,
whitespace separated, `.` for a blank (zero) entry.  Row i holds the
coefficients of m^i, column j those of l^j.  Header comments give the
substitution ("# map: a b c d" for m -> m^a l^b, l -> m^c l^d) and, when
known, the expected unit ("# unit: i j sign").
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Optional

from .core import DataError

Exp = tuple[int, int]


class RaggedMatrix(DataError):
    pass


class UnknownFixture(DataError):
    pass


FIXTURES = ("m135", "m130", "m208", "m009", "s772")


class LaurentPoly2:
    """Sum of c * m^i * l^j with integer c; zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Exp, int]] = None):
        clean = {}
        for (i, j), c in (terms or {}).items():
            if c:
                clean[(int(i), int(j))] = int(c)
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def monomial(cls, i: int, j: int, c: int = 1) -> "LaurentPoly2":
        return cls({(i, j): c})

    @classmethod
    def from_matrix(cls, rows: Iterable[Iterable[int]], row_base: int = 0, col_base: int = 0) -> "LaurentPoly2":
        rows = [list(r) for r in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise RaggedMatrix("matrix rows differ in length")
        return cls({(row_base + i, col_base + j): c for i, r in enumerate(rows) for j, c in enumerate(r)})

    def to_matrix(self) -> tuple[list[list[int]], int, int]:
        """(rows, row_base, col_base) of the smallest box holding every term."""
        if not self.terms:
            return [[0]], 0, 0
        i0 = min(i for i, _ in self.terms)
        i1 = max(i for i, _ in self.terms)
        j0 = min(j for _, j in self.terms)
        j1 = max(j for _, j in self.terms)
        rows = [[self.terms.get((i, j), 0) for j in range(j0, j1 + 1)] for i in range(i0, i1 + 1)]
        return rows, i0, j0

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LaurentPoly2) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __neg__(self):
        return LaurentPoly2({e: -c for e, c in self.terms.items()})

    def __add__(self, other: "LaurentPoly2"):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly2(out)

    def __sub__(self, other: "LaurentPoly2"):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly2({e: c * other for e, c in self.terms.items()})
        out: dict[Exp, int] = {}
        for (i, j), c in self.terms.items():
            for (k, l), d in other.terms.items():
                out[(i + k, j + l)] = out.get((i + k, j + l), 0) + c * d
        return LaurentPoly2(out)

    __rmul__ = __mul__

    def __repr__(self):
        return f"LaurentPoly2({self.terms!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda t: (-t[0][0], -t[0][1])):
            mono = "".join(
                v if e == 1 else f"{v}^{e}" for v, e in (("m", i), ("l", j)) if e
            )
            if mono and abs(c) == 1:
                coef = "-" if c < 0 else "+"
            else:
                coef = f"{c:+d}"
            parts.append(coef + mono)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


@dataclass(frozen=True)
class MonomialMap:
    """m -> m^a l^b, l -> m^c l^d."""

    m_image: Exp
    l_image: Exp

    def __post_init__(self):
        (a, b), (c, d) = self.m_image, self.l_image
        if abs(a * d - b * c) != 1:
            raise DataError(f"monomial map {self} is not invertible")

    @classmethod
    def identity(cls) -> "MonomialMap":
        return cls((1, 0), (0, 1))

    def inverse(self) -> "MonomialMap":
        (a, b), (c, d) = self.m_image, self.l_image
        det = a * d - b * c
        return MonomialMap((d * det, -b * det), (-c * det, a * det))

    def __str__(self):
        def mono(e):
            s = "".join(v if k == 1 else f"{v}^{k}" for v, k in (("m", e[0]), ("l", e[1])) if k)
            return s or "1"

        return f"(m, l) -> ({mono(self.m_image)}, {mono(self.l_image)})"


def substitute(poly: LaurentPoly2, mp: MonomialMap) -> LaurentPoly2:
    (a, b), (c, d) = mp.m_image, mp.l_image
    out: dict[Exp, int] = {}
    for (i, j), coef in poly.terms.items():
        e = (a * i + c * j, b * i + d * j)
        out[e] = out.get(e, 0) + coef
    return LaurentPoly2(out)


def equal_up_to_unit(pa: LaurentPoly2, pb: LaurentPoly2) -> Optional[tuple[int, int, int]]:
    """(i, j, sign) with pa = sign * m^i l^j * pb, or None."""
    if pa.is_zero() or pb.is_zero() or len(pa.terms) != len(pb.terms):
        return None
    # monomial shifts preserve the lexicographic order of exponents
    (ea, ca), (eb, cb) = next(iter(pa.terms.items())), next(iter(pb.terms.items()))
    if abs(ca) != abs(cb):
        return None
    sign = 1 if ca == cb else -1
    i, j = ea[0] - eb[0], ea[1] - eb[1]
    if LaurentPoly2.monomial(i, j, sign) * pb == pa:
        return i, j, sign
    return None


@dataclass(frozen=True)
class Fixture:
    name: str
    rows: tuple[tuple[int, ...], ...]
    mp: MonomialMap
    expected_unit: Optional[tuple[int, int, int]]

    @property
    def poly(self) -> LaurentPoly2:
        return LaurentPoly2.from_matrix(self.rows)


def parse_matrix_text(text: str, name: str = "<text>") -> Fixture:
    rows, mp, unit = [], None, None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            key = key.strip()
            if key == "name":
                name = val.strip()
            elif key == "map":
                a, b, c, d = map(int, val.split())
                mp = MonomialMap((a, b), (c, d))
            elif key == "unit":
                i, j, s = map(int, val.split())
                unit = (i, j, s)
            continue
        rows.append(tuple(0 if tok == "." else int(tok) for tok in line.split()))
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise RaggedMatrix(f"{name}: matrix rows differ in length")
    if mp is None:
        raise DataError(f"{name}: missing '# map:' header")
    return Fixture(name, tuple(rows), mp, unit)


def format_matrix(rows) -> str:
    width = max(len(str(c)) for r in rows for c in r)
    return "\n".join(" ".join(("." if c == 0 else str(c)).rjust(width) for c in r) for r in rows)


def load_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise UnknownFixture(f"no polynomial fixture named {name!r}; known: {', '.join(FIXTURES)}")
    text = resources.files("dehnfill").joinpath("data", "polys", f"{name}.txt").read_text()
    return parse_matrix_text(text, name)


@dataclass(frozen=True)
class VerificationRecord:
    fixture: str
    map: str
    unit: Optional[tuple[int, int, int]]
    expected_unit: Optional[tuple[int, int, int]]
    passed: bool
    seconds: float

    def to_dict(self) -> dict:
        return {
            "fixture": self.fixture,
            "map": self.map,
            "unit": list(self.unit) if self.unit else None,
            "expected_unit": list(self.expected_unit) if self.expected_unit else None,
            "passed": self.passed,
        }


def check_symmetry(poly: LaurentPoly2, mp: MonomialMap,
                   expected_unit: Optional[tuple[int, int, int]] = None) -> tuple[bool, Optional[tuple[int, int, int]]]:
    """Whether poly is invariant under mp up to a monomial unit (the expected one, if given).

    Coefficients are integers, so complex conjugation of m, l acts trivially
    and only the monomial part of a conjugated substitution needs checking.
    """
    unit = equal_up_to_unit(poly, substitute(poly, mp))
    ok = unit is not None and (expected_unit is None or unit == tuple(expected_unit))
    return ok, unit


def verify_symmetry(fixture_name: str) -> VerificationRecord:
    t0 = time.perf_counter()
    fx = load_fixture(fixture_name)
    ok, unit = check_symmetry(fx.poly, fx.mp, fx.expected_unit)
    return VerificationRecord(fx.name, str(fx.mp), unit, fx.expected_unit, ok, time.perf_counter() - t0)


def mutation_sweep(fx: Fixture, delta: int = 1) -> list[tuple[tuple[int, int], bool]]:
    """Add delta to each matrix cell in turn; report whether the symmetry check still passes."""
    out = []
    for i, row in enumerate(fx.rows):
        for j in range(len(row)):
            rows = [list(r) for r in fx.rows]
            rows[i][j] += delta
            ok, _ = check_symmetry(LaurentPoly2.from_matrix(rows), fx.mp, fx.expected_unit)
            out.append(((i, j), ok))
    return out


def fixed_cells(fx: Fixture) -> list[tuple[int, int]]:
    """Cells that the substitution, followed by the fixture's unit, sends to themselves."""
    unit = equal_up_to_unit(fx.poly, substitute(fx.poly, fx.mp))
    if unit is None:
        return []
    (a, b), (c, d) = fx.mp.m_image, fx.mp.l_image
    ui, uj, _ = unit
    return [
        (i, j)
        for i, row in enumerate(fx.rows)
        for j in range(len(row))
        if (a * i + c * j + ui, b * i + d * j + uj) == (i, j)
    ]
