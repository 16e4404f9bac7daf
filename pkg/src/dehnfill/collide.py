"""Collision enumeration: fillings with equal norm |p + c1 q|^2 or equal truncated volume.

Two grouping modes.  ExactQ buckets classes by the exact rational value of
the norm form and is available only for shapes with rational Re(c1) and
|c1|^2.  NumericVolume buckets by the truncated volume change with a
tolerance scaled to the size of the first omitted term, closing chains of
near-equalities with union-find.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import CuspShape, DataError, FillingClass, NZCoefficients, as_rational
from .nzvolume import VolumeChange, theta_many
from .partners import full_orbit

DEFAULT_BAND = (20, 60)


class InexactShape(DataError):
    pass


class InsufficientBand(DataError):
    pass


class Mode(enum.Enum):
    ExactQ = "ExactQ"
    NumericVolume = "NumericVolume"


@dataclass(frozen=True)
class QForm:
    """p^2 + re2 p q + normsq q^2 with re2 = 2 Re(c1), normsq = |c1|^2."""

    re2: Fraction
    normsq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re2", as_rational(self.re2))
        object.__setattr__(self, "normsq", as_rational(self.normsq))
        if self.re2**2 - 4 * self.normsq >= 0:
            raise DataError(f"form with re2={self.re2}, normsq={self.normsq} is not positive definite")

    @classmethod
    def from_shape(cls, shape: CuspShape) -> "QForm":
        if not shape.is_exact:
            raise InexactShape("exact Re(c1) and |c1|^2 are needed for exact grouping")
        return cls(2 * shape.re_exact, shape.norm_sq_exact)


def qvalue(f, form: QForm) -> Fraction:
    p, q = f
    return p * p + form.re2 * p * q + form.normsq * q * q


def classes_in_band(band: tuple[int, int]) -> list[FillingClass]:
    """Canonical coprime classes with H0 <= |p| + |q| <= H1, by height then (q, p)."""
    h0, h1 = band
    if h0 < 1 or h1 < h0:
        raise DataError(f"bad band {band}")
    out = []
    for h in range(h0, h1 + 1):
        for q in range(0, h + 1):
            for p in sorted({h - q, q - h}):
                if q == 0 and p <= 0:
                    continue
                if math.gcd(p, q) == 1:
                    out.append(FillingClass(p, q))
    return out


def _orbit_key(f: FillingClass):
    return (f.height, f.q, f.p)


@dataclass
class Bucket:
    key: object
    members: list[FillingClass]
    orbits: dict[str, list[FillingClass]] = field(default_factory=dict)
    diameter: float = 0.0

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class CollisionReport:
    buckets: list[Bucket]
    mode: Mode
    band: tuple[int, int]
    tolerance_rule: str
    sporadic: list[Bucket]
    volumes: dict[FillingClass, VolumeChange] = field(default_factory=dict)

    def rows(self):
        for i, b in enumerate(self.buckets):
            for f in b.members:
                orbit = next(o for o, ms in b.orbits.items() if f in ms)
                vc = self.volumes.get(f)
                yield {
                    "p": f.p,
                    "q": f.q,
                    "bucket": i,
                    "key": str(b.key),
                    "orbit": orbit,
                    "theta": "" if vc is None else repr(vc.value),
                    "error_scale": "" if vc is None else repr(vc.error_scale),
                }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["p", "q", "bucket", "key", "orbit", "theta", "error_scale"],
                           lineterminator="\r\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        def bucket(b: Bucket):
            return {
                "key": str(b.key),
                "members": [str(f) for f in b.members],
                "orbits": {k: [str(f) for f in v] for k, v in b.orbits.items()},
                "diameter": b.diameter,
            }

        return {
            "mode": self.mode.value,
            "band": list(self.band),
            "tolerance_rule": self.tolerance_rule,
            "buckets": [bucket(b) for b in self.buckets],
            "sporadic": [bucket(b) for b in self.sporadic],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _annotate(buckets: list[Bucket], shape: Optional[CuspShape]) -> list[Bucket]:
    orbit_of: dict[FillingClass, str] = {}
    for b in buckets:
        groups = defaultdict(list)
        for f in b.members:
            if f not in orbit_of:
                if shape is None:
                    orbit_of[f] = str(f)
                else:
                    orb = full_orbit(f, shape)
                    rep = str(min(orb, key=_orbit_key))
                    for g in orb:
                        orbit_of[g] = rep
            groups[orbit_of[f]].append(f)
        b.orbits = dict(groups)
    return [b for b in buckets if len(b.orbits) >= 2]


def enumerate_collisions(form: QForm, band: tuple[int, int], shape: Optional[CuspShape] = None,
                         nz: Optional[NZCoefficients] = None, workers: Optional[int] = None) -> CollisionReport:
    """Group the classes in band by exact norm value.

    shape supplies the orbit annotation (and must match form); when it is
    None every class is its own orbit.  nz, if given, attaches volumes.
    """
    if shape is not None:
        if not shape.is_exact:
            raise InexactShape("exact Re(c1) and |c1|^2 are needed for exact grouping")
        if QForm.from_shape(shape) != form:
            raise DataError("form does not match shape")
    classes = classes_in_band(band)
    groups = defaultdict(list)
    for f in classes:
        groups[qvalue(f, form)].append(f)
    buckets = [Bucket(k, groups[k]) for k in sorted(groups)]
    sporadic = _annotate(buckets, shape)
    volumes = {}
    if nz is not None:
        volumes = dict(zip(classes, theta_many(classes, nz, workers=workers)))
    return CollisionReport(buckets, Mode.ExactQ, tuple(band), "exact rational equality of p^2 + re2 pq + normsq q^2",
                           sporadic, volumes)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def numeric_collisions(nz: NZCoefficients, band: tuple[int, int] = DEFAULT_BAND, k_tol: float = 100,
                       workers: Optional[int] = None, annotate: bool = True) -> CollisionReport:
    """Group classes whose truncated volume changes agree within k_tol |A|^-(order+2)."""
    classes = classes_in_band(band)
    vols = theta_many(classes, nz, workers=workers)
    order = sorted(range(len(classes)), key=lambda i: vols[i].value)
    max_scale = max(v.error_scale for v in vols)
    uf = _UnionFind(len(classes))
    for pos, i in enumerate(order):
        vi = vols[i]
        for j in order[pos + 1:]:
            vj = vols[j]
            gap = vj.value - vi.value
            if gap >= k_tol * max_scale:
                break
            if gap < k_tol * max(vi.error_scale, vj.error_scale):
                uf.union(i, j)
    groups = defaultdict(list)
    for i in range(len(classes)):
        groups[uf.find(i)].append(i)
    buckets = []
    for root in sorted(groups, key=lambda r: (vols[r].value, r)):
        idx = groups[root]
        values = [vols[i].value for i in idx]
        members = sorted((classes[i] for i in idx), key=_orbit_key)
        buckets.append(Bucket(f"{min(values):.17g}", members, diameter=max(values) - min(values)))
    sporadic = _annotate(buckets, nz.c1 if annotate else None)
    rule = f"|theta - theta'| < {k_tol:g} * max(|A|, |A'|)^-(order+2), chained by union-find"
    return CollisionReport(buckets, Mode.NumericVolume, tuple(band), rule, sporadic, dict(zip(classes, vols)))


@dataclass(frozen=True)
class NTildeEstimate:
    value: int
    support: int
    band: tuple[int, int]
    histogram: tuple[tuple[int, int], ...] = ()


def estimate_ntilde(report: CollisionReport, min_support: int = 5) -> NTildeEstimate:
    """Largest bucket size attained by at least min_support buckets."""
    if not report.buckets:
        raise InsufficientBand("empty report")
    hist = Counter(b.size for b in report.buckets)
    ok = [n for n, count in hist.items() if count >= min_support]
    if not ok:
        raise InsufficientBand(f"no bucket size is attained {min_support} times in band {report.band}")
    n = max(ok)
    return NTildeEstimate(n, hist[n], report.band, tuple(sorted(hist.items())))


@dataclass(frozen=True)
class BoundCheck:
    pair: tuple[FillingClass, FillingClass]
    norm_gap: float  # ||A'| - |A|| * |A|
    height_ratio: float  # (|p'| + |q'|)/(|p| + |q|)
    flagged: bool


def bound_checks(report: CollisionReport, nz: NZCoefficients, norm_cap: float = 1e3,
                 ratio_cap: float = 10) -> list[BoundCheck]:
    """Statistics bounding how far apart co-bucketed fillings can be."""
    if report.mode is not Mode.NumericVolume:
        raise DataError("bound checks need a numeric report")
    c1 = nz.c1.z
    out = []
    for b in report.buckets:
        for i, f in enumerate(b.members):
            for g in b.members[i + 1:]:
                a, a2 = abs(f.p + c1 * f.q), abs(g.p + c1 * g.q)
                gap = abs(a2 - a) * a
                ratio = g.height / f.height
                out.append(BoundCheck((f, g), gap, ratio, gap > norm_cap or ratio > ratio_cap))
    return out
