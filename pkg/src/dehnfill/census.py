"""Manifold records: JSONL ingestion, validation, serialization, and the built-in coefficient table.

One JSON object per line:

    {"name": "m004", "aliases": [...],
     "c1": {"re": "0.0", "im": "3.46...", "re_exact": "0", "normsq_exact": "12"},
     "c3": {"re": "...", "im": "..."}, "c5": {...}, "c7": {...},
     "vol": "2.0298832128193", "cs": "0.0"}

Decimals are strings.  Everything but name and c1 is optional; an absent
coefficient is unknown, not zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .core import ComplexVal, CuspShape, DataError, InvariantViolation, NZCoefficients

COEFF_KEYS = ("c3", "c5", "c7")


class ParseError(DataError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateName(DataError):
    pass


class UnknownManifold(DataError):
    pass


@dataclass(frozen=True)
class ManifoldRecord:
    name: str
    c1: CuspShape
    c3: Optional[ComplexVal] = None
    c5: Optional[ComplexVal] = None
    c7: Optional[ComplexVal] = None
    vol: Optional[float] = None
    cs: Optional[float] = None
    aliases: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.name:
            raise InvariantViolation("name", "must be non-empty")

    @property
    def nz(self) -> NZCoefficients:
        return NZCoefficients(self.c1, self.c3, self.c5, self.c7)

    @property
    def names(self) -> tuple[str, ...]:
        return (self.name,) + self.aliases


def _decimal(obj, key: str, where: str) -> float:
    raw = obj.get(key)
    if not isinstance(raw, str):
        raise InvariantViolation(f"{where}.{key}", f"expected a decimal string, got {raw!r}")
    try:
        x = float(raw)
    except ValueError:
        raise InvariantViolation(f"{where}.{key}", f"not a decimal: {raw!r}") from None
    if not math.isfinite(x):
        raise InvariantViolation(f"{where}.{key}", "must be finite")
    return x


def _rational(obj, key: str, where: str) -> Optional[Fraction]:
    raw = obj.get(key)
    if raw is None:
        return None
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError):
        raise InvariantViolation(f"{where}.{key}", f"not a rational: {raw!r}") from None


def _complex(obj, where: str) -> ComplexVal:
    if not isinstance(obj, dict):
        raise InvariantViolation(where, "expected an object with re and im")
    return ComplexVal(_decimal(obj, "re", where), _decimal(obj, "im", where))


def parse_record(obj: dict) -> ManifoldRecord:
    if not isinstance(obj, dict):
        raise InvariantViolation("record", "expected a JSON object")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise InvariantViolation("name", "must be a non-empty string")
    raw_c1 = obj.get("c1")
    if not isinstance(raw_c1, dict):
        raise InvariantViolation("c1", "missing")
    value = _complex(raw_c1, "c1")
    c1 = CuspShape(value, _rational(raw_c1, "re_exact", "c1"), _rational(raw_c1, "normsq_exact", "c1"))
    coeffs = {k: _complex(obj[k], k) for k in COEFF_KEYS if obj.get(k) is not None}
    extras = {}
    for k in ("vol", "cs"):
        if obj.get(k) is not None:
            extras[k] = _decimal(obj, k, "record")
    aliases = obj.get("aliases", [])
    if not isinstance(aliases, list) or not all(isinstance(a, str) and a for a in aliases):
        raise InvariantViolation("aliases", "expected a list of names")
    return ManifoldRecord(name, c1, aliases=tuple(aliases), **coeffs, **extras)


def _dec(x: float) -> str:
    return repr(float(x))


def record_to_obj(rec: ManifoldRecord) -> dict:
    obj: dict = {"name": rec.name}
    if rec.aliases:
        obj["aliases"] = list(rec.aliases)
    c1 = {"re": _dec(rec.c1.value.re), "im": _dec(rec.c1.value.im)}
    if rec.c1.re_exact is not None:
        c1["re_exact"] = str(rec.c1.re_exact)
    if rec.c1.norm_sq_exact is not None:
        c1["normsq_exact"] = str(rec.c1.norm_sq_exact)
    obj["c1"] = c1
    for k in COEFF_KEYS:
        v = getattr(rec, k)
        if v is not None:
            obj[k] = {"re": _dec(v.re), "im": _dec(v.im)}
    for k in ("vol", "cs"):
        v = getattr(rec, k)
        if v is not None:
            obj[k] = _dec(v)
    return obj


def parse_census(text: str) -> list[ManifoldRecord]:
    records, seen = [], {}
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(n, e.msg) from None
        try:
            rec = parse_record(obj)
        except InvariantViolation as e:
            raise InvariantViolation(e.field, f"line {n}: {e}") from None
        for name in rec.names:
            if name in seen:
                raise DuplicateName(f"line {n}: {name!r} already defined on line {seen[name]}")
            seen[name] = n
        records.append(rec)
    return records


def dumps_census(records: Iterable[ManifoldRecord]) -> str:
    return "".join(json.dumps(record_to_obj(r)) + "\n" for r in records)


def load_census(path: Union[str, Path]) -> list[ManifoldRecord]:
    return parse_census(Path(path).read_text())


def save_census(records: Iterable[ManifoldRecord], path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_census(records))


def builtin_table3() -> list[ManifoldRecord]:
    text = resources.files("dehnfill").joinpath("data", "table3.jsonl").read_text()
    return parse_census(text)


def find_record(records: Iterable[ManifoldRecord], name: str) -> ManifoldRecord:
    for r in records:
        if name in r.names:
            return r
    raise UnknownManifold(f"no manifold named {name!r}")
