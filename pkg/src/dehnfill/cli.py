"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 bad data, 4 numerical failure.
Errors are reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from typing import Optional

from .census import builtin_table3, find_record, load_census
from .collide import (
    DEFAULT_BAND,
    QForm,
    enumerate_collisions,
    estimate_ntilde,
    numeric_collisions,
)
from .core import (
    ComplexVal,
    CuspShape,
    DataError,
    DehnFillError,
    NumericError,
    NZCoefficients,
    canonicalize,
)
from .moduli import boundary_class, elliptic_class, is_standard, reduce_to_fundamental
from .nzvolume import complex_length, cvol_change_leading, phi, theta
from .partners import full_orbit_provenance, mobius_rational_search, solve_qlinear
from .polysym import FIXTURES, verify_symmetry

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4
THREADS_ENV = "DEHNFILL_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let "-5,4" and "-0.3,1.2" through as values rather than options
        self._negative_number_matcher = re.compile(r"^-\d[\d.eE+,:-]*$")

    def error(self, message):
        raise UsageError(message)


def _complex_arg(text: str) -> complex:
    try:
        re, im = text.split(",")
        return complex(float(re), float(im))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from None


def _pair_arg(text: str) -> tuple[int, int]:
    try:
        p, q = text.split(",")
        return int(p), int(q)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected P,Q, got {text!r}") from None


def _band_arg(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected H0:H1, got {text!r}") from None


def _records(args):
    return load_census(args.census) if args.census else builtin_table3()


def resolve_nz(args) -> tuple[str, NZCoefficients]:
    """Shape source: --shape beats --manifold; one of them is required."""
    if args.shape is not None:
        z = args.shape
        re_exact = Fraction(args.re_exact) if args.re_exact is not None else None
        ns_exact = Fraction(args.normsq_exact) if args.normsq_exact is not None else None
        c1 = CuspShape(ComplexVal.of(z), re_exact, ns_exact)
        cs = [ComplexVal.of(v) if v is not None else None for v in (args.c3, args.c5, args.c7)]
        return "override", NZCoefficients(c1, *cs)
    if args.manifold:
        rec = find_record(_records(args), args.manifold)
        return rec.name, rec.nz
    raise DataError("no shape given: pass --manifold NAME or --shape RE,IM")


def _threads(args) -> Optional[int]:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else None


def _z(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _fmt_z(z: complex) -> str:
    return f"{z.real:.15g}{z.imag:+.15g}i"


def _emit(args, obj: dict, text: str, csv_text: Optional[str] = None):
    if args.format == "json":
        print(json.dumps(obj, indent=2))
    elif args.format == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    else:
        print(text)


def cmd_reduce(args):
    _, nz = resolve_nz(args)
    res = reduce_to_fundamental(nz.c1)
    s = res.standard_shape
    obj = {
        "input": _z(nz.c1.z),
        "standard_shape": _z(s.z),
        "re_exact": None if s.re_exact is None else str(s.re_exact),
        "normsq_exact": None if s.norm_sq_exact is None else str(s.norm_sq_exact),
        "word": [res.word.a, res.word.b, res.word.c, res.word.d],
        "steps": list(res.steps),
        "elliptic_class": elliptic_class(s).value,
        "boundary": sorted(b.value for b in boundary_class(s)),
    }
    text = (f"c1 = {_fmt_z(nz.c1.z)}\nstandard c1 = {_fmt_z(s.z)}\n"
            f"word {res.word}\nsteps {' '.join(res.steps) or '(none)'}\n"
            f"class {obj['elliptic_class']}, boundary {{{', '.join(obj['boundary'])}}}")
    _emit(args, obj, text)


def cmd_vol(args):
    name, nz = resolve_nz(args)
    p, q = args.p, args.q
    th = theta((p, q), nz, args.max_order)
    c1 = nz.c1.z
    ph = phi(p + c1.real * q, c1.imag * q, nz, args.max_order)
    obj = {
        "manifold": name, "p": p, "q": q,
        "theta": th.value, "theta_order": th.order, "theta_error_scale": th.error_scale,
        "phi": ph.value, "phi_order": ph.order, "phi_error_scale": ph.error_scale,
    }
    text = (f"Theta({p},{q}) = {th.value:.17g}  [order {th.order}, error scale {th.error_scale:.3g}]\n"
            f"Phi = {ph.value:.17g}  [order {ph.order}, error scale {ph.error_scale:.3g}]")
    _emit(args, obj, text)


def cmd_cvol(args):
    name, nz = resolve_nz(args)
    cv = cvol_change_leading((args.p, args.q), nz.c1)
    obj = {"manifold": name, "p": args.p, "q": args.q, "re": cv.re, "im_mod_pi2": cv.im_mod}
    _emit(args, obj, f"cvol change ({args.p},{args.q}) = {cv.re:.17g} + {cv.im_mod:.17g}i  (mod i pi^2)")


def cmd_length(args):
    name, nz = resolve_nz(args)
    ell = complex_length((args.p, args.q), nz)
    obj = {"manifold": name, "p": args.p, "q": args.q, "length": ell.re, "torsion": ell.im}
    _emit(args, obj, f"complex length ({args.p},{args.q}) = {_fmt_z(ell.z)}")


def cmd_partners(args):
    name, nz = resolve_nz(args)
    f = canonicalize(args.p, args.q)
    orbit = full_orbit_provenance(f, nz.c1)
    items = sorted(orbit.items(), key=lambda kv: (len(kv[1]), kv[0].height, kv[0].q, kv[0].p))
    obj = {
        "manifold": name,
        "filling": str(f),
        "size": len(orbit),
        "partners": [{"filling": str(g), "via": list(chain)} for g, chain in items],
    }
    lines = [f"{name}: {len(orbit)} classes in the orbit of {f}"]
    for g, chain in items:
        lines.append(f"  {str(g):>12}  {' -> '.join(chain) or 'self'}")
    _emit(args, obj, "\n".join(lines))


def cmd_collide(args):
    name, nz = resolve_nz(args)
    workers = _threads(args)
    if args.numeric:
        rep = numeric_collisions(nz, args.band, args.k_tol, workers=workers)
    else:
        shape = nz.c1
        rep = enumerate_collisions(QForm.from_shape(shape), args.band,
                                   shape if is_standard(shape) else None, nz=nz, workers=workers)
    obj = {"manifold": name, **rep.to_dict()}
    lines = [f"{name}: {rep.mode.value} band {rep.band[0]}:{rep.band[1]}, {len(rep.buckets)} buckets, "
             f"{len(rep.sporadic)} sporadic"]
    for b in rep.buckets:
        if b.size > 1:
            lines.append(f"  key {b.key}: {' '.join(map(str, b.members))}")
    for b in rep.sporadic:
        lines.append(f"  sporadic {b.key}: " + " | ".join(" ".join(map(str, ms)) for ms in b.orbits.values()))
    _emit(args, obj, "\n".join(lines), rep.to_csv())


def cmd_scan(args):
    out = []
    for rec in _records(args):
        entry = {"manifold": rec.name, "aliases": list(rec.aliases)}
        try:
            rep = numeric_collisions(rec.nz, args.band, args.k_tol, workers=_threads(args))
            est = estimate_ntilde(rep, args.min_support)
            entry.update(ntilde=est.value, support=est.support,
                         histogram={str(k): v for k, v in est.histogram})
        except DehnFillError as e:
            entry.update(ntilde=None, error=type(e).__name__, message=str(e))
        out.append(entry)
    obj = {"band": list(args.band), "k_tol": args.k_tol, "min_support": args.min_support, "results": out}
    lines = []
    for e in out:
        if e["ntilde"] is None:
            lines.append(f"{e['manifold']}: {e['error']}")
        else:
            lines.append(f"{e['manifold']}: {e['ntilde']} (support {e['support']})")
    csv_text = "manifold,ntilde,support\r\n" + "".join(
        f"{e['manifold']},{'' if e['ntilde'] is None else e['ntilde']},{e.get('support', '')}\r\n" for e in out)
    _emit(args, obj, "\n".join(lines), csv_text)


def cmd_qlin(args):
    (p, q), (pp, qq) = args.pair
    f, f2 = canonicalize(p, q), canonicalize(pp, qq)
    sol = solve_qlinear(f, f2)
    if sol is None:
        raise DataError(f"{f} and {f2} give a degenerate relation")
    g = sol.basis_change
    root = "infinity" if sol.root is None else str(sol.root)
    obj = {
        "pair": [str(f), str(f2)],
        "alpha": sol.alpha, "beta": sol.beta, "gamma": sol.gamma,
        "root": root,
        "basis_change": [g.a, g.b, g.c, g.d],
        "new_re": str(sol.new_re),
    }
    text = (f"{sol.alpha} + {sol.beta} Re(c1) + {sol.gamma} |c1|^2 = 0\n"
            f"root a/b = {root}, basis change {g}\nRe((c + d c1)/(a + b c1)) = {sol.new_re}")
    _emit(args, obj, text)


def cmd_mobius_search(args):
    name, nz = resolve_nz(args)
    hits = mobius_rational_search(nz.c1, args.max_word, args.max_den)
    obj = {
        "manifold": name,
        "hits": [{"word": list(t), "map": [g.a, g.b, g.c, g.d], "re": str(re)} for g, re, t in hits],
    }
    lines = [f"{name}: {len(hits)} candidate basis changes"]
    for g, re, t in hits:
        lines.append(f"  {''.join(t) or 'id':>16}  Re = {re}")
    _emit(args, obj, "\n".join(lines))


def cmd_polyverify(args):
    names = FIXTURES if args.all else [args.fixture]
    recs = [verify_symmetry(n) for n in names]
    obj = {"results": [r.to_dict() for r in recs]}
    lines = []
    for r in recs:
        unit = "none" if r.unit is None else f"m^{r.unit[0]} l^{r.unit[1]} (sign {r.unit[2]:+d})"
        lines.append(f"{r.fixture}: {'pass' if r.passed else 'FAIL'} under {r.map}, unit {unit}")
    _emit(args, obj, "\n".join(lines))
    if not all(r.passed for r in recs):
        raise DataError("symmetry check failed for " + ", ".join(r.fixture for r in recs if not r.passed))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("shape source")
    g.add_argument("--census", help="JSONL census file (default: built-in coefficient table)")
    g.add_argument("--manifold", help="manifold name or alias in the census")
    g.add_argument("--shape", type=_complex_arg, metavar="RE,IM", help="cusp shape c1; overrides --manifold")
    g.add_argument("--re-exact", help="exact rational Re(c1) for --shape, e.g. 1/2")
    g.add_argument("--normsq-exact", help="exact rational |c1|^2 for --shape")
    for k in ("c3", "c5", "c7"):
        g.add_argument(f"--{k}", type=_complex_arg, metavar="RE,IM", help=f"series coefficient {k} for --shape")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text", help="output format")
    common.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or 1)")

    fill = _Parser(add_help=False)
    fill.add_argument("--p", type=int, required=True, help="filling coefficient p")
    fill.add_argument("--q", type=int, required=True, help="filling coefficient q")

    ap = _Parser(prog="dehnfill", description="Volume asymptotics and equal-volume Dehn fillings.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("reduce", parents=[common], help="reduce c1 to the standard domain")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("vol", parents=[common, fill], help="truncated volume change Theta and Phi")
    sp.add_argument("--max-order", type=int, help="truncate at this power of 2pi/A")
    sp.set_defaults(func=cmd_vol)

    sp = sub.add_parser("cvol", parents=[common, fill], help="leading complex-volume change (q != 0)")
    sp.set_defaults(func=cmd_cvol)

    sp = sub.add_parser("length", parents=[common, fill], help="complex length of the core geodesic")
    sp.set_defaults(func=cmd_length)

    sp = sub.add_parser("partners", parents=[common, fill], help="predicted equal-volume fillings")
    sp.set_defaults(func=cmd_partners)

    sp = sub.add_parser("collide", parents=[common], help="enumerate equal-norm or equal-volume collisions")
    sp.add_argument("--band", type=_band_arg, default=DEFAULT_BAND, metavar="H0:H1",
                    help="height band for |p|+|q| (default 20:60)")
    sp.add_argument("--numeric", action="store_true", help="group by truncated volume instead of exact norm")
    sp.add_argument("--k-tol", type=float, default=100.0, help="numeric tolerance multiplier (default 100)")
    sp.set_defaults(func=cmd_collide)

    sp = sub.add_parser("scan", parents=[common], help="estimate N-tilde for every census manifold")
    sp.add_argument("--band", type=_band_arg, default=DEFAULT_BAND, metavar="H0:H1",
                    help="height band for |p|+|q| (default 20:60)")
    sp.add_argument("--k-tol", type=float, default=100.0, help="numeric tolerance multiplier (default 100)")
    sp.add_argument("--min-support", type=int, default=5, help="buckets needed to report a size (default 5)")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("qlin", parents=[common], help="basis change for an equal-norm pair")
    sp.add_argument("--pair", type=_pair_arg, nargs=2, required=True, metavar="P,Q", help="two fillings")
    sp.set_defaults(func=cmd_qlin)

    sp = sub.add_parser("mobius-search", parents=[common], help="basis changes giving rational Re")
    sp.add_argument("--max-word", type=int, default=6, help="maximum word length (default 6)")
    sp.add_argument("--max-den", type=int, default=200, help="maximum denominator (default 200)")
    sp.set_defaults(func=cmd_mobius_search)

    sp = sub.add_parser("polyverify", parents=[common], help="check a holonomy polynomial symmetry")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--fixture", choices=FIXTURES, help="fixture name")
    grp.add_argument("--all", action="store_true", help="check every fixture")
    sp.set_defaults(func=cmd_polyverify)
    return ap


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return _fail(EXIT_USAGE, "UsageError", str(e))
    try:
        args.func(args)
    except NumericError as e:
        return _fail(EXIT_NUMERIC, type(e).__name__, str(e))
    except DataError as e:
        return _fail(EXIT_DATA, type(e).__name__, str(e))
    except (ValueError, ZeroDivisionError) as e:
        return _fail(EXIT_DATA, type(e).__name__, str(e))
    return 0


if __name__ == "__main__":
    sys.exit(main())
