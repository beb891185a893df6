"""Command-line front end: toriceq {analyze,equidist,intersect,dynamics,demo}."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import dynamical as dyn
from .concave import ConcaveError, PAConcave, SupDifferential
from .equidist import (
    LaurentPolynomial,
    balanced_gradients,
    derivative_essmin,
    derivative_with_rational_twist,
    equidistribution_measures,
    gauss_mahler,
    is_wide,
    log_equidistribution_eligible,
)
from .exactgeom import GeometryError, Polytope
from .heights import convergence_experiment, demo_csv_rows
from .loglinear import LogLinear, format_scalar, to_float
from .schema import ParseError, load_divisor, load_dynamics, to_jsonable
from .toric import (
    DivisorError,
    PreconditionError,
    ToricAdelicDivisor,
    analyze,
    geometric_intersection,
    intersection_number,
)

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_PRECONDITION = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# report builders; every report is a dict with a fixed key order


def _polytope(P: Polytope | None):
    if P is None:
        return None
    return {
        "vertices": [list(v) for v in P.vertices],
        "halfspaces": [{"normal": list(a), "bound": b} for a, b in P.halfspaces],
        "dimension": P.dim,
    }


def _function(f: PAConcave):
    return {
        "pieces": [{"gradient": list(p.gradient), "constant": p.constant} for p in f.pieces],
        "nodes": [{"point": list(x), "value": h} for x, h in f.nodes],
    }


def analyze_report(D: ToricAdelicDivisor) -> dict:
    rep = analyze(D)
    out = {
        "polytope": _polytope(rep.delta),
        "roofs": {name: _function(th) for name, th in rep.roofs.items()},
        "global_roof": _function(rep.global_roof),
        "mu_ess": rep.mu_ess,
        "mu_abs": rep.mu_abs if rep.mu_abs is not None else "undefined (not semipositive)",
        "vol": rep.vol,
        "vol_hat": rep.vol_hat,
        "vol_chihat": rep.vol_chihat,
        "gamma": _polytope(rep.gamma),
        "positivity": {
            "pseudo_effective": rep.flags.pseudo_effective,
            "big": rep.flags.big,
            "semipositive": rep.flags.semipositive,
            "nef": rep.flags.nef,
        },
    }
    z = rep.zhang
    if z is not None:
        out["zhang"] = {
            "mu_ess": z.mu_ess,
            "mean_over_polytope": z.mean_delta,
            "mean_over_gamma": z.mean_gamma,
            "holds": z.holds,
            "verdict": "Zhang equality attained" if z.equality else "Zhang inequality strict",
        }
    return out


def _witness(w):
    if isinstance(w, SupDifferential):
        return {"points": [list(p) for p in w.points], "rays": [list(r) for r in w.rays]}
    return list(w)


def equidist_report(D, along=None, poly=None, points=65536) -> dict:
    w = is_wide(D)
    bg = balanced_gradients(D, w.base_point)
    out = {
        "wide": w.wide,
        "verdict": "WIDE" if w.wide else "NOT WIDE",
        "base_point": list(w.base_point),
        "witness": _witness(w.witness),
        "balanced_gradients": {n: list(u) for n, u in bg.gradients.items()},
    }
    if w.wide:
        out["measures"] = [
            {"place": m.place.name, "kind": m.kind, "u": list(m.u)} for m in equidistribution_measures(D)
        ]
    else:
        out["measures"] = "none: the global roof is not wide"
    if along is not None:
        if w.wide:
            out["derivative"] = derivative_essmin(D, along, bg)
        else:
            out["derivative"] = "undefined: the global roof is not wide"
    if poly is not None:
        f = poly if isinstance(poly, LaurentPolynomial) else LaurentPolynomial.parse(poly, D.dim)
        if not w.wide:
            out["mahler"] = "undefined: the global roof is not wide"
        else:
            mv = gauss_mahler(D, f, points, bg)
            elig = log_equidistribution_eligible(D, f, points)
            sec = {"polynomial": str(f), "exact_part": mv.exact}
            if not mv.exact_total:
                sec["numeric_part"] = mv.numeric
                sec["error_bound"] = mv.error
            sec["value"] = mv.value
            sec["eligible"] = "indeterminate" if elig is None else elig
            if along is not None:
                tw = derivative_with_rational_twist(D, along, f, points)
                sec["twisted_derivative_exact_part"] = tw.exact
                sec["twisted_derivative_value"] = tw.value
            out["mahler"] = sec
    return out


def intersect_report(divs) -> dict:
    d = divs[0].dim
    if len(divs) == 1:
        divs = divs * (d + 1)
    if len(divs) == d + 1:
        return {"arithmetic_intersection": intersection_number(divs)}
    if len(divs) == d:
        return {"geometric_intersection": geometric_intersection(divs)}
    raise DivisorError(f"need 1, {d} or {d + 1} divisors in dimension {d}, got {len(divs)}")


def dynamics_report(data: dyn.DynamicalData, nmax: int, mu_abs=None) -> dict:
    import warnings

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        I = dyn.index_set(data)
    f = dyn.derivative_formula(data, I)
    out = {
        "q": list(data.q),
        "deg": data.deg,
        "d": data.d,
        "index_set": [list(a) for a in I],
    }
    if data.labels is not None:
        out["index_set_over_M_N"] = [list(dyn.expand_labels(data, a)) for a in I]
    if caught:
        out["warning"] = "the index set is empty"
    out["coefficients"] = [{"a": list(a), "multinomial": c} for a, c, _ in f.terms]
    out["formula"] = f.render()
    if f.degree is not None:
        out["degree"] = f.degree
    if f.degree_consistent is not None:
        out["degree_consistent"] = f.degree_consistent
    if f.value is not None:
        out["derivative"] = f.value
    out["approximation"] = [
        {
            "n": s.n,
            "coefficients": list(s.coefficients),
            "inradius_lower": s.inradius_lower,
            "abs_min_scale": s.abs_min_scale,
            "degree_scale": s.degree_scale,
            **({"ratio_bound": s.ratio_bound} if s.ratio_bound is not None else {}),
        }
        for s in dyn.approximation_sequence(data, nmax, mu_abs)
    ]
    return out


def demo_report(D, E, length) -> tuple[dict, list]:
    exp = convergence_experiment(D, E, length)
    rows = demo_csv_rows(exp)
    summary = {
        "mu_ess": exp.mu_ess,
        "derivative": exp.derivative,
        "rate_constant": exp.constant,
        "final_height_E": exp.rows[-1].h_E,
        "final_gap": exp.final_gap,
        "final_gap_float": to_float(exp.final_gap),
        "genericity": "distinct root orders 1..%d" % length,
    }
    return summary, rows


# ---------------------------------------------------------------------------
# rendering


def _scalar_text(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    if x is None:
        return "none"
    if isinstance(x, LogLinear):
        return f"{format_scalar(x)} (~{to_float(x):.12g})"
    if isinstance(x, (int, Fraction)):
        return format_scalar(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _is_flat(v) -> bool:
    return isinstance(v, (list, tuple)) and all(not isinstance(c, (dict, list, tuple)) for c in v)


def _vec_text(v) -> str:
    return "(" + ", ".join(format_scalar(c) if not isinstance(c, (bool, str)) else str(c) for c in v) + ")"


def render_text(rep, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    for k, v in rep.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.extend(render_text(v, indent + 1))
        elif isinstance(v, (list, tuple)) and v and not _is_flat(v):
            lines.append(f"{pad}{k}:")
            for item in v:
                if isinstance(item, dict):
                    parts = [
                        f"{kk}={_vec_text(vv) if _is_flat(vv) and isinstance(vv, (list, tuple)) else _scalar_text(vv)}"
                        for kk, vv in item.items()
                    ]
                    lines.append(f"{pad}  - " + ", ".join(parts))
                else:
                    lines.append(f"{pad}  - {_vec_text(item) if _is_flat(item) else item}")
        elif isinstance(v, (list, tuple)):
            lines.append(f"{pad}{k}: {_vec_text(v)}")
        else:
            lines.append(f"{pad}{k}: {_scalar_text(v)}")
    return lines


def _flatten(rep, prefix=""):
    if isinstance(rep, dict):
        for k, v in rep.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(rep, (list, tuple)):
        if _is_flat(rep):
            yield prefix, " ".join(str(to_jsonable(c)) for c in rep)
        else:
            for i, v in enumerate(rep):
                yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, to_jsonable(rep) if rep is not None else ""


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(["" if c is None else c for c in r])
    return buf.getvalue()


def render(rep: dict, fmt: str, table=None) -> str:
    if fmt == "structured":
        body = to_jsonable(rep)
        if table is not None:
            body = {"summary": body, "rows": [dict(zip(table[0], r)) for r in table[1:]]}
        return json.dumps(body, indent=2) + "\n"
    if fmt == "csv":
        if table is not None:
            return _csv(table)
        return _csv([("key", "value")] + [(k, str(v).lower() if isinstance(v, bool) else v) for k, v in _flatten(rep)])
    lines = []
    if table is not None:
        widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
        for r in table:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        lines.append("")
    lines.extend(render_text(rep))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--format", choices=("text", "csv", "structured"), default="text")

    ap = argparse.ArgumentParser(prog="toriceq", description="Exact toric height and equidistribution toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="roofs, minima, volumes, positivity")
    p.add_argument("file")

    p = sub.add_parser("equidist", parents=[common], help="wideness, balanced gradients, measures")
    p.add_argument("file")
    p.add_argument("--along", help="divisor file for the directional derivative")
    p.add_argument("--poly", help="Laurent polynomial in x, y, z, e.g. 'x - 2'")
    p.add_argument("--quadrature-points", type=int, default=65536)

    p = sub.add_parser("intersect", parents=[common], help="arithmetic or geometric intersection numbers")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("dynamics", parents=[common], help="index sets and approximation sequences")
    p.add_argument("file", nargs="?")
    p.add_argument("--semiabelian", nargs=3, type=int, metavar=("R", "G", "L"))
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--mu-abs", help="absolute minimum used for the ratio bound, e.g. -1/2")

    p = sub.add_parser("demo", parents=[common], help="height convergence on the projective line")
    p.add_argument("file")
    p.add_argument("--along", help="divisor file E; defaults to the canonical divisor")
    p.add_argument("--length", type=int, default=10)
    return ap


def _run(args) -> str:
    if args.command == "analyze":
        return render(analyze_report(load_divisor(args.file)), args.format)
    if args.command == "equidist":
        if args.quadrature_points < 4:
            raise DivisorError("--quadrature-points must be at least 4")
        D = load_divisor(args.file)
        E = load_divisor(args.along) if args.along else None
        f = None
        if args.poly is not None:
            try:
                f = LaurentPolynomial.parse(args.poly, D.dim)
            except ValueError as exc:
                raise ParseError(f"--poly: {exc}") from None
        return render(equidist_report(D, E, f, args.quadrature_points), args.format)
    if args.command == "intersect":
        return render(intersect_report([load_divisor(f) for f in args.files]), args.format)
    if args.command == "dynamics":
        if args.nmax < 0:
            raise DivisorError("--nmax must be non-negative")
        mu_abs = None
        if args.semiabelian:
            if args.file:
                raise ParseError("give either a file or --semiabelian, not both")
            try:
                data = dyn.semiabelian(*args.semiabelian)
            except ValueError as exc:
                raise DivisorError(str(exc)) from None
        elif args.file:
            data, mu_abs = load_dynamics(args.file)
        else:
            raise ParseError("dynamics needs a file or --semiabelian R G L")
        if args.mu_abs is not None:
            try:
                mu_abs = Fraction(args.mu_abs)
            except ValueError:
                raise ParseError(f"--mu-abs: cannot parse {args.mu_abs!r}") from None
        try:
            rep = dynamics_report(data, args.nmax, mu_abs)
        except (KeyError, ValueError) as exc:
            raise DivisorError(str(exc).strip("'\"")) from None
        return render(rep, args.format)
    if args.command == "demo":
        if args.length < 1:
            raise DivisorError("--length must be positive")
        D = load_divisor(args.file)
        E = load_divisor(args.along) if args.along else ToricAdelicDivisor(D.support, [], D.mode)
        summary, table = demo_report(D, E, args.length)
        return render(summary, args.format, table)
    raise AssertionError(args.command)  # pragma: no cover


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _run(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (DivisorError, GeometryError, ConcaveError) as exc:
        print(f"invalid data: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
