"""JSON divisor and dynamics files: parsing with field diagnostics, canonical dumping."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .concave import AffineForm, ConcaveError, PAConcave
from .dynamical import DynamicalData
from .exactgeom import Cone, GeometryError, Polytope, hull
from .loglinear import LogLinear, format_scalar, parse_scalar
from .toric import (
    ABSTRACT,
    ARCHIMEDEAN,
    NONARCHIMEDEAN,
    Canonical,
    DivisorError,
    Metric,
    Place,
    Roof,
    ToricAdelicDivisor,
    VirtualSupport,
)

__all__ = [
    "ParseError",
    "load_divisor",
    "parse_divisor",
    "divisor_to_data",
    "dump_divisor",
    "load_dynamics",
    "parse_dynamics",
    "to_jsonable",
]


class ParseError(ValueError):
    """Malformed input; the message names the line or the offending field."""


def _loads(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object")
    if key not in obj:
        raise ParseError(f"{path}.{key}: missing field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ParseError(f"{path}.{key}: expected {kind.__name__ if isinstance(kind, type) else 'a list'}")
    return val


def _num(x, path, allow_log=False):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ParseError(f"{path}: expected an exact number as a string or integer, got {x!r}")
    try:
        val = parse_scalar(x) if isinstance(x, str) else Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if isinstance(val, LogLinear) and not allow_log:
        raise ParseError(f"{path}: logarithms are not allowed here")
    return val


def _vector(x, d, path, allow_log=False):
    if not isinstance(x, list):
        raise ParseError(f"{path}: expected a list")
    if d is not None and len(x) != d:
        raise ParseError(f"{path}: expected {d} coordinates, got {len(x)}")
    return tuple(_num(c, f"{path}[{i}]", allow_log) for i, c in enumerate(x))


def _pieces(raw, d, path, allow_log):
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{path}: expected a nonempty list of pieces")
    out = []
    for i, pc in enumerate(raw):
        p = f"{path}[{i}]"
        g = _vector(_need(pc, "gradient", p), d, f"{p}.gradient")
        c = _num(_need(pc, "constant", p), f"{p}.constant", allow_log)
        out.append(AffineForm(g, c))
    return out


def _support(raw, d, path):
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: expected an object")
    if "polytope" in raw:
        verts = raw["polytope"]
        if not isinstance(verts, list) or not verts:
            raise ParseError(f"{path}.polytope: expected a nonempty vertex list")
        pts = [_vector(v, d, f"{path}.polytope[{i}]") for i, v in enumerate(verts)]
        return hull(pts)
    cones = _need(raw, "cones", path, list)
    cs, forms = [], []
    for i, c in enumerate(cones):
        p = f"{path}.cones[{i}]"
        rays = _need(c, "rays", p, list)
        cs.append(Cone(tuple(_vector(r, d, f"{p}.rays[{j}]") for j, r in enumerate(rays))))
        forms.append(_vector(_need(c, "form", p), d, f"{p}.form"))
    return VirtualSupport(tuple(cs), tuple(forms))


def _place(raw, i, mode):
    path = f"places[{i}]"
    name = _need(raw, "name", path, str)
    kind = raw.get("kind", ABSTRACT)
    if kind not in (ARCHIMEDEAN, NONARCHIMEDEAN, ABSTRACT):
        raise ParseError(f"{path}.kind: unknown place kind {kind!r}")
    weight = _num(raw.get("weight", "1"), f"{path}.weight")
    prime = raw.get("prime")
    if prime is not None and (isinstance(prime, bool) or not isinstance(prime, int)):
        raise ParseError(f"{path}.prime: expected an integer")
    return Place(name, kind, weight, prime)


def _datum(raw, place, delta_of, d, mode, path):
    typ = _need(raw, "type", path, str)
    allow_log = mode == "q"
    if typ == "canonical":
        return Canonical()
    if typ == "metric":
        combine = raw.get("combine", "min")
        if combine not in ("min", "max"):
            raise ParseError(f"{path}.combine: expected 'min' or 'max'")
        pieces = _pieces(_need(raw, "pieces", path), d, f"{path}.pieces", allow_log)
        if combine == "max" and len(set(pieces)) > 1:
            raise DivisorError(f"place {place.name}: the metric is a max of affine forms and not concave")
        return Metric(PAConcave(None, pieces))
    if typ == "roof":
        delta = delta_of()
        if "nodes" in raw:
            nodes = []
            for j, nd in enumerate(_need(raw, "nodes", path, list)):
                p = f"{path}.nodes[{j}]"
                nodes.append(
                    (_vector(_need(nd, "point", p), d, f"{p}.point"),
                     _num(_need(nd, "value", p), f"{p}.value", allow_log))
                )
            th = PAConcave.from_nodes(nodes)
            if th.domain != delta:
                raise DivisorError(f"place {place.name}: roof nodes do not span the polytope")
            return Roof(th)
        pieces = _pieces(_need(raw, "pieces", path), d, f"{path}.pieces", allow_log)
        if all(p.rational for p in pieces):
            return Roof(PAConcave.from_pieces(delta, pieces))
        if len(pieces) == 1:
            return Roof(PAConcave.affine(delta, pieces[0].gradient, pieces[0].constant))
        raise ParseError(f"{path}: roofs with several logarithmic pieces must be given by nodes")
    raise ParseError(f"{path}.type: unknown datum type {typ!r}")


def parse_divisor(data: Any) -> ToricAdelicDivisor:
    if not isinstance(data, dict):
        raise ParseError("top level: expected an object")
    d = _need(data, "dim", "top level")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ParseError("dim: expected a positive integer")
    mode = data.get("mode", "abstract")
    if mode not in ("q", "abstract"):
        raise ParseError(f"mode: expected 'q' or 'abstract', got {mode!r}")
    try:
        support = _support(_need(data, "support", "top level"), d, "support")
        from .toric import polytope_of

        delta = polytope_of(support)
        if delta is None:
            raise DivisorError("the polytope of the divisor is empty")
        places = []
        raw_places = data.get("places", [])
        if not isinstance(raw_places, list):
            raise ParseError("places: expected a list")
        for i, rp in enumerate(raw_places):
            p = _place(rp, i, mode)
            dt = _datum(_need(rp, "datum", f"places[{i}]"), p, lambda: delta, d, mode, f"places[{i}].datum")
            places.append((p, dt))
        return ToricAdelicDivisor(support, places, mode)
    except (GeometryError, ConcaveError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise DivisorError(str(exc)) from None


def load_divisor(path: str) -> ToricAdelicDivisor:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_divisor(_loads(text, path))


# ---------------------------------------------------------------------------
# dumping


def _s(x) -> str:
    return format_scalar(x)


def _vec_s(v) -> list[str]:
    return [_s(c) for c in v]


def _pieces_s(f: PAConcave) -> list[dict]:
    return [{"gradient": _vec_s(p.gradient), "constant": _s(p.constant)} for p in f.pieces]


def divisor_to_data(D: ToricAdelicDivisor) -> dict:
    if isinstance(D.support, Polytope):
        support = {"polytope": [_vec_s(v) for v in D.support.vertices]}
    else:
        support = {
            "cones": [
                {"rays": [_vec_s(g) for g in c.generators], "form": _vec_s(m)}
                for c, m in zip(D.support.cones, D.support.forms)
            ]
        }
    places = []
    for p, dt in D.places:
        entry = {"name": p.name, "kind": p.kind, "weight": _s(p.weight)}
        if p.prime is not None:
            entry["prime"] = p.prime
        if isinstance(dt, Canonical):
            entry["datum"] = {"type": "canonical"}
        elif isinstance(dt, Metric):
            entry["datum"] = {"type": "metric", "pieces": _pieces_s(dt.psi)}
        else:
            th = dt.theta
            if th.rational or len(th.pieces) == 1:
                entry["datum"] = {"type": "roof", "pieces": _pieces_s(th)}
            else:
                entry["datum"] = {
                    "type": "roof",
                    "nodes": [{"point": _vec_s(x), "value": _s(h)} for x, h in th.nodes],
                }
        places.append(entry)
    return {"dim": D.dim, "mode": D.mode, "support": support, "places": places}


def dump_divisor(D: ToricAdelicDivisor) -> str:
    return json.dumps(divisor_to_data(D), indent=2) + "\n"


# ---------------------------------------------------------------------------
# dynamics


def parse_dynamics(data: Any) -> DynamicalData:
    if not isinstance(data, dict):
        raise ParseError("top level: expected an object")
    q = _need(data, "q", "top level", list)
    qs = tuple(_num(x, f"q[{i}]") for i, x in enumerate(q))
    if "s" in data and data["s"] != len(qs):
        raise ParseError(f"s: declared {data['s']} but {len(qs)} degrees given")
    deg = _num(_need(data, "deg", "top level"), "deg")
    d = _need(data, "d", "top level")
    if isinstance(d, bool) or not isinstance(d, int):
        raise ParseError("d: expected an integer")
    table = data.get("table")
    if table is not None:
        if not isinstance(table, dict):
            raise ParseError("table: expected an object")
        conv = {}
        for key in ("arith", "geom"):
            if key in table:
                conv[key] = {
                    k: (_num(v, f"table.{key}.{k}") if _looks_numeric(v) else v)
                    for k, v in table[key].items()
                }
        if "degree" in table:
            conv["degree"] = _num(table["degree"], "table.degree")
        table = conv
    try:
        return DynamicalData(qs, deg, d, table)
    except ValueError as exc:
        raise DivisorError(str(exc)) from None


def _looks_numeric(v) -> bool:
    if isinstance(v, int) and not isinstance(v, bool):
        return True
    if isinstance(v, str):
        try:
            Fraction(v)
            return True
        except ValueError:
            return False
    return False


def load_dynamics(path: str) -> tuple[DynamicalData, Any]:
    with open(path, encoding="utf-8") as fh:
        data = _loads(fh.read(), path)
    mu_abs = None
    if isinstance(data, dict) and "mu_abs" in data:
        mu_abs = _num(data["mu_abs"], "mu_abs")
    return parse_dynamics(data), mu_abs


def to_jsonable(x):
    """Exact values as strings, containers recursively."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction, LogLinear)):
        return _s(x)
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")
