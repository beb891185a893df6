"""Piecewise-affine concave functions on rational polytopes.

A ``PAConcave`` is a finite min of affine forms on a polytope domain.  Next to
the pieces it keeps the *nodes*: the lifted vertices (x, f(x)) of the graph.
Nodes always have rational x, while heights and piece coefficients may be
``LogLinear``.  Every operation that would need breakpoints of LogLinear
pieces (which are generally irrational) is instead phrased through nodes and
through the activity cells, whose vertices are nodes.

A domain of ``None`` marks a function on all of space, used for metric
functions on the N side.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exactgeom import (
    GeometryError,
    DimensionMismatch,
    Polytope,
    _echelon,
    dot,
    hull,
    lp_maximize,
    nullspace,
    polytope_from_halfspaces,
    solve_linear,
    vadd,
    vsub,
    vscale,
    width_along,
)
from .loglinear import LogLinear, format_scalar, to_float

__all__ = [
    "AffineForm",
    "PAConcave",
    "SupDifferential",
    "ConcaveError",
    "evaluate",
    "maximize",
    "sup_level",
    "legendre_dual",
    "sup_convolution",
    "integral",
    "mixed_integral",
    "sup_differential",
    "zero_is_vertex",
    "decay_probe",
    "weighted_sum",
    "restrict",
]


class ConcaveError(GeometryError):
    pass


def _is_rational(x) -> bool:
    return not isinstance(x, LogLinear)


def _key(x):
    return (to_float(x), format_scalar(x))


@dataclass(frozen=True)
class AffineForm:
    gradient: tuple
    constant: object

    def __call__(self, x):
        return dot(self.gradient, x) + self.constant

    @property
    def rational(self) -> bool:
        return _is_rational(self.constant) and all(map(_is_rational, self.gradient))

    def sort_key(self):
        return tuple(_key(c) for c in self.gradient) + (_key(self.constant),)

    def __str__(self):
        g = ", ".join(format_scalar(c) for c in self.gradient)
        return f"<({g}), x> + {format_scalar(self.constant)}"


def _form(gradient, constant) -> AffineForm:
    g = tuple(c if isinstance(c, (Fraction, LogLinear)) else Fraction(c) for c in gradient)
    c = constant if isinstance(constant, (Fraction, LogLinear)) else Fraction(constant)
    return AffineForm(g, c)


class PAConcave:
    """min of affine forms, restricted to ``domain`` (or everywhere if None)."""

    def __init__(self, domain: Polytope | None, pieces: Sequence[AffineForm], points=()):
        if not pieces:
            raise ConcaveError("a PA concave function needs at least one piece")
        self.domain = domain
        self.pieces = tuple(sorted(set(pieces), key=AffineForm.sort_key))
        self._points = tuple(points)
        d = self.ambient
        if any(len(p.gradient) != d for p in self.pieces):
            raise DimensionMismatch("piece gradient of wrong dimension")

    # constructors

    @classmethod
    def everywhere(cls, pieces: Iterable) -> "PAConcave":
        forms = [p if isinstance(p, AffineForm) else _form(*p) for p in pieces]
        return cls(None, _irredundant_global(forms))

    @classmethod
    def from_nodes(cls, points: Iterable) -> "PAConcave":
        """Least concave function on conv(x) lying above the given (x, h) points."""
        best: dict = {}
        for x, h in points:
            x = tuple(Fraction(c) for c in x)
            h = h if isinstance(h, (Fraction, LogLinear)) else Fraction(h)
            if x not in best or h > best[x]:
                best[x] = h
        if not best:
            raise ConcaveError("no nodes")
        items = sorted(best.items())
        if all(_is_rational(h) for _, h in items):
            pieces = _upper_pieces_rational(items)
        else:
            pieces = _upper_pieces_generic(items)
        domain = hull(x for x, _ in items)
        f = cls(domain, pieces, items)
        return f

    @classmethod
    def from_pieces(cls, domain: Polytope, pieces: Iterable) -> "PAConcave":
        """Restriction of min(pieces) to ``domain``; pieces must be rational."""
        forms = [p if isinstance(p, AffineForm) else _form(*p) for p in pieces]
        if not forms:
            raise ConcaveError("no pieces")
        if not all(f.rational for f in forms):
            raise ConcaveError("from_pieces needs rational pieces; build LogLinear functions from nodes")
        d = domain.ambient
        if any(len(f.gradient) != d for f in forms):
            raise DimensionMismatch("piece gradient of wrong dimension")
        low = min(min(f(v) for f in forms) for v in domain.vertices) - 1
        hs = [(tuple(a) + (Fraction(0),), b) for a, b in domain.halfspaces]
        for f in forms:
            hs.append((tuple(-g for g in f.gradient) + (Fraction(1),), f.constant))
        hs.append(((Fraction(0),) * d + (Fraction(-1),), -low))
        from .exactgeom import vertices_from_halfspaces

        pts = [(v[:d], v[d]) for v in vertices_from_halfspaces(hs, d + 1) if v[d] > low]
        return cls.from_nodes(pts)

    @classmethod
    def constant(cls, domain: Polytope, c) -> "PAConcave":
        return cls.affine(domain, (0,) * domain.ambient, c)

    @classmethod
    def affine(cls, domain: Polytope, gradient, c) -> "PAConcave":
        form = _form(gradient, c)
        return cls.from_nodes((v, form(v)) for v in domain.vertices)

    # basic data

    @property
    def ambient(self) -> int:
        if self.domain is not None:
            return self.domain.ambient
        return len(self.pieces[0].gradient)

    @property
    def rational(self) -> bool:
        return all(p.rational for p in self.pieces)

    def __call__(self, x):
        return min(p(x) for p in self.pieces)

    @cached_property
    def cells(self) -> tuple[tuple[Polytope, AffineForm], ...]:
        """Activity cells: for each piece, the hull of graph points on it."""
        self._need_domain()
        out = []
        for p in self.pieces:
            on = [x for x, h in self._points if p(x) == h]
            if on:
                out.append((hull(on), p))
        return tuple(out)

    @cached_property
    def nodes(self) -> tuple[tuple[tuple, object], ...]:
        """Lifted graph vertices (x, f(x)), sorted by x."""
        self._need_domain()
        xs = sorted({v for cell, _ in self.cells for v in cell.vertices})
        return tuple((x, self(x)) for x in xs)

    def _need_domain(self):
        if self.domain is None:
            raise ConcaveError("operation needs a polytope domain")

    def is_constant(self) -> bool:
        vals = {h for _, h in self.nodes}
        return len(vals) == 1

    def shift(self, c) -> "PAConcave":
        if self.domain is None:
            return PAConcave(None, [AffineForm(p.gradient, p.constant + c) for p in self.pieces])
        return PAConcave.from_nodes((x, h + c) for x, h in self.nodes)

    def scale(self, lam) -> "PAConcave":
        lam = Fraction(lam)
        if lam < 0:
            raise ConcaveError("negative scaling breaks concavity")
        if self.domain is None:
            return PAConcave(None, [AffineForm(vscale(lam, p.gradient), lam * p.constant) for p in self.pieces])
        return PAConcave.from_nodes((x, lam * h) for x, h in self.nodes)

    def dominated_by(self, other: "PAConcave") -> bool:
        """self <= other on self's domain (which must lie in other's domain)."""
        if other.domain is not None and not all(other.domain.contains(x) for x, _ in self.nodes):
            return False
        return all(h <= other(x) for x, h in self.nodes)

    def __eq__(self, other):
        if not isinstance(other, PAConcave):
            return NotImplemented
        if self.domain is None or other.domain is None:
            return self.domain is None and other.domain is None and self.pieces == other.pieces
        return self.domain == other.domain and self.dominated_by(other) and other.dominated_by(self)

    def __hash__(self):
        return hash((self.domain, len(self.pieces)))

    def __repr__(self):
        ps = "; ".join(str(p) for p in self.pieces)
        return f"PAConcave(domain={self.domain!r}, pieces=[{ps}])"


# ---------------------------------------------------------------------------
# upper envelopes


def _upper_pieces_rational(items) -> list[AffineForm]:
    d = len(items[0][0])
    low = min(h for _, h in items) - 1
    lifted = [x + (h,) for x, h in items] + [x + (low,) for x, _ in items]
    P = hull(lifted)
    pieces = []
    for a, b in P.halfspaces:
        at = a[d]
        if at > 0:
            pieces.append(AffineForm(tuple(-c / at for c in a[:d]), b / at))
    return pieces


def _affine_frame(xs):
    base = xs[0]
    diffs = [list(vsub(x, base)) for x in xs[1:]]
    _, pivots, _ = _echelon(diffs)
    return sorted(pivots)


def _upper_pieces_generic(items) -> list[AffineForm]:
    """Upper facets by brute force over affinely independent node subsets."""
    d = len(items[0][0])
    order = _affine_frame([x for x, _ in items])
    k = len(order)
    if k == 0:
        return [AffineForm((Fraction(0),) * d, items[0][1])]
    ys = [tuple(x[c] for c in order) for x, _ in items]
    hs = [h for _, h in items]
    found = {}
    for combo in itertools.combinations(range(len(items)), k + 1):
        mat = [list(ys[i]) + [Fraction(1)] for i in combo]
        sol = solve_linear(mat, [hs[i] for i in combo])
        if sol is None:
            continue
        g, c = sol[:k], sol[k]
        if all(dot(g, y) + c >= h for y, h in zip(ys, hs)):
            full = [Fraction(0)] * d
            for j, col in enumerate(order):
                full[col] = g[j]
            form = AffineForm(tuple(full), c)
            found[form] = None
    return list(found)


def _irredundant_global(forms: list[AffineForm]) -> list[AffineForm]:
    """Drop pieces of a global min that are never strictly smallest."""
    forms = list(dict.fromkeys(forms))
    if len(forms) == 1 or not all(f.rational for f in forms):
        return forms
    d = len(forms[0].gradient)
    kept = list(forms)
    for f in list(forms):
        others = [g for g in kept if g is not f]
        if not others:
            break
        # maximize s : f(u) + s <= g(u) for all other g, s <= 1
        rows = []
        for g in others:
            a = tuple(fg - gg for fg, gg in zip(f.gradient, g.gradient)) + (Fraction(1),)
            rows.append((a, g.constant - f.constant))
        rows.append(((Fraction(0),) * d + (Fraction(1),), Fraction(1)))
        try:
            s, _ = lp_maximize((Fraction(0),) * d + (Fraction(1),), rows)
        except GeometryError:
            s = Fraction(0)
        if s <= 0:
            kept = others
    return kept


# ---------------------------------------------------------------------------
# operations


def evaluate(f: PAConcave, x):
    x = tuple(Fraction(c) for c in x)
    if f.domain is not None and not f.domain.contains(x):
        raise ConcaveError(f"point {tuple(map(str, x))} outside the domain")
    return f(x)


@dataclass(frozen=True)
class MaxResult:
    mu: object
    argmax: tuple
    max_face: Polytope


def maximize(f: PAConcave) -> MaxResult:
    f._need_domain()
    d = f.ambient
    if f.rational:
        rows = [(tuple(a) + (Fraction(0),), b) for a, b in f.domain.halfspaces]
        for p in f.pieces:
            rows.append((tuple(-g for g in p.gradient) + (Fraction(1),), p.constant))
        mu, _ = lp_maximize((Fraction(0),) * d + (Fraction(1),), rows)
        face = sup_level(f, mu)
    else:
        mu = max(h for _, h in f.nodes)
        face = hull(x for x, h in f.nodes if h == mu)
    return MaxResult(mu, face.vertices[0], face)


def _max_node_value(f: PAConcave):
    return max(h for _, h in f.nodes)


def sup_level(f: PAConcave, t) -> Polytope:
    """S_t(f) = {x in domain : f(x) >= t}."""
    f._need_domain()
    mu = _max_node_value(f)
    if t > mu:
        raise ConcaveError("level above the maximum: empty sup-level set")
    if t == mu:
        return hull(x for x, h in f.nodes if h == mu)
    if not (f.rational and _is_rational(t)):
        raise ConcaveError("sup-level sets below the maximum need rational data")
    hs = list(f.domain.halfspaces)
    for p in f.pieces:
        hs.append((tuple(-g for g in p.gradient), p.constant - t))
    P = polytope_from_halfspaces(hs, f.ambient)
    if P is None:  # pragma: no cover - excluded by t <= mu
        raise ConcaveError("empty sup-level set")
    return P


def restrict(f: PAConcave, target: Polytope) -> PAConcave:
    """f restricted to a sub-polytope of its domain (or of all space)."""
    if f.domain is None:
        if f.rational:
            return PAConcave.from_pieces(target, f.pieces)
        raise ConcaveError("restricting a LogLinear global function needs a dual description")
    if not all(f.domain.contains(v) for v in target.vertices):
        raise ConcaveError("target is not contained in the domain")
    pts = []
    for cell, _ in f.cells:
        P = polytope_from_halfspaces(list(cell.halfspaces) + list(target.halfspaces), f.ambient)
        if P is not None:
            pts.extend(P.vertices)
    pts.extend(target.vertices)
    return PAConcave.from_nodes((x, f(x)) for x in set(pts) if target.contains(x))


def legendre_dual(f: PAConcave, target: Polytope | None = None) -> PAConcave:
    """Concave Legendre-Fenchel transform g(x) = inf_u <u,x> - f(u).

    For f = min_i <a_i,u> + b_i on all of space the result lives on conv(a_i)
    with hypograph conv{(a_i, -b_i)}; for f on a polytope the result is the
    global function min over nodes v of <v,u> - f(v).
    """
    if f.domain is None:
        g = PAConcave.from_nodes((p.gradient, -p.constant) for p in f.pieces)
        if target is None:
            return g
        if target.ambient != g.ambient:
            raise DimensionMismatch("target of wrong dimension")
        return restrict(g, target)
    pieces = [AffineForm(x, -h) for x, h in f.nodes]
    return PAConcave(None, pieces)


def sup_convolution(f: PAConcave, g: PAConcave) -> PAConcave:
    if f.ambient != g.ambient:
        raise DimensionMismatch("sup-convolution of functions in different dimensions")
    f._need_domain()
    g._need_domain()
    return PAConcave.from_nodes((vadd(x, y), h + k) for x, h in f.nodes for y, k in g.nodes)


def _simplex_volume(simplex) -> Fraction:
    import math

    v0 = simplex[0]
    rows = [vsub(v, v0) for v in simplex[1:]]
    d = len(v0)
    mat = [list(r) for r in rows]
    det = solve_det(mat)
    return abs(det) / math.factorial(d)


def solve_det(mat) -> Fraction:
    n = len(mat)
    a = [list(map(Fraction, r)) for r in mat]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                fct = a[i][c] / a[c][c]
                a[i] = [x - fct * y for x, y in zip(a[i], a[c])]
    return det


def integral(f: PAConcave):
    """Exact integral over the domain (0 on lower-dimensional domains)."""
    f._need_domain()
    if not f.domain.is_full_dim:
        return Fraction(0)
    d = f.ambient
    total = Fraction(0)
    for cell, piece in f.cells:
        for simplex in cell.triangulation:
            vol = _simplex_volume(simplex)
            mean = sum((piece(v) for v in simplex), Fraction(0)) / (d + 1)
            total = total + vol * mean
    return total


def mixed_integral(fs: Sequence[PAConcave]):
    """Mixed integral normalized so that MI(f,...,f) = (d+1)! * integral(f)."""
    fs = list(fs)
    if not fs:
        raise ConcaveError("mixed integral of no functions")
    d = fs[0].ambient
    if any(f.ambient != d for f in fs):
        raise DimensionMismatch("functions in different dimensions")
    if len(fs) != d + 1:
        raise ConcaveError(f"mixed integral needs exactly {d + 1} functions, got {len(fs)}")
    conv: dict[tuple[int, ...], PAConcave] = {}
    total = Fraction(0)
    for size in range(1, d + 2):
        sgn = (-1) ** (d + 1 - size)
        for J in itertools.combinations(range(d + 1), size):
            if size == 1:
                h = fs[J[0]]
            else:
                h = sup_convolution(conv[J[:-1]], fs[J[-1]])
            conv[J] = h
            total = total + sgn * integral(h)
    return total


def weighted_sum(fs: Sequence[PAConcave], weights: Sequence) -> PAConcave:
    """sum_i w_i f_i on a common domain, via the common refinement of cells."""
    fs = list(fs)
    if not fs:
        raise ConcaveError("empty sum")
    dom = fs[0].domain
    if any(f.domain != dom for f in fs):
        raise ConcaveError("summands must share their domain")
    weights = [Fraction(w) for w in weights]
    d = fs[0].ambient
    regions = [dom]
    for f in fs:
        if len(f.cells) == 1:
            continue
        new = []
        for R in regions:
            for cell, _ in f.cells:
                P = polytope_from_halfspaces(list(R.halfspaces) + list(cell.halfspaces), d)
                if P is not None and P.dim == dom.dim:
                    new.append(P)
        regions = new
    pts = {v for R in regions for v in R.vertices}

    def value(x):
        return sum((w * f(x) for w, f in zip(weights, fs)), Fraction(0))

    return PAConcave.from_nodes((x, value(x)) for x in pts)


# ---------------------------------------------------------------------------
# sup-differentials


@dataclass(frozen=True)
class SupDifferential:
    """Sup-differential at ``base_point``: conv(points) + cone(rays).

    ``constraints`` is an optional H-description: pairs (w, c) meaning
    <u, w> >= c.  Functions produce both; hand-built sets may give generators only.
    """

    base_point: tuple
    points: tuple
    rays: tuple = ()
    constraints: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.base_point)

    def contains(self, u) -> bool:
        if self.constraints is not None:
            return all(dot(u, w) >= c for w, c in self.constraints)
        return _gen_member(self, u)


def _gen_member(s: SupDifferential, u) -> bool:
    p, r, d = len(s.points), len(s.rays), s.dim
    n = p + r
    rows = []
    for j in range(d):
        a = tuple(Fraction(pt[j]) for pt in s.points) + tuple(Fraction(ry[j]) for ry in s.rays)
        rows.append((a, u[j]))
        rows.append((tuple(-x for x in a), -u[j]))
    one = (Fraction(1),) * p + (Fraction(0),) * r
    rows.append((one, Fraction(1)))
    rows.append((tuple(-x for x in one), Fraction(-1)))
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(-1)
        rows.append((tuple(e), Fraction(0)))
    try:
        lp_maximize((Fraction(0),) * n, rows)
    except GeometryError:
        return False
    return True


def sup_differential(f: PAConcave, x0) -> SupDifferential:
    f._need_domain()
    x0 = tuple(Fraction(c) for c in x0)
    if not f.domain.contains(x0):
        raise ConcaveError("base point outside the domain")
    f0 = f(x0)
    active = tuple(p.gradient for p in f.pieces if p(x0) == f0)
    rays = tuple(tuple(-c for c in a) for a, b in f.domain.tight(x0))
    cons = tuple((vsub(x, x0), h - f0) for x, h in f.nodes)
    return SupDifferential(x0, active, rays, cons)


@dataclass(frozen=True)
class VertexTest:
    is_vertex: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.is_vertex


def zero_is_vertex(s: SupDifferential) -> VertexTest:
    """Is 0 a vertex of s?  Otherwise return u != 0 with u and -u in s."""
    d = s.dim
    if s.constraints is not None:
        if any(c > 0 for _, c in s.constraints):
            raise ConcaveError("0 is not in the sup-differential")
        tight = [w for w, c in s.constraints if c == 0 and any(x != 0 for x in w)]
        null = nullspace(tight, d) if tight else nullspace([], d)
        if not null:
            return VertexTest(True)
        u = null[0]
        t = None
        for w, c in s.constraints:
            uw = abs(dot(u, w))
            if c != 0 and uw != 0:
                r = -c / uw
                t = r if t is None or r < t else t
        if t is not None and t < 1:
            u = tuple(t * x for x in u)
        return VertexTest(False, u)
    if not _gen_member(s, (Fraction(0),) * d):
        raise ConcaveError("0 is not in the sup-differential")
    for j in range(d):
        for sg in (1, -1):
            res = _symmetric_probe(s, j, sg)
            if res is not None:
                return VertexTest(False, res)
    return VertexTest(True)


def _symmetric_probe(s: SupDifferential, j: int, sg: int):
    """max sg*u_j over {u : u, -u in s, sg*u_j <= 1}; returns u if the max is > 0."""
    d, p, r = s.dim, len(s.points), len(s.rays)
    n = d + 2 * (p + r)
    rows = []

    def gen_block(sign_u, offset):
        for k in range(d):
            a = [Fraction(0)] * n
            a[k] = Fraction(sign_u)
            for i, pt in enumerate(s.points):
                a[offset + i] = -Fraction(pt[k])
            for i, ry in enumerate(s.rays):
                a[offset + p + i] = -Fraction(ry[k])
            rows.append((tuple(a), Fraction(0)))
            rows.append((tuple(-x for x in a), Fraction(0)))
        a = [Fraction(0)] * n
        for i in range(p):
            a[offset + i] = Fraction(1)
        rows.append((tuple(a), Fraction(1)))
        rows.append((tuple(-x for x in a), Fraction(-1)))

    gen_block(1, d)
    gen_block(-1, d + p + r)
    for i in range(d, n):
        e = [Fraction(0)] * n
        e[i] = Fraction(-1)
        rows.append((tuple(e), Fraction(0)))
    obj = [Fraction(0)] * n
    obj[j] = Fraction(sg)
    rows.append((tuple(obj), Fraction(1)))
    val, x = lp_maximize(tuple(obj), rows)
    if val > 0:
        return tuple(x[:d])
    return None


def decay_probe(f: PAConcave, direction, levels) -> list[Fraction]:
    """(mu - t) / width_along(S_t(f), direction) at each level t < mu."""
    mu = maximize(f).mu
    out = []
    for t in levels:
        t = Fraction(t)
        if t >= mu:
            raise ConcaveError("probe levels must lie strictly below the maximum")
        w = width_along(sup_level(f, t), direction)
        if w == 0:
            raise ConcaveError("sup-level set has zero width along the direction")
        out.append((mu - t) / w)
    return out
