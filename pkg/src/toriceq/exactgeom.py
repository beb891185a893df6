"""Exact rational polytopes, linear programming and convex-body functionals.

Everything here works over ``fractions.Fraction``.  Hull and vertex
enumeration rescale to integers internally, which keeps the inner loops on
machine-friendly ints.  The LP solver additionally tolerates ``LogLinear``
entries in the right-hand side or in the objective (never both), because
pivoting only ever multiplies those columns by rational ratios.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

__all__ = [
    "Vector",
    "GeometryError",
    "DimensionMismatch",
    "LPInfeasible",
    "LPUnbounded",
    "vec",
    "dot",
    "vadd",
    "vsub",
    "vscale",
    "Polytope",
    "Cone",
    "hull",
    "polytope_from_halfspaces",
    "minkowski_sum",
    "volume",
    "mixed_volume",
    "support",
    "width_along",
    "inradius",
    "lp_solve",
    "lp_maximize",
    "solve_linear",
    "nullspace",
    "rank",
]

Vector = tuple  # tuple of Fraction (or LogLinear where explicitly allowed)


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class LPInfeasible(GeometryError):
    pass


class LPUnbounded(GeometryError):
    pass


# ---------------------------------------------------------------------------
# vectors and small linear algebra


def vec(*coords) -> Vector:
    if len(coords) == 1 and isinstance(coords[0], (list, tuple)):
        coords = coords[0]
    return tuple(c if not isinstance(c, (int, str, float)) else Fraction(c) for c in coords)


def dot(u, x):
    total = Fraction(0)
    for a, b in zip(u, x):
        if a != 0 and b != 0:
            total = total + a * b
    return total


def vadd(u, v) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u) -> Vector:
    return tuple(c * a for a in u)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _den_lcm(values: Iterable[Fraction]) -> int:
    return reduce(_lcm, (Fraction(v).denominator for v in values), 1)


def _det_int(m: list[list[int]]) -> int:
    """Bareiss fraction-free determinant of a square integer matrix."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    a = [row[:] for row in m]
    sgn, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sgn = -sgn
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sgn * a[n - 1][n - 1]


def rank(rows: Sequence[Sequence]) -> int:
    return len(_echelon([list(map(Fraction, r)) for r in rows])[1])


def _echelon(rows: list[list[Fraction]]):
    """Incremental row reduction. Returns (reduced basis rows, pivot columns, used indices)."""
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    used: list[int] = []
    for idx, r in enumerate(rows):
        r = list(r)
        for b, pc in zip(basis, pivots):
            if r[pc] != 0:
                f = r[pc] / b[pc]
                r = [x - f * y for x, y in zip(r, b)]
        pc = next((j for j, x in enumerate(r) if x != 0), None)
        if pc is None:
            continue
        basis.append(r)
        pivots.append(pc)
        used.append(idx)
    return basis, pivots, used


def nullspace(rows: Sequence[Sequence], n: int) -> list[Vector]:
    """Basis of {x in Q^n : r.x = 0 for all rows}, as primitive integer vectors."""
    mat = [list(map(Fraction, r)) for r in rows]
    # full RREF
    piv_cols: list[int] = []
    r_i = 0
    for c in range(n):
        p = next((i for i in range(r_i, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r_i], mat[p] = mat[p], mat[r_i]
        pv = mat[r_i][c]
        mat[r_i] = [x / pv for x in mat[r_i]]
        for i in range(len(mat)):
            if i != r_i and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r_i])]
        piv_cols.append(c)
        r_i += 1
        if r_i == len(mat):
            break
    free = [c for c in range(n) if c not in piv_cols]
    out = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -mat[i][fc]
        out.append(_primitive(v))
    return out


def _primitive(v: Sequence[Fraction]) -> Vector:
    L = _den_lcm(v)
    ints = [int(x * L) for x in v]
    g = reduce(math.gcd, (abs(i) for i in ints), 0) or 1
    return tuple(Fraction(i // g) for i in ints)


def solve_linear(mat: Sequence[Sequence[Fraction]], rhs: Sequence) -> Vector | None:
    """Solve a square system with rational matrix; rhs entries may be LogLinear.

    Returns None when the matrix is singular.
    """
    n = len(mat)
    a = [list(map(Fraction, row)) for row in mat]
    b = list(rhs)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        b[c], b[p] = b[p], b[c]
        pv = a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                b[i] = b[i] - f * b[c]
    x = [Fraction(0)] * n
    for c in range(n - 1, -1, -1):
        s = b[c]
        for j in range(c + 1, n):
            if a[c][j] != 0:
                s = s - a[c][j] * x[j]
        x[c] = s / a[c][c]
    return tuple(x)


# ---------------------------------------------------------------------------
# convex hull


def _normal_through(pts: list[tuple[int, ...]]) -> tuple[int, ...]:
    """Integer normal of the hyperplane through k affinely independent points of Z^k."""
    k = len(pts[0])
    base = pts[0]
    rows = [[p[j] - base[j] for j in range(k)] for p in pts[1:]]
    n = []
    for j in range(k):
        minor = [r[:j] + r[j + 1:] for r in rows]
        n.append((-1) ** j * _det_int(minor))
    g = reduce(math.gcd, (abs(x) for x in n), 0) or 1
    return tuple(x // g for x in n)


def _idot(u, x) -> int:
    return sum(a * b for a, b in zip(u, x))


def _full_dim_hull(pts: list[tuple[int, ...]], init: list[int]):
    """Beneath-beyond hull of integer points spanning Z^k.

    Returns a list of boundary simplices (index tuples) with their outward
    primitive normals and offsets.  Points coplanar with a facet are treated
    as not visible, so the boundary stays a simplicial sphere whose simplices
    may carry non-extreme points; those are filtered later.
    """
    k = len(pts[0])
    csum = [sum(pts[i][j] for i in init) for j in range(k)]
    kk = k + 1
    facets: dict[int, tuple[tuple[int, ...], tuple[int, ...], int]] = {}
    ridge_map: dict[frozenset, set[int]] = {}
    counter = itertools.count()

    def add_facet(idx: tuple[int, ...]):
        n = _normal_through([pts[i] for i in idx])
        b = _idot(n, pts[idx[0]])
        if _idot(n, csum) > kk * b:
            n = tuple(-x for x in n)
            b = -b
        fid = next(counter)
        facets[fid] = (idx, n, b)
        for r in itertools.combinations(idx, k - 1):
            ridge_map.setdefault(frozenset(r), set()).add(fid)

    def drop_facet(fid: int):
        idx, _, _ = facets.pop(fid)
        for r in itertools.combinations(idx, k - 1):
            s = ridge_map[frozenset(r)]
            s.discard(fid)
            if not s:
                del ridge_map[frozenset(r)]

    for omit in range(kk):
        add_facet(tuple(init[:omit] + init[omit + 1:]))

    in_init = set(init)
    for pi, p in enumerate(pts):
        if pi in in_init:
            continue
        visible = [fid for fid, (_, n, b) in facets.items() if _idot(n, p) > b]
        if not visible:
            continue
        vis = set(visible)
        horizon = []
        for fid in visible:
            idx = facets[fid][0]
            for r in itertools.combinations(idx, k - 1):
                others = ridge_map[frozenset(r)] - {fid}
                if not (others & vis):
                    horizon.append(r)
        for fid in visible:
            drop_facet(fid)
        for r in horizon:
            add_facet(tuple(r) + (pi,))
    return list(facets.values())


@dataclass(frozen=True, eq=False)
class Polytope:
    """Nonempty rational polytope with V- and H-representations.

    ``halfspaces`` are pairs (a, b) meaning <a, x> <= b; affine equalities of a
    lower-dimensional polytope appear as two opposite halfspaces.
    """

    vertices: tuple[Vector, ...]
    halfspaces: tuple[tuple[Vector, Fraction], ...]
    dim: int
    ambient: int
    _boundary: tuple = field(default=(), repr=False)
    _scale: int = field(default=1, repr=False)

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.ambient == other.ambient and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.ambient, self.vertices))

    @property
    def is_full_dim(self) -> bool:
        return self.dim == self.ambient

    def contains(self, x) -> bool:
        return all(dot(a, x) <= b for a, b in self.halfspaces)

    def translate(self, t) -> "Polytope":
        return hull([vadd(v, t) for v in self.vertices])

    def scale(self, lam, center=None) -> "Polytope":
        """Homothety x -> center + lam (x - center)."""
        lam = Fraction(lam)
        c = center if center is not None else (Fraction(0),) * self.ambient
        return hull([vadd(c, vscale(lam, vsub(v, c))) for v in self.vertices])

    def tight(self, x) -> list[tuple[Vector, Fraction]]:
        return [(a, b) for a, b in self.halfspaces if dot(a, x) == b]

    @cached_property
    def centroid_of_vertices(self) -> Vector:
        n = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n for i in range(self.ambient))

    @cached_property
    def triangulation(self) -> tuple[tuple[Vector, ...], ...]:
        """Simplices (d+1 vertices each) of a triangulation of a full-dim polytope.

        Cones from the lex-first vertex over boundary simplices not through it.
        """
        d = self.ambient
        if self.dim < d:
            return ()
        if d == 0:
            return ((self.vertices[0],),)
        L = self._scale
        v0 = tuple(int(c * L) for c in self.vertices[0])
        out = []
        for simplex in self._boundary:
            rows = [[p[j] - v0[j] for j in range(d)] for p in simplex]
            if _det_int(rows) != 0:
                out.append((self.vertices[0],) + tuple(tuple(Fraction(c, L) for c in p) for p in simplex))
        return tuple(out)

    @cached_property
    def volume(self) -> Fraction:
        d = self.ambient
        if self.dim < d:
            return Fraction(0)
        if d == 0:
            return Fraction(1)
        L = self._scale
        v0 = tuple(int(c * L) for c in self.vertices[0])
        total = 0
        for simplex in self._boundary:
            rows = [[p[j] - v0[j] for j in range(d)] for p in simplex]
            total += abs(_det_int(rows))
        return Fraction(total, math.factorial(d) * L**d)

    def __repr__(self):
        vs = ", ".join("(" + ", ".join(str(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope(dim={self.dim}, vertices=[{vs}])"


def _as_point(p) -> Vector:
    return tuple(Fraction(c) for c in p)


def hull(points: Iterable) -> Polytope:
    """Convex hull of a nonempty finite set of rational points."""
    pts = sorted(set(_as_point(p) for p in points))
    if not pts:
        raise GeometryError("hull of an empty point set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise DimensionMismatch("points of different dimensions")
    L = _den_lcm(c for p in pts for c in p)
    ipts = [tuple(int(c * L) for c in p) for p in pts]
    base = ipts[0]
    diffs = [[Fraction(p[j] - base[j]) for j in range(d)] for p in ipts[1:]]
    basis, pivots, used = _echelon(diffs)
    k = len(pivots)

    equalities: list[tuple[Vector, Fraction]] = []
    if k < d:
        for w in nullspace(basis, d) if basis else nullspace([], d):
            c = dot(w, pts[0])
            equalities.append((w, c))

    if k == 0:
        hs = []
        for w, c in equalities:
            hs.append((w, c))
            hs.append((tuple(-x for x in w), -c))
        return Polytope((pts[0],), tuple(sorted(hs)), 0, d, (), L)

    order = sorted(pivots)
    proj = [tuple(p[c] for c in order) for p in ipts]
    init = [0] + [u + 1 for u in used]
    simplices = _full_dim_hull(proj, init)

    planes: dict[tuple, None] = {}
    for _, n, b in simplices:
        planes[(n, b)] = None
    planes_l = list(planes)
    on_boundary = sorted({i for idx, _, _ in simplices for i in idx})
    vertex_idx = []
    for i in on_boundary:
        p = proj[i]
        tight = [list(map(Fraction, n)) for n, b in planes_l if _idot(n, p) == b]
        if len(_echelon(tight)[1]) == k:
            vertex_idx.append(i)
    verts = tuple(sorted(pts[i] for i in vertex_idx))

    hs = []
    for n, b in planes_l:
        a = [Fraction(0)] * d
        for j, c in enumerate(order):
            a[c] = Fraction(n[j])
        hs.append((tuple(a), Fraction(b, L)))
    for w, c in equalities:
        hs.append((w, c))
        hs.append((tuple(-x for x in w), -c))
    boundary = ()
    if k == d:
        boundary = tuple(tuple(proj[i] for i in idx) for idx, _, _ in simplices)
    return Polytope(verts, tuple(sorted(hs)), k, d, boundary, L)


def _int_halfspaces(halfspaces, d):
    out = []
    for a, b in halfspaces:
        a = tuple(Fraction(x) for x in a)
        if len(a) != d:
            raise DimensionMismatch("halfspace of wrong dimension")
        L = _den_lcm(list(a) + [Fraction(b)])
        out.append((tuple(int(x * L) for x in a), int(Fraction(b) * L)))
    return out


def vertices_from_halfspaces(halfspaces, d: int) -> list[Vector]:
    """Vertices of a bounded {x : <a,x> <= b} by brute-force basis enumeration."""
    ihs = _int_halfspaces(halfspaces, d)
    # drop trivial rows 0 <= b, detect infeasible ones
    rows = []
    for a, b in ihs:
        if all(x == 0 for x in a):
            if b < 0:
                return []
            continue
        rows.append((a, b))
    rows = list(dict.fromkeys(rows))
    if d == 0:
        return [()]
    found = set()
    for combo in itertools.combinations(range(len(rows)), d):
        mat = [list(rows[i][0]) for i in combo]
        det = _det_int(mat)
        if det == 0:
            continue
        num = []
        for j in range(d):
            m = [r[:j] + [rows[i][1]] + r[j + 1:] for r, i in zip(mat, combo)]
            num.append(_det_int(m))
        if det < 0:
            det, num = -det, [-x for x in num]
        # feasibility: a.(num/det) <= b  <=>  a.num <= b*det
        if all(_idot(a, num) <= b * det for a, b in rows):
            found.add(tuple(Fraction(x, det) for x in num))
    return sorted(found)


def polytope_from_halfspaces(halfspaces, d: int) -> Polytope | None:
    """Polytope {x : <a,x> <= b}, or None if empty.  Caller ensures boundedness."""
    vs = vertices_from_halfspaces(halfspaces, d)
    if not vs:
        return None
    return hull(vs)


# ---------------------------------------------------------------------------
# functionals


def _check_same(*bodies: Polytope):
    d = bodies[0].ambient
    if any(b.ambient != d for b in bodies):
        raise DimensionMismatch("polytopes live in different ambient spaces")
    return d


def minkowski_sum(a: Polytope, b: Polytope) -> Polytope:
    _check_same(a, b)
    return hull(vadd(x, y) for x in a.vertices for y in b.vertices)


def volume(c: Polytope) -> Fraction:
    return c.volume


def mixed_volume(bodies: Sequence[Polytope]) -> Fraction:
    """Mixed volume normalized so that MV(C,...,C) = d! vol(C)."""
    bodies = list(bodies)
    if not bodies:
        raise GeometryError("mixed volume of no bodies")
    d = _check_same(*bodies)
    if len(bodies) != d:
        raise GeometryError(f"mixed volume needs exactly {d} bodies, got {len(bodies)}")
    total = Fraction(0)
    for size in range(1, d + 1):
        sgn = (-1) ** (d - size)
        for J in itertools.combinations(range(d), size):
            s = bodies[J[0]]
            for j in J[1:]:
                s = minkowski_sum(s, bodies[j])
            total += sgn * s.volume
    return total


def support(c: Polytope, u) -> Fraction:
    return max(dot(u, v) for v in c.vertices)


def width_along(c: Polytope, u) -> Fraction:
    if all(x == 0 for x in u):
        raise GeometryError("width along the zero direction")
    return support(c, u) + support(c, tuple(-x for x in u))


def inradius(c: Polytope, b: Polytope) -> Fraction:
    """Largest lam such that a translate of lam*b fits in c."""
    _check_same(c, b)
    if not b.is_full_dim:
        raise GeometryError("inradius needs a full-dimensional reference body")
    d = c.ambient
    if c.dim < d:
        return Fraction(0)
    rows = [(tuple(a) + (support(b, a),), bb) for a, bb in c.halfspaces]
    obj = (Fraction(0),) * d + (Fraction(1),)
    value, _ = lp_maximize(obj, rows)
    return value


@dataclass(frozen=True)
class Cone:
    """Polyhedral cone generated by finitely many rational vectors."""

    generators: tuple[Vector, ...]

    def contains(self, u) -> bool:
        """Membership u = sum lam_i g_i with lam >= 0; u may have LogLinear entries."""
        gens = self.generators
        d = len(u)
        if not gens:
            return all(x == 0 for x in u)
        m = len(gens)
        rows = []
        for j in range(d):
            a = tuple(Fraction(g[j]) for g in gens)
            rows.append((a, u[j]))
            rows.append((tuple(-x for x in a), -u[j]))
        for i in range(m):
            a = [Fraction(0)] * m
            a[i] = Fraction(-1)
            rows.append((tuple(a), Fraction(0)))
        try:
            lp_maximize((Fraction(0),) * m, rows)
        except LPInfeasible:
            return False
        return True


# ---------------------------------------------------------------------------
# exact simplex


def _simplex(c, A, b):
    """maximize c.x s.t. A x <= b, x free.  Bland's rule, two phases.

    Returns (value, x).  Raises LPInfeasible / LPUnbounded.
    """
    m = len(A)
    n = len(c)
    if m == 0:
        if any(ci != 0 for ci in c):
            raise LPUnbounded("no constraints")
        return Fraction(0), (Fraction(0),) * n
    # columns: x+ (n), x- (n), slack (m), artificial (as needed)
    neg_rows = [i for i in range(m) if b[i] < 0]
    n_art = len(neg_rows)
    ncols = 2 * n + m + n_art
    T = []
    rhs = []
    basis = []
    art_of = {}
    for i in range(m):
        row = [Fraction(0)] * ncols
        s = -1 if i in art_of or b[i] < 0 else 1
        for j in range(n):
            row[j] = s * A[i][j]
            row[n + j] = -s * A[i][j]
        row[2 * n + i] = Fraction(s)
        if s < 0:
            a_col = 2 * n + m + len(art_of)
            art_of[i] = a_col
            row[a_col] = Fraction(1)
            basis.append(a_col)
        else:
            basis.append(2 * n + i)
        T.append(row)
        rhs.append(s * b[i])

    def pivot(r, col):
        pv = T[r][col]
        if pv != 1:
            T[r] = [x / pv for x in T[r]]
            rhs[r] = rhs[r] / pv
        row_r = T[r]
        for i in range(len(T)):
            if i != r:
                f = T[i][col]
                if f != 0:
                    T[i] = [x - f * y for x, y in zip(T[i], row_r)]
                    rhs[i] = rhs[i] - f * rhs[r]
        basis[r] = col

    def run(cost, allowed):
        # cost: list over columns, maximize
        while True:
            # reduced costs
            enter = None
            for j in range(ncols):
                if not allowed[j] or j in basis:
                    continue
                rc = cost[j]
                for i in range(len(T)):
                    if T[i][j] != 0 and cost[basis[i]] != 0:
                        rc = rc - cost[basis[i]] * T[i][j]
                if rc > 0:
                    enter = j
                    break
            if enter is None:
                return
            best = None
            for i in range(len(T)):
                if T[i][enter] > 0:
                    ratio = rhs[i] / T[i][enter]
                    if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                raise LPUnbounded("objective unbounded")
            pivot(best[1], enter)

    if n_art:
        cost1 = [Fraction(0)] * ncols
        for col in art_of.values():
            cost1[col] = Fraction(-1)
        run(cost1, [True] * ncols)
        infeas = sum((rhs[i] for i in range(len(T)) if basis[i] >= 2 * n + m), Fraction(0))
        if infeas != 0:
            raise LPInfeasible("constraints are infeasible")
        # drive artificials out of the basis
        for i in range(len(T) - 1, -1, -1):
            if basis[i] >= 2 * n + m:
                col = next((j for j in range(2 * n + m) if T[i][j] != 0), None)
                if col is None:
                    del T[i], rhs[i], basis[i]
                else:
                    pivot(i, col)
    cost2 = [Fraction(0)] * ncols
    for j in range(n):
        cost2[j] = c[j]
        cost2[n + j] = -c[j]
    allowed = [j < 2 * n + m for j in range(ncols)]
    run(cost2, allowed)
    x = [Fraction(0)] * (2 * n)
    for i, col in enumerate(basis):
        if col < 2 * n:
            x[col] = rhs[i]
    sol = tuple(x[j] - x[n + j] for j in range(n))
    return dot(c, sol), sol


def _split(halfspaces):
    A = [tuple(Fraction(x) for x in a) for a, _ in halfspaces]
    b = [bb if not isinstance(bb, (int, str)) else Fraction(bb) for _, bb in halfspaces]
    return A, b


def lp_maximize(objective, halfspaces):
    """One optimal (value, point) of max <c,x> s.t. <a,x> <= b."""
    A, b = _split(halfspaces)
    c = tuple(objective)
    return _simplex(c, A, b)


def lp_solve(objective, halfspaces):
    """Exact optimum and the lexicographically smallest optimal point.

    The tie-break minimizes coordinates one at a time over the optimal face;
    it requires that face to be bounded below in each coordinate.
    """
    A, b = _split(halfspaces)
    c = tuple(objective)
    n = len(c)
    value, x = _simplex(c, A, b)
    rows = list(zip(A, b))
    rows.append((tuple(-ci for ci in c), -value))
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(-1)
        A2, b2 = _split(rows)
        v, _ = _simplex(tuple(e), A2, b2)
        xj = -v
        ej = [Fraction(0)] * n
        ej[j] = Fraction(1)
        rows.append((tuple(ej), xj))
        rows.append((tuple(e), -xj))
    A2, b2 = _split(rows)
    _, x = _simplex((Fraction(0),) * n, A2, b2)
    return value, x
