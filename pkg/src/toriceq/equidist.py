"""Wideness, balanced sup-gradients, equidistribution data and Gauss-Mahler measures."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .concave import maximize, sup_differential, zero_is_vertex
from .exactgeom import LPInfeasible, dot, lp_maximize, lp_solve
from .loglinear import LogLinear, factorize, log_of, padic_valuation, to_float
from .toric import (
    ARCHIMEDEAN,
    Canonical,
    DivisorError,
    Place,
    PreconditionError,
    ToricAdelicDivisor,
)

__all__ = [
    "LogLinear",
    "LaurentPolynomial",
    "WideResult",
    "BalancedGradients",
    "MeasureDescriptor",
    "MahlerValue",
    "NotWide",
    "is_wide",
    "balanced_gradients",
    "equidistribution_measures",
    "derivative_essmin",
    "derivative_with_rational_twist",
    "gauss_mahler",
    "log_equidistribution_eligible",
]


class NotWide(PreconditionError):
    """The global roof is not wide at its maximum."""


@dataclass(frozen=True)
class WideResult:
    wide: bool
    base_point: tuple
    witness: object  # SupDifferential when wide, a direction otherwise

    def __bool__(self):
        return self.wide


def is_wide(D: ToricAdelicDivisor) -> WideResult:
    if not D.delta.is_full_dim:
        raise PreconditionError("wideness needs a full-dimensional polytope")
    th = D.global_roof
    x0 = maximize(th).argmax
    s = sup_differential(th, x0)
    test = zero_is_vertex(s)
    if test.is_vertex:
        return WideResult(True, x0, s)
    return WideResult(False, x0, test.witness)


@dataclass(frozen=True)
class BalancedGradients:
    base_point: tuple
    gradients: dict  # place name -> vector
    weights: dict
    unique: bool | None = None

    def __getitem__(self, name):
        return self.gradients[name]


def _balanced_lp_rows(D: ToricAdelicDivisor, x0, live):
    """Constraints <u_v, n - x0> >= theta_v(n) - theta_v(x0), sum n_v u_v = 0."""
    d = D.dim
    k = len(live)
    nv = k * d
    rows = []
    for i, p in enumerate(live):
        th = D.roofs[p.name]
        f0 = th(x0)
        for x, h in th.nodes:
            w = tuple(a - b for a, b in zip(x, x0))
            if all(c == 0 for c in w):
                continue
            a = [Fraction(0)] * nv
            for j in range(d):
                a[i * d + j] = -w[j]
            rows.append((tuple(a), f0 - h))
    for j in range(d):
        a = [Fraction(0)] * nv
        for i, p in enumerate(live):
            a[i * d + j] = p.weight
        rows.append((tuple(a), Fraction(0)))
        rows.append((tuple(-c for c in a), Fraction(0)))
    return rows


def balanced_gradients(D: ToricAdelicDivisor, x0=None) -> BalancedGradients:
    """Balanced family of sup-gradients at a maximizer of the global roof.

    Among all balanced families the one of least l1 norm is returned, ties
    broken lexicographically; when the roof is wide the family is unique and
    this is checked coordinate by coordinate.
    """
    d = D.dim
    if x0 is None:
        x0 = maximize(D.global_roof).argmax
    live = [p for p, dt in D.places if not isinstance(dt, Canonical)]
    grads = {p.name: (Fraction(0),) * d for p in D.place_list}
    weights = {p.name: p.weight for p in D.place_list}
    if not live:
        return BalancedGradients(tuple(x0), grads, weights, True)
    rows = _balanced_lp_rows(D, x0, live)
    nv = len(live) * d
    # l1 minimization: t_i >= |u_i|
    ext = [(a + (Fraction(0),) * nv, b) for a, b in rows]
    for i in range(nv):
        e = [Fraction(0)] * (2 * nv)
        e[i], e[nv + i] = Fraction(1), Fraction(-1)
        ext.append((tuple(e), Fraction(0)))
        e = [Fraction(0)] * (2 * nv)
        e[i], e[nv + i] = Fraction(-1), Fraction(-1)
        ext.append((tuple(e), Fraction(0)))
    obj = (Fraction(0),) * nv + (Fraction(-1),) * nv
    try:
        best, _ = lp_maximize(obj, ext)
    except LPInfeasible:  # pragma: no cover - existence is a theorem
        raise AssertionError("no balanced family found")
    ext.append((tuple(-c for c in obj), -best))
    _, sol = lp_solve((Fraction(0),) * (2 * nv), ext)
    u = sol[:nv]
    for i, p in enumerate(live):
        grads[p.name] = tuple(u[i * d:(i + 1) * d])
    wide = is_wide(D).wide if D.delta.is_full_dim else False
    unique = None
    if wide:
        unique = _check_unique(rows, u)
        if not unique:  # pragma: no cover
            raise AssertionError("balanced family is not unique although the roof is wide")
    return BalancedGradients(tuple(x0), grads, weights, unique)


def _check_unique(rows, u) -> bool:
    n = len(u)
    for j in range(n):
        for s in (1, -1):
            c = [Fraction(0)] * n
            c[j] = Fraction(s)
            val, _ = lp_maximize(tuple(c), rows)
            if val != s * u[j]:
                return False
    return True


@dataclass(frozen=True)
class MeasureDescriptor:
    place: Place
    u: tuple
    kind: str  # "haar_on_translated_compact_torus" | "dirac_at_shifted_gauss_point"


def equidistribution_measures(D: ToricAdelicDivisor) -> list[MeasureDescriptor]:
    w = is_wide(D)
    if not w.wide:
        raise NotWide("the global roof is not wide: no equidistribution")
    bg = balanced_gradients(D, w.base_point)
    out = []
    for p in D.place_list:
        kind = (
            "haar_on_translated_compact_torus"
            if p.kind == ARCHIMEDEAN
            else "dirac_at_shifted_gauss_point"
        )
        out.append(MeasureDescriptor(p, bg.gradients[p.name], kind))
    return out


def _wide_gradients(D: ToricAdelicDivisor) -> BalancedGradients:
    w = is_wide(D)
    if not w.wide:
        raise NotWide("the global roof is not wide")
    return balanced_gradients(D, w.base_point)


def derivative_essmin(D: ToricAdelicDivisor, E: ToricAdelicDivisor, bg=None):
    """-sum_v n_v psi_{E,v}(u_v)."""
    if D.dim != E.dim:
        raise DivisorError("dimension mismatch")
    bg = bg or _wide_gradients(D)
    names = [p.name for p in D.place_list] + [
        p.name for p in E.place_list if p.name not in bg.gradients
    ]
    zero = (Fraction(0),) * D.dim
    total = Fraction(0)
    for n in names:
        u = bg.gradients.get(n, zero)
        w = bg.weights.get(n) or E.place(n).weight
        if n in {p.name for p in E.place_list}:
            if E.place(n).weight != w:
                raise DivisorError(f"place {n} carries different weights")
        psi = E.metric(n)
        total = total - w * psi(u)
    return total


# ---------------------------------------------------------------------------
# Laurent polynomials and Gauss-Mahler measures


@dataclass(frozen=True)
class LaurentPolynomial:
    terms: tuple  # ((exponent tuple, Fraction coefficient), ...), sorted, nonzero

    @staticmethod
    def make(terms) -> "LaurentPolynomial":
        acc: dict = {}
        for m, c in (terms.items() if isinstance(terms, Mapping) else terms):
            m = tuple(int(e) for e in m)
            acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        items = tuple(sorted((m, c) for m, c in acc.items() if c != 0))
        dims = {len(m) for m, _ in items}
        if len(dims) > 1:
            raise ValueError("exponents of different lengths")
        return LaurentPolynomial(items)

    @property
    def dim(self) -> int:
        return len(self.terms[0][0]) if self.terms else 0

    def is_zero(self) -> bool:
        return not self.terms

    @staticmethod
    def parse(text: str, dim: int | None = None) -> "LaurentPolynomial":
        """Parse e.g. 'x - 2', 'x*y^2 - 3/2', '(x-2)^2*(x+1)' over variables x, y, z."""
        import sympy

        syms = sympy.symbols("x y z")
        try:
            expr = sympy.sympify(text, locals={"x": syms[0], "y": syms[1], "z": syms[2]})
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse polynomial {text!r}") from exc
        used = sorted(expr.free_symbols, key=lambda s: str(s))
        if any(s not in syms for s in used):
            raise ValueError(f"unknown variables in {text!r}; use x, y, z")
        n = dim if dim is not None else (max((syms.index(s) for s in used), default=0) + 1)
        gens = syms[:n]
        num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
        den_poly = sympy.Poly(den, *gens)
        if len(den_poly.terms()) != 1:
            raise ValueError("only monomial denominators are allowed")
        (dm, dc), = den_poly.terms()
        out = {}
        for m, c in sympy.Poly(num, *gens).terms():
            cc = sympy.Rational(c) / sympy.Rational(dc)
            out[tuple(a - b for a, b in zip(m, dm))] = Fraction(int(cc.p), int(cc.q))
        return LaurentPolynomial.make(out)

    def __str__(self):
        names = "xyz"
        parts = []
        for m, c in self.terms:
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(m) if e != 0
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class MahlerValue:
    """m(f) = exact + numeric, with |numeric - true numeric part| <= error."""

    exact: object
    numeric: float
    error: float
    exact_total: bool

    @property
    def value(self) -> float:
        return to_float(self.exact) + self.numeric


def _abs_log(c: Fraction, p: Place):
    """log|c|_v as LogLinear (|p|_p = 1/p)."""
    if p.kind == ARCHIMEDEAN:
        return log_of(c)
    return -padic_valuation(c, p.prime) * log_of(p.prime)


def _relevant_places(D: ToricAdelicDivisor, coeffs, bg) -> list[Place]:
    names = {p.name: p for p in D.place_list}
    primes = set()
    for c in coeffs:
        for n in (abs(c.numerator), c.denominator):
            if n > 1:
                primes.update(q for q, _ in factorize(n))
    for q in sorted(primes):
        if str(q) not in names:
            names[str(q)] = Place.finite(q)
    if "inf" not in names and not any(p.kind == ARCHIMEDEAN for p in names.values()):
        names["inf"] = Place.infinity()
    return list(names.values())


def _nonarch_term(f: LaurentPolynomial, u, p: Place):
    return max(-dot(u, m) + _abs_log(c, p) for m, c in f.terms)


def _binomial_closed(f: LaurentPolynomial, bg, places) -> object:
    """m(a x^m1 + b x^m2) = sum_v log max(1, e^{<u_v, m>} |gamma|_v), m = m1 - m2, gamma = -b/a.

    The a x^m1 factor contributes nothing (product formula plus balance).
    """
    (m1, a), (m2, b) = f.terms
    m = tuple(x - y for x, y in zip(m1, m2))
    gamma = -b / a
    zero = (Fraction(0),) * len(m)
    total = Fraction(0)
    for p in places:
        u = bg.gradients.get(p.name, zero)
        t = dot(u, m) + _abs_log(gamma, p)
        if t > 0:
            total = total + p.weight * t
    return total


def _quadrature(coeffs: list[complex], exps: list[tuple], points: int):
    """Trapezoidal mean of log|sum c_m z^m| over the unit torus, with an error estimate."""
    d = len(exps[0])
    per = max(2, int(round(points ** (1.0 / d))))

    def run(n):
        grids = np.meshgrid(*[np.arange(n) * (2 * np.pi / n)] * d, indexing="ij")
        total = np.zeros(grids[0].shape, dtype=complex)
        for c, m in zip(coeffs, exps):
            phase = sum(e * g for e, g in zip(m, grids))
            total += c * np.exp(1j * phase)
        return total

    vals = np.abs(run(per))
    scale = sum(abs(c) for c in coeffs)
    tiny = vals.min() < 1e-8 * scale
    with np.errstate(divide="ignore"):
        q_full = float(np.mean(np.log(vals)))
        half = per // 2
        q_half = float(np.mean(np.log(np.abs(run(half))))) if half >= 2 else q_full
    err = abs(q_full - q_half) + 1e-12 * (1 + abs(q_full))
    if tiny or not math.isfinite(q_full):
        err = float("inf") if not math.isfinite(q_full) else max(err, 1.0)
    return q_full, err


def _split_binomial_factors(f: LaurentPolynomial):
    """Factor f into monomial/binomial factors when possible: list of (factor, k) or None."""
    import sympy

    if len(f.terms) <= 2:
        return [(f, 1)]
    d = f.dim
    gens = sympy.symbols(f"t0:{d}")
    shift = [min(m[i] for m, _ in f.terms) for i in range(d)]
    expr = sum(
        sympy.Rational(c.numerator, c.denominator)
        * sympy.Mul(*[g ** (e - s) for g, e, s in zip(gens, m, shift)])
        for m, c in f.terms
    )
    const, factors = sympy.factor_list(expr, *gens)
    out = [(LaurentPolynomial.make({tuple(shift): Fraction(int(const.p), int(const.q))}), 1)]
    for fac, k in factors:
        poly = sympy.Poly(fac, *gens)
        terms = {tuple(int(e) for e in m): Fraction(int(c.p), int(c.q)) for m, c in poly.terms()}
        if len(terms) > 2:
            return None
        out.append((LaurentPolynomial.make(terms), int(k)))
    return out


def gauss_mahler(
    D: ToricAdelicDivisor, f: LaurentPolynomial, points: int = 65536, bg=None, closed_forms: bool = True
) -> MahlerValue:
    """closed_forms=False skips the monomial/binomial shortcuts (used to cross-check quadrature)."""
    if D.mode != "q":
        raise PreconditionError("Gauss-Mahler measures need Q-mode")
    if f.is_zero():
        raise DivisorError("the zero polynomial has no Gauss-Mahler measure")
    if f.dim != D.dim:
        raise DivisorError("polynomial and divisor dimensions differ")
    bg = bg or _wide_gradients(D)
    if closed_forms and len(f.terms) == 1:
        return MahlerValue(Fraction(0), 0.0, 0.0, True)
    parts = _split_binomial_factors(f) if closed_forms else None
    if parts is not None:
        total = Fraction(0)
        for g, k in parts:
            if len(g.terms) == 2:
                places = _relevant_places(D, [c for _, c in g.terms], bg)
                total = total + k * _binomial_closed(g, bg, places)
        return MahlerValue(total, 0.0, 0.0, True)
    places = _relevant_places(D, [c for _, c in f.terms], bg)
    zero = (Fraction(0),) * D.dim
    exact = Fraction(0)
    numeric = 0.0
    error = 0.0
    for p in places:
        u = bg.gradients.get(p.name, zero)
        if p.kind == ARCHIMEDEAN:
            coeffs = [float(c) * math.exp(-to_float(dot(u, m))) for m, c in f.terms]
            q, e = _quadrature(coeffs, [m for m, _ in f.terms], points)
            numeric += float(p.weight) * q
            error += float(p.weight) * e
        else:
            exact = exact + p.weight * _nonarch_term(f, u, p)
    return MahlerValue(exact, numeric, error, False)


def derivative_with_rational_twist(D, F, f: LaurentPolynomial, points: int = 65536) -> MahlerValue:
    bg = _wide_gradients(D)
    toric = derivative_essmin(D, F, bg)
    m = gauss_mahler(D, f, points, bg)
    return MahlerValue(toric + m.exact, m.numeric, m.error, m.exact_total)


def log_equidistribution_eligible(D: ToricAdelicDivisor, f: LaurentPolynomial, points: int = 65536):
    """True / False, or None when a quadrature cannot decide m(f) = 0."""
    if D.mode != "q":
        raise PreconditionError("eligibility needs Q-mode")
    bg = _wide_gradients(D)
    if len(f.terms) == 2:
        (m1, a), (m2, b) = f.terms
        m = tuple(x - y for x, y in zip(m1, m2))
        gamma = -b / a
        zero = (Fraction(0),) * D.dim
        for p in _relevant_places(D, [gamma], bg):
            u = bg.gradients.get(p.name, zero)
            # the zero set meets the torus orbit at u iff |gamma|_v = |x^m|_v = e^{-<u,m>}
            if _abs_log(gamma, p) != -dot(u, m):
                return False
        return True
    mv = gauss_mahler(D, f, points, bg)
    if mv.exact_total:
        return mv.exact == 0
    if mv.value > mv.error:
        return False
    return None
