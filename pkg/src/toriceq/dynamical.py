"""Exponent combinatorics for sums of canonical divisors of a polarized dynamical system."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

__all__ = [
    "DynamicalData",
    "ApproximationStep",
    "DerivativeFormula",
    "EmptyIndexSet",
    "index_set",
    "derivative_formula",
    "approximation_sequence",
    "semiabelian",
    "multinomial",
    "expand_labels",
]


class EmptyIndexSet(UserWarning):
    pass


@dataclass(frozen=True)
class DynamicalData:
    q: tuple  # degrees, sorted, each > 1
    deg: Fraction
    d: int
    table: Mapping | None = None  # {"arith": {a: value|symbol}, "geom": {...}, "degree": value}
    labels: tuple | None = None

    def __post_init__(self):
        q = tuple(Fraction(x) for x in self.q)
        if not q:
            raise ValueError("at least one canonical divisor is needed")
        if any(x <= 1 for x in q):
            raise ValueError("all degrees must exceed 1")
        if list(q) != sorted(q):
            raise ValueError("degrees must be given in non-decreasing order")
        if Fraction(self.deg) <= 0:
            raise ValueError("the degree of the map must be positive")
        if int(self.d) != self.d or self.d < 0:
            raise ValueError("the dimension must be a non-negative integer")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "deg", Fraction(self.deg))
        object.__setattr__(self, "d", int(self.d))

    @property
    def s(self) -> int:
        return len(self.q)


def multinomial(a) -> int:
    out = math.factorial(sum(a))
    for x in a:
        out //= math.factorial(x)
    return out


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cut + (total + parts - 1,):
            out.append(c - prev - 1)
            prev = c
        yield tuple(out)


def index_set(data: DynamicalData) -> list[tuple[int, ...]]:
    """All a with |a| = d and prod q_i^a_i = deg(phi), lexicographically sorted."""
    out = []
    for a in _compositions(data.d, data.s):
        val = Fraction(1)
        for qi, ai in zip(data.q, a):
            val *= qi**ai
        if val == data.deg:
            out.append(a)
    out.sort()
    if not out:
        warnings.warn("the index set is empty", EmptyIndexSet, stacklevel=2)
    return out


@dataclass(frozen=True)
class DerivativeFormula:
    terms: tuple  # ((a, coefficient, arith entry), ...)
    normalization: tuple  # ((a, coefficient, geom entry), ...)
    value: Fraction | None
    degree: Fraction | None  # (D^d) from the geometric entries, when numeric
    degree_consistent: bool | None

    def render(self) -> str:
        def fmt(parts, name):
            return " + ".join(f"{c}*{name}{_idx(a)}" if not _num(e) else f"{c}*{e}" for a, c, e in parts)

        num = fmt(self.terms, "E.D^")
        den = fmt(self.normalization, "D^")
        return f"({num}) / ({den})"


def _idx(a):
    return "(" + ",".join(map(str, a)) + ")"


def _num(x) -> bool:
    return isinstance(x, (int, Fraction))


def _entry(tab, a):
    if tab is None:
        return None
    for key in (a, list(a), _idx(a), ",".join(map(str, a))):
        try:
            if key in tab:
                return tab[key]
        except TypeError:
            continue
    raise KeyError(f"missing table entry for exponent {_idx(a)}")


def derivative_formula(data: DynamicalData, I=None) -> DerivativeFormula:
    """Coefficients of d/dE mu_ess = sum_a (d choose a) (E . prod D_i^a_i) / (D^d)."""
    if I is None:
        I = index_set(data)
    tab = data.table or {}
    arith = tab.get("arith")
    geom = tab.get("geom")
    terms, norm = [], []
    for a in I:
        c = multinomial(a)
        terms.append((a, c, _entry(arith, a) if arith is not None else None))
        norm.append((a, c, _entry(geom, a) if geom is not None else None))
    degree = None
    if norm and all(_num(e) for _, _, e in norm):
        degree = sum((c * Fraction(e) for _, c, e in norm), Fraction(0))
    consistent = None
    if degree is not None and tab.get("degree") is not None:
        consistent = degree == Fraction(tab["degree"])
    value = None
    if degree and terms and all(_num(e) for _, _, e in terms):
        value = sum((c * Fraction(e) for _, c, e in terms), Fraction(0)) / degree
    return DerivativeFormula(tuple(terms), tuple(norm), value, degree, consistent)


@dataclass(frozen=True)
class ApproximationStep:
    n: int
    coefficients: tuple
    inradius_lower: Fraction
    abs_min_scale: Fraction
    degree_scale: Fraction
    ratio_bound: Fraction | None = None


def approximation_sequence(data: DynamicalData, n_max: int, mu_abs=None) -> list[ApproximationStep]:
    """Q_n = sum (q_i/q_s)^n D_i for n = 0..n_max.

    With mu_abs <= 0 given, each step carries the bound -mu_abs / q_1^n on
    (mu_ess - mu_abs(Q_n)) / r(Q_n; D); mu_ess vanishes for canonical data.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if mu_abs is not None:
        mu_abs = Fraction(mu_abs)
        if mu_abs > 0:
            raise ValueError("the absolute minimum of a canonical divisor is at most 0")
    qs, q1 = data.q[-1], data.q[0]
    out = []
    for n in range(n_max + 1):
        coeffs = tuple((qi / qs) ** n for qi in data.q)
        r_low = (q1 / qs) ** n
        scale = qs ** (-n)
        bound = None
        if mu_abs is not None:
            bound = (-scale * mu_abs) / r_low
        out.append(
            ApproximationStep(n, coeffs, r_low, scale, qs ** (-data.d * n) * data.deg**n, bound)
        )
    return out


def semiabelian(r: int, g: int, ell: int) -> DynamicalData:
    """Multiplication by ell on a semiabelian variety: torus rank r, abelian part of dimension g."""
    if r < 0 or g < 0 or r + g < 1 or ell < 2:
        raise ValueError("need r, g >= 0, r + g >= 1 and ell >= 2")
    deg = Fraction(ell) ** (r + 2 * g)
    if g == 0:
        return DynamicalData((ell,), deg, r, labels=("M",))
    if r == 0:
        return DynamicalData((ell**2,), deg, g, labels=("N",))
    return DynamicalData((ell, ell**2), deg, r + g, labels=("M", "N"))


def expand_labels(data: DynamicalData, a) -> tuple:
    """Exponents over (M, N) for semiabelian data, zero-filling absent factors."""
    if data.labels is None:
        return tuple(a)
    full = dict(zip(data.labels, a))
    return (full.get("M", 0), full.get("N", 0))
