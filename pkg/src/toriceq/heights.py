"""Exact toric heights of n-th roots of rationals on the projective line over Q.

All conjugates of r^(1/n) share every absolute value, so the orbit average
of a toric Green function collapses to a single evaluation per place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .loglinear import LogLinear, factorize, format_scalar, log_of, padic_valuation, to_float
from .toric import ARCHIMEDEAN, PreconditionError, ToricAdelicDivisor

__all__ = [
    "RootPoint",
    "valuations",
    "height",
    "weil_height",
    "small_sequence",
    "SmallSequence",
    "ExperimentRow",
    "convergence_experiment",
    "demo_csv_rows",
]


@dataclass(frozen=True)
class RootPoint:
    r: Fraction
    n: int

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        if self.r == 0:
            raise ValueError("the radicand must be nonzero")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("the root order must be a positive integer")

    def primes(self) -> tuple[int, ...]:
        out = set()
        for m in (self.r.numerator, self.r.denominator):
            m = abs(m)
            if m > 1:
                out.update(p for p, _ in factorize(m))
        return tuple(sorted(out))


def valuations(x: RootPoint, primes=()) -> dict[str, object]:
    """val_v = -log|r|_v / n at infinity and at the primes of r (plus any requested)."""
    out = {"inf": -log_of(x.r) / x.n}
    for p in sorted(set(x.primes()) | set(primes)):
        out[str(p)] = padic_valuation(x.r, p) * log_of(p) / x.n
    return out


def _require_p1(D: ToricAdelicDivisor):
    if D.dim != 1:
        raise PreconditionError("heights of root points are implemented on the projective line only")
    if D.mode != "q":
        raise PreconditionError("heights of root points need Q-mode")


def height(D: ToricAdelicDivisor, x: RootPoint):
    """h_D(x) = -sum_v psi_v(val_v(x)), exact."""
    _require_p1(D)
    primes = [p.prime for p in D.place_list if p.prime is not None]
    total = Fraction(0)
    for name, val in valuations(x, primes).items():
        psi = D.metric(name)
        total = total - psi((val,))
    return total


def weil_height(r, n: int = 1):
    """Independent oracle: sum_v max(0, log|r|_v) / n."""
    x = RootPoint(r, n)
    total = Fraction(0)
    arch = log_of(x.r)
    if arch > 0:
        total = total + arch
    for p in x.primes():
        loc = -padic_valuation(x.r, p) * log_of(p)
        if loc > 0:
            total = total + loc
    return total / n


def _log_multiple(u, p: int) -> Fraction:
    """q with u = q log p, or an error if u is not of that shape."""
    if isinstance(u, LogLinear):
        if u.c0 == 0 and u.primes() == (p,):
            return u.coeff(p)
    elif u == 0:
        return Fraction(0)
    raise PreconditionError(
        f"the profile {format_scalar(u)} at place {p} is not a rational multiple of log {p}"
    )


@dataclass(frozen=True)
class SmallSequence:
    points: tuple
    mu_ess: object
    heights: tuple
    constant: object  # C with h(x_k) - mu_ess <= C / k


def small_sequence(D: ToricAdelicDivisor, length: int) -> SmallSequence:
    """Generic sequence x_k = r_k^(1/k) whose valuation profiles tend to the balanced gradients."""
    from .equidist import _wide_gradients

    _require_p1(D)
    if length < 1:
        raise ValueError("the sequence length must be positive")
    bg = _wide_gradients(D)
    exps = {}
    for p in D.place_list:
        u = bg.gradients[p.name][0]
        if p.kind == ARCHIMEDEAN:
            continue
        exps[p.prime] = _log_multiple(u, p.prime)
    arch = [p for p in D.place_list if p.kind == ARCHIMEDEAN]
    if arch:
        u_inf = bg.gradients[arch[0].name][0]
        if u_inf != -sum((q * log_of(p) for p, q in exps.items()), Fraction(0)):
            raise PreconditionError("the archimedean profile is not realized by root points")
    mu = _mu_ess(D)
    points, hs = [], []
    best = None
    for k in range(1, length + 1):
        r = Fraction(1)
        for p, q in sorted(exps.items()):
            r *= Fraction(p) ** math.floor(q * (k + 1))
        if r == 1:
            r = Fraction(2)
        x = RootPoint(r, k)
        h = height(D, x)
        points.append(x)
        hs.append(h)
        c = k * (h - mu)
        best = c if best is None or c > best else best
    return SmallSequence(tuple(points), mu, tuple(hs), best)


def _mu_ess(D):
    from .concave import maximize

    return maximize(D.global_roof).mu


@dataclass(frozen=True)
class ExperimentRow:
    k: int
    point: RootPoint
    h_D: object
    h_E: object
    gap: object


@dataclass(frozen=True)
class Experiment:
    rows: tuple
    derivative: object
    mu_ess: object
    constant: object

    @property
    def final_gap(self):
        return self.rows[-1].gap


def convergence_experiment(D: ToricAdelicDivisor, E: ToricAdelicDivisor, length: int) -> Experiment:
    from .equidist import derivative_essmin

    _require_p1(E)
    seq = small_sequence(D, length)
    deriv = derivative_essmin(D, E)
    rows = []
    for k, (x, h) in enumerate(zip(seq.points, seq.heights), start=1):
        he = height(E, x)
        rows.append(ExperimentRow(k, x, h, he, he - deriv))
    return Experiment(tuple(rows), deriv, seq.mu_ess, seq.constant)


CSV_HEADER = ("k", "n", "r", "h_D", "h_D_float", "h_E", "h_E_float", "gap")


def demo_csv_rows(exp: Experiment) -> list[tuple[str, ...]]:
    out = [CSV_HEADER]
    for row in exp.rows:
        out.append(
            (
                str(row.k),
                str(row.point.n),
                format_scalar(row.point.r),
                format_scalar(row.h_D),
                f"{to_float(row.h_D):.12g}",
                format_scalar(row.h_E),
                f"{to_float(row.h_E):.12g}",
                format_scalar(row.gap),
            )
        )
    return out
