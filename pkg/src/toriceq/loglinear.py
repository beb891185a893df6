"""Exact numbers of the form c0 + sum_p c_p * log(p) with rational coefficients.

Values of this shape arise as local heights over Q: valuations of rationals,
metric functions evaluated at valuation vectors, and closed-form Mahler
measures.  Logarithms of distinct primes together with 1 are linearly
independent over Q, so equality is decided symbolically and only the sign of
a nonzero value needs numerics.  Signs are settled with interval arithmetic
at increasing precision, which always terminates for a nonzero value.

Arithmetic results collapse to ``Fraction`` whenever the log part cancels, so
purely rational computations never see this type.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

import mpmath

__all__ = [
    "LogLinear",
    "log_of",
    "is_scalar",
    "sign",
    "to_float",
    "padic_valuation",
    "factorize",
    "parse_scalar",
    "format_scalar",
]


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of a positive integer as sorted (p, e) pairs."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
        if p > 10**6:
            import sympy

            for q, e in sorted(sympy.factorint(n).items()):
                out.append((int(q), int(e)))
            return tuple(out)
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def padic_valuation(r: Fraction, p: int) -> int:
    r = Fraction(r)
    if r == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = abs(r.numerator), r.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


class LogLinear:
    """c0 + sum c_p log p.  Construct through ``log_of`` or ``LogLinear.make``."""

    __slots__ = ("c0", "logs", "_hash")

    def __init__(self, c0, logs):
        self.c0 = Fraction(c0)
        self.logs = tuple(sorted((int(p), Fraction(c)) for p, c in logs if c != 0))
        self._hash = None

    @staticmethod
    def make(c0=0, logs=None):
        """Build a value, collapsing to Fraction when there is no log part."""
        items = dict()
        for p, c in (logs.items() if isinstance(logs, dict) else (logs or ())):
            items[int(p)] = items.get(int(p), Fraction(0)) + Fraction(c)
        items = {p: c for p, c in items.items() if c != 0}
        if not items:
            return Fraction(c0)
        return LogLinear(c0, items.items())

    # coefficient access

    def coeff(self, p: int) -> Fraction:
        for q, c in self.logs:
            if q == p:
                return c
        return Fraction(0)

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.logs)

    # arithmetic

    def __add__(self, other):
        if isinstance(other, LogLinear):
            d = dict(self.logs)
            for p, c in other.logs:
                d[p] = d.get(p, Fraction(0)) + c
            return LogLinear.make(self.c0 + other.c0, d)
        if isinstance(other, (int, Fraction)):
            return LogLinear(self.c0 + other, self.logs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LogLinear(-self.c0, [(p, -c) for p, c in self.logs])

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (LogLinear, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Fraction(0)
            return LogLinear(self.c0 * other, [(p, c * other) for p, c in self.logs])
        if isinstance(other, LogLinear):
            raise TypeError("product of two transcendental LogLinear values is not LogLinear")
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("LogLinear division by zero")
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    # comparison

    def __eq__(self, other):
        if isinstance(other, LogLinear):
            return self.c0 == other.c0 and self.logs == other.logs
        if isinstance(other, (int, Fraction)):
            return False  # a LogLinear always has a nonzero log part
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.c0, self.logs))
        return self._hash

    def _cmp(self, other) -> int:
        diff = self - other
        return sign(diff)

    def __lt__(self, other):
        if not isinstance(other, (LogLinear, int, Fraction)):
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, (LogLinear, int, Fraction)):
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, (LogLinear, int, Fraction)):
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, (LogLinear, int, Fraction)):
            return NotImplemented
        return self._cmp(other) >= 0

    def __float__(self):
        return to_float(self)

    def __abs__(self):
        return -self if sign(self) < 0 else self

    def __repr__(self):
        return f"LogLinear({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


def is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, LogLinear))


def log_of(r) -> Fraction | LogLinear:
    """log|r| for a nonzero rational r, expanded over primes."""
    r = abs(Fraction(r))
    if r == 0:
        raise ValueError("log of zero")
    logs = {}
    for p, e in factorize(r.numerator) if r.numerator > 1 else ():
        logs[p] = Fraction(e)
    for p, e in factorize(r.denominator) if r.denominator > 1 else ():
        logs[p] = logs.get(p, Fraction(0)) - e
    return LogLinear.make(0, logs)


def _interval(x: LogLinear, dps: int):
    with mpmath.workdps(dps):
        iv = mpmath.iv
        iv.dps = dps
        acc = iv.mpf([x.c0.numerator, x.c0.numerator]) / x.c0.denominator
        for p, c in x.logs:
            acc += iv.log(iv.mpf(p)) * (iv.mpf(c.numerator) / c.denominator)
        return acc


def sign(x) -> int:
    """Exact sign of a rational or LogLinear value."""
    if isinstance(x, LogLinear):
        # fast float path with a generous error allowance
        try:
            approx = float(x.c0) + sum(float(c) * math.log(p) for p, c in x.logs)
            scale = abs(float(x.c0)) + sum(abs(float(c)) * math.log(p) for p, c in x.logs)
            if abs(approx) > 1e-9 * (scale + 1.0):
                return 1 if approx > 0 else -1
        except OverflowError:
            pass
        dps = 40
        while True:
            iv = _interval(x, dps)
            if iv.a > 0:
                return 1
            if iv.b < 0:
                return -1
            dps *= 2
            if dps > 100000:  # pragma: no cover - cannot happen for nonzero input
                raise ArithmeticError("sign undecided")
    x = Fraction(x)
    return (x > 0) - (x < 0)


def to_float(x) -> float:
    if isinstance(x, LogLinear):
        with mpmath.workdps(30):
            v = mpmath.mpf(x.c0.numerator) / x.c0.denominator
            for p, c in x.logs:
                v += mpmath.log(p) * mpmath.mpf(c.numerator) / c.denominator
            return float(v)
    return float(x)


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_scalar(x) -> str:
    """Canonical text: '3/2', 'log(2)', '-1/3*log(2) + 1/2'."""
    if not isinstance(x, LogLinear):
        return _fmt_rat(Fraction(x))
    parts = []
    for p, c in x.logs:
        if c == 1:
            parts.append(f"log({p})")
        elif c == -1:
            parts.append(f"-log({p})")
        else:
            parts.append(f"{_fmt_rat(c)}*log({p})")
    if x.c0 != 0:
        parts.append(_fmt_rat(x.c0))
    out = parts[0]
    for s in parts[1:]:
        out += " - " + s[1:] if s.startswith("-") else " + " + s
    return out


_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?(log\(\s*(\d+(?:/\d+)?)\s*\))?\s*"
)


def parse_scalar(text) -> Fraction | LogLinear:
    """Inverse of ``format_scalar``; also accepts plain ints and 'p/q' strings."""
    if isinstance(text, (int, Fraction, LogLinear)):
        return text if not isinstance(text, int) else Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected an exact number string, got {text!r}")
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    total = Fraction(0)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse number {text!r}")
        sgn, coeff, logpart, arg = m.groups()
        if sgn is None and not first:
            raise ValueError(f"cannot parse number {text!r}")
        if coeff is None and logpart is None:
            raise ValueError(f"cannot parse number {text!r}")
        try:
            c = Fraction(coeff) if coeff is not None else Fraction(1)
            arg_val = Fraction(arg) if arg is not None else None
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {text!r}") from None
        if sgn == "-":
            c = -c
        if logpart is not None:
            if arg_val <= 0:
                raise ValueError(f"log of non-positive number in {text!r}")
            total = total + c * log_of(arg_val)
        else:
            total = total + c
        pos = m.end()
        first = False
    return total
