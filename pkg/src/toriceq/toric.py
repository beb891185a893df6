"""Toric adelic divisors: places, metric and roof functions, minima, volumes.

A divisor carries a geometric support (a virtual support function on a
complete fan, or directly a polytope for nef divisors) and a finite list of
places with non-canonical data.  All other places are canonical.  Internally
every place is normalized to its roof function on the polytope.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .concave import (
    AffineForm,
    PAConcave,
    ConcaveError,
    integral,
    legendre_dual,
    maximize,
    mixed_integral,
    sup_level,
    weighted_sum,
)
from .exactgeom import (
    Cone,
    Polytope,
    dot,
    hull,
    mixed_volume,
    polytope_from_halfspaces,
)
from .loglinear import LogLinear

__all__ = [
    "DivisorError",
    "PreconditionError",
    "Place",
    "VirtualSupport",
    "Canonical",
    "Metric",
    "Roof",
    "ToricAdelicDivisor",
    "DivisorReport",
    "polytope_of",
    "roof_functions",
    "minima",
    "volumes",
    "positivity",
    "difference_pseudo_effective",
    "intersection_number",
    "geometric_intersection",
    "zhang_check",
    "tilde_upper_bound",
    "twist",
    "example2",
    "analyze",
]


class DivisorError(ValueError):
    """Semantically invalid divisor data."""


class PreconditionError(ValueError):
    """Valid data, but an operation's precondition fails (e.g. not semipositive)."""


ARCHIMEDEAN = "archimedean"
NONARCHIMEDEAN = "nonarchimedean"
ABSTRACT = "abstract"


@dataclass(frozen=True)
class Place:
    name: str
    kind: str = ABSTRACT
    weight: Fraction = Fraction(1)
    prime: int | None = None

    def __post_init__(self):
        if self.kind not in (ARCHIMEDEAN, NONARCHIMEDEAN, ABSTRACT):
            raise DivisorError(f"place {self.name}: unknown kind {self.kind!r}")
        if Fraction(self.weight) <= 0:
            raise DivisorError(f"place {self.name}: weight must be positive")
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.kind == NONARCHIMEDEAN and (self.prime is None or self.prime < 2):
            raise DivisorError(f"place {self.name}: a non-archimedean place needs a prime")

    @staticmethod
    def infinity() -> "Place":
        return Place("inf", ARCHIMEDEAN)

    @staticmethod
    def finite(p: int) -> "Place":
        return Place(str(p), NONARCHIMEDEAN, Fraction(1), p)


@dataclass(frozen=True)
class VirtualSupport:
    """Piecewise-linear Psi with Psi(u) = <m_sigma, u> on each cone sigma."""

    cones: tuple[Cone, ...]
    forms: tuple[tuple, ...]

    def __post_init__(self):
        if len(self.cones) != len(self.forms) or not self.cones:
            raise DivisorError("a virtual support function needs one linear form per cone")
        d = len(self.forms[0])
        if any(len(m) != d for m in self.forms) or any(
            len(g) != d for c in self.cones for g in c.generators
        ):
            raise DivisorError("cone generators and forms must share the dimension")
        # forms must agree on shared rays
        for (c1, m1), (c2, m2) in itertools.combinations(zip(self.cones, self.forms), 2):
            for g in set(c1.generators) & set(c2.generators):
                if dot(m1, g) != dot(m2, g):
                    raise DivisorError("linear forms disagree on a shared ray")
        for j in range(d):
            for s in (1, -1):
                e = tuple(Fraction(s if i == j else 0) for i in range(d))
                if not any(c.contains(e) for c in self.cones):
                    raise DivisorError("the fan is not complete")

    @property
    def dim(self) -> int:
        return len(self.forms[0])

    def __call__(self, u):
        for c, m in zip(self.cones, self.forms):
            if c.contains(u):
                return dot(m, u)
        raise DivisorError("direction not covered by the fan")  # pragma: no cover

    @cached_property
    def is_concave(self) -> bool:
        for c in self.cones:
            for g in c.generators:
                val = self(g)
                if any(dot(m, g) < val for m in self.forms):
                    return False
        return True


@dataclass(frozen=True)
class Canonical:
    pass


@dataclass(frozen=True)
class Metric:
    psi: PAConcave


@dataclass(frozen=True)
class Roof:
    theta: PAConcave


def polytope_of(support) -> Polytope | None:
    """Delta_D = {x : <u,x> >= Psi(u)}; None when empty."""
    if isinstance(support, Polytope):
        return support
    hs = []
    for c, m in zip(support.cones, support.forms):
        for g in c.generators:
            hs.append((tuple(-Fraction(x) for x in g), -dot(g, m)))
    return polytope_from_halfspaces(hs, support.dim)


class ToricAdelicDivisor:
    """Toric adelic divisor given by a support and per-place metric/roof data."""

    def __init__(self, support, places: Sequence[tuple[Place, object]], mode: str = "abstract"):
        if mode not in ("q", "abstract"):
            raise DivisorError(f"unknown mode {mode!r}")
        self.support = support
        self.mode = mode
        self.dim = support.ambient if isinstance(support, Polytope) else support.dim
        names = [p.name for p, _ in places]
        if len(set(names)) != len(names):
            raise DivisorError("duplicate place names")
        if mode == "q":
            arch = [p for p, _ in places if p.kind == ARCHIMEDEAN]
            if len(arch) > 1:
                raise DivisorError("Q-mode allows a single archimedean place")
            for p, _ in places:
                if p.kind == ABSTRACT:
                    raise DivisorError(f"place {p.name}: abstract places are not allowed in Q-mode")
                if p.weight != 1:
                    raise DivisorError(f"place {p.name}: Q-mode weights are 1")
            primes = [p.prime for p, _ in places if p.kind == NONARCHIMEDEAN]
            if len(set(primes)) != len(primes):
                raise DivisorError("duplicate prime places")
            if not arch:
                places = [(Place.infinity(), Canonical())] + list(places)
        for p, datum in places:
            if not isinstance(datum, (Canonical, Metric, Roof)):
                raise DivisorError(f"place {p.name}: unknown datum")
        self.places: tuple[tuple[Place, object], ...] = tuple(places)
        self.delta = polytope_of(support)
        if self.delta is None:
            raise DivisorError("the polytope of the divisor is empty")
        self.roofs  # validate eagerly

    # access

    def place(self, name: str) -> Place:
        for p, _ in self.places:
            if p.name == name:
                return p
        raise KeyError(name)

    def datum(self, name: str):
        for p, dt in self.places:
            if p.name == name:
                return dt
        return Canonical()

    @property
    def place_list(self) -> tuple[Place, ...]:
        return tuple(p for p, _ in self.places)

    @cached_property
    def support_is_concave(self) -> bool:
        if isinstance(self.support, Polytope):
            return True
        return self.support.is_concave

    def support_value(self, u):
        """Psi_D(u); u may carry LogLinear coordinates."""
        if isinstance(self.support, Polytope):
            return min(dot(m, u) for m in self.delta.vertices)
        return self.support(u)

    @cached_property
    def canonical_metric(self) -> PAConcave | None:
        """Psi_D as a global min of linear forms (only when it is concave)."""
        if not self.support_is_concave:
            return None
        return PAConcave.everywhere((m, 0) for m in self.delta.vertices)

    @cached_property
    def roofs(self) -> dict[str, PAConcave]:
        out = {}
        for p, dt in self.places:
            out[p.name] = self._roof_of(p, dt)
        return out

    def _roof_of(self, p: Place, dt) -> PAConcave:
        if isinstance(dt, Canonical):
            return PAConcave.constant(self.delta, 0)
        if isinstance(dt, Roof):
            th = dt.theta
            if th.domain != self.delta:
                raise DivisorError(f"place {p.name}: roof domain differs from the polytope")
            return th
        psi = dt.psi
        if psi.domain is not None:
            raise DivisorError(f"place {p.name}: a metric must be defined on all of space")
        if any(isinstance(c, LogLinear) for q in psi.pieces for c in q.gradient):
            raise DivisorError(f"place {p.name}: metric gradients must be rational")
        if self.mode == "abstract" and not psi.rational:
            raise DivisorError(f"place {p.name}: log constants need Q-mode")
        grads = hull(q.gradient for q in psi.pieces)
        if not self.support_is_concave or grads != self.delta:
            raise DivisorError(
                f"place {p.name}: metric recession does not match the support function"
            )
        return legendre_dual(psi)

    def roof(self, name: str) -> PAConcave:
        return self.roofs.get(name) or PAConcave.constant(self.delta, 0)

    def metric(self, name: str):
        """Callable psi_v for a place (canonical places give Psi_D)."""
        dt = self.datum(name)
        if isinstance(dt, Metric):
            return dt.psi
        if isinstance(dt, Roof):
            return legendre_dual(dt.theta)
        return self.support_value

    @cached_property
    def global_roof(self) -> PAConcave:
        live = [(p, self.roofs[p.name]) for p, dt in self.places if not isinstance(dt, Canonical)]
        if not live:
            return PAConcave.constant(self.delta, 0)
        if len(live) == 1:
            p, th = live[0]
            return th.scale(p.weight) if p.weight != 1 else th
        return weighted_sum([th for _, th in live], [p.weight for p, _ in live])

    @cached_property
    def semipositive(self) -> bool:
        return self.support_is_concave

    def with_places(self, places) -> "ToricAdelicDivisor":
        return ToricAdelicDivisor(self.support, places, self.mode)

    def __eq__(self, other):
        if not isinstance(other, ToricAdelicDivisor):
            return NotImplemented
        if self.delta != other.delta or self.mode != other.mode:
            return False
        names = {p.name for p in self.place_list} | {p.name for p in other.place_list}
        return all(self.roof(n) == other.roof(n) for n in names)

    def __hash__(self):
        return hash((self.delta, self.mode))

    def __repr__(self):
        ps = ", ".join(f"{p.name}:{type(dt).__name__}" for p, dt in self.places)
        return f"ToricAdelicDivisor(dim={self.dim}, mode={self.mode}, places=[{ps}])"


# ---------------------------------------------------------------------------
# constructors


def example2(polytope: Polytope, data: Mapping[Place, tuple], mode: str = "abstract") -> ToricAdelicDivisor:
    """Divisor with psi_v(u) = Psi(u - u_v) - c_v, whose roofs are <u_v,x> + c_v."""
    places = []
    for p, (u, c) in data.items():
        u = tuple(x if isinstance(x, (Fraction, LogLinear)) else Fraction(x) for x in u)
        c = c if isinstance(c, (Fraction, LogLinear)) else Fraction(c)
        if all(x == 0 for x in u) and c == 0:
            places.append((p, Canonical()))
            continue
        pieces = [AffineForm(m, -dot(m, u) - c) for m in polytope.vertices]
        places.append((p, Metric(PAConcave(None, pieces))))
    return ToricAdelicDivisor(polytope, places, mode)


def twist(D: ToricAdelicDivisor, t, place: str | None = None) -> ToricAdelicDivisor:
    """D(t): the global roof drops by t, realized at one place."""
    t = Fraction(t)
    if place is None:
        arch = [p for p in D.place_list if p.kind == ARCHIMEDEAN]
        place = (arch or list(D.place_list))[0].name
    p = D.place(place)
    new = []
    for q, dt in D.places:
        if q.name == place:
            dt = Roof(D.roofs[q.name].shift(-t / p.weight))
        new.append((q, dt))
    return D.with_places(new)


# ---------------------------------------------------------------------------
# invariants


def roof_functions(D: ToricAdelicDivisor):
    return dict(D.roofs), D.global_roof


@dataclass(frozen=True)
class Minima:
    ess: object
    abs: object | None


def minima(D: ToricAdelicDivisor, require_abs: bool = False) -> Minima:
    mu = maximize(D.global_roof).mu
    if not D.semipositive:
        if require_abs:
            raise PreconditionError("the absolute minimum needs a semipositive divisor")
        return Minima(mu, None)
    th = D.global_roof
    low = min(th(v) for v in D.delta.vertices)
    return Minima(mu, low)


@dataclass(frozen=True)
class Volumes:
    vol: Fraction
    vol_hat: object
    vol_chihat: object
    gamma: Polytope | None


def _fact(n):
    import math

    return math.factorial(n)


def volumes(D: ToricAdelicDivisor) -> Volumes:
    d = D.dim
    th = D.global_roof
    vol = _fact(d) * D.delta.volume
    chi = _fact(d + 1) * integral(th)
    mu = maximize(th).mu
    if mu < 0:
        return Volumes(vol, Fraction(0), chi, None)
    try:
        gamma = sup_level(th, Fraction(0))
    except ConcaveError as exc:
        raise PreconditionError(f"Gamma_D needs a rational global roof: {exc}") from None
    from .concave import restrict

    vhat = _fact(d + 1) * integral(restrict(th, gamma)) if gamma.is_full_dim else Fraction(0)
    return Volumes(vol, vhat, chi, gamma)


@dataclass(frozen=True)
class Positivity:
    pseudo_effective: bool
    big: bool
    semipositive: bool
    nef: bool


def positivity(D: ToricAdelicDivisor) -> Positivity:
    mins = minima(D)
    pe = mins.ess >= 0
    big = D.delta.is_full_dim and mins.ess > 0
    semi = D.semipositive
    nef = semi and mins.abs >= 0
    return Positivity(pe, big, semi, nef)


def difference_pseudo_effective(D: ToricAdelicDivisor, E: ToricAdelicDivisor) -> bool:
    """Is D - E pseudo-effective?  E must be semipositive."""
    if not E.semipositive:
        raise PreconditionError("the dominance test needs a semipositive subtrahend")
    if D.dim != E.dim:
        raise DivisorError("dimension mismatch")
    if not all(D.delta.contains(v) for v in E.delta.vertices):
        return False
    names = {p.name for p in D.place_list} | {p.name for p in E.place_list}
    for n in sorted(names):
        if not _roof_on(E, n).dominated_by(_roof_on(D, n)):
            return False
    return True


def _roof_on(D: ToricAdelicDivisor, name: str) -> PAConcave:
    if name in D.roofs:
        return D.roofs[name]
    return PAConcave.constant(D.delta, 0)


def _weights(divs: Sequence[ToricAdelicDivisor]) -> dict[str, Fraction]:
    w: dict[str, Fraction] = {}
    for D in divs:
        for p, dt in D.places:
            if p.name in w and w[p.name] != p.weight:
                raise DivisorError(f"place {p.name} carries different weights")
            w[p.name] = p.weight
    return w


def intersection_number(divs: Sequence[ToricAdelicDivisor]):
    """(D_0 ... D_d) = sum_v n_v MI(theta_{0,v}, ..., theta_{d,v})."""
    divs = list(divs)
    if not divs:
        raise DivisorError("no divisors")
    d = divs[0].dim
    if any(D.dim != d for D in divs):
        raise DivisorError("divisors of different dimensions")
    if len(divs) != d + 1:
        raise DivisorError(f"need {d + 1} divisors, got {len(divs)}")
    if not all(D.semipositive for D in divs):
        raise PreconditionError("intersection numbers need semipositive divisors")
    total = Fraction(0)
    for name, w in sorted(_weights(divs).items()):
        if all(isinstance(D.datum(name), Canonical) for D in divs):
            continue
        total = total + w * mixed_integral([_roof_on(D, name) for D in divs])
    return total


def geometric_intersection(divs: Sequence[ToricAdelicDivisor]) -> Fraction:
    """(D_1 ... D_d) = MV(Delta_1, ..., Delta_d)."""
    return mixed_volume([D.delta for D in divs])


@dataclass(frozen=True)
class ZhangReport:
    mu_ess: object
    mean_delta: object
    mean_gamma: object | None
    holds: bool
    equality: bool
    constant_roof: bool


def zhang_check(D: ToricAdelicDivisor) -> ZhangReport:
    if not D.delta.is_full_dim:
        raise PreconditionError("Zhang's inequality check needs a full-dimensional polytope")
    th = D.global_roof
    mu = maximize(th).mu
    mean = integral(th) / D.delta.volume
    mean_g = None
    if mu >= 0 and th.rational:
        gamma = sup_level(th, Fraction(0))
        if gamma.is_full_dim:
            from .concave import restrict

            mean_g = integral(restrict(th, gamma)) / gamma.volume
    holds = mu >= mean and (mean_g is None or mu >= mean_g)
    return ZhangReport(mu, mean, mean_g, holds, mu == mean, th.is_constant())


def tilde_upper_bound(D: ToricAdelicDivisor) -> ToricAdelicDivisor:
    """Example-2 divisor from a balanced family at a maximizer of the global roof."""
    from .equidist import balanced_gradients

    if not D.semipositive:
        raise PreconditionError("the construction needs a semipositive divisor")
    if not D.delta.is_full_dim:
        raise PreconditionError("the construction needs a full-dimensional polytope")
    bg = balanced_gradients(D)
    x0 = bg.base_point
    places = []
    for p, dt in D.places:
        u = bg.gradients[p.name]
        c = D.roofs[p.name](x0) - dot(u, x0)
        if isinstance(dt, Canonical):
            places.append((p, dt))
        else:
            places.append((p, Roof(PAConcave.affine(D.delta, u, c))))
    Dt = ToricAdelicDivisor(D.delta, places, D.mode)
    mu = maximize(D.global_roof).mu
    mt = minima(Dt)
    if not (difference_pseudo_effective(Dt, D) and mt.ess == mu and mt.abs == mu):
        raise AssertionError("tilde construction failed its verification")  # pragma: no cover
    return Dt


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class DivisorReport:
    delta: Polytope
    roofs: dict
    global_roof: PAConcave
    gamma: Polytope | None
    mu_ess: object
    mu_abs: object | None
    vol: Fraction
    vol_hat: object
    vol_chihat: object
    flags: Positivity
    zhang: ZhangReport | None


def analyze(D: ToricAdelicDivisor) -> DivisorReport:
    mins = minima(D)
    vols = volumes(D)
    z = zhang_check(D) if D.delta.is_full_dim else None
    return DivisorReport(
        D.delta,
        dict(D.roofs),
        D.global_roof,
        vols.gamma,
        mins.ess,
        mins.abs,
        vols.vol,
        vols.vol_hat,
        vols.vol_chihat,
        positivity(D),
        z,
    )
