"""Acceptance suite: one PASS/FAIL line per criterion (shown even under output capture)."""
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from clihelp import GOLDEN, golden_cases, transcript
from test_concave import dual_at, mi_linear
from toriceq.concave import (
    PAConcave,
    decay_probe,
    integral,
    legendre_dual,
    maximize,
    mixed_integral,
    sup_differential,
    sup_level,
)
from toriceq.corpus import random_corpus, random_pa, random_polytope, random_roof_divisor
from toriceq.dynamical import approximation_sequence, expand_labels, index_set, semiabelian
from toriceq.equidist import LaurentPolynomial, derivative_essmin, gauss_mahler, is_wide
from toriceq.exactgeom import inradius, mixed_volume, width_along
from toriceq.heights import convergence_experiment
from toriceq.loglinear import log_of, to_float
from toriceq.schema import load_divisor
from toriceq.toric import Place, ToricAdelicDivisor, example2, minima, tilde_upper_bound, zhang_check, difference_pseudo_effective

F = Fraction
ROOT = Path(__file__).resolve().parents[1]
LOG2 = log_of(2)


@pytest.fixture
def report(capsys):
    def emit(num, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance {num:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
        assert ok, f"criterion {num} failed: {detail}"

    return emit


def _translate(P, t):
    return P.translate(t)


def test_criterion_01_convex_kernel(report):
    rng = random.Random(101)
    t0 = time.perf_counter()
    bad = []
    n = 0
    for i in range(200):
        d = 1 + i % 3
        P, A, B = (random_polytope(rng, d, span=2) for _ in range(3))
        Ps = [random_polytope(rng, d, span=2) for _ in range(d)]
        mv = mixed_volume(Ps)
        perm = Ps[1:] + Ps[:1]
        if mixed_volume(perm) != mv or mixed_volume(Ps[::-1]) != mv:
            bad.append((i, "symmetry"))
        if mixed_volume([P] * d) != math.factorial(d) * P.volume:
            bad.append((i, "normalization"))
        shift = tuple(F(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(d))
        if mixed_volume([_translate(Ps[0], shift)] + Ps[1:]) != mv:
            bad.append((i, "translation"))
        vol = math.factorial(d) * P.volume
        mva = mixed_volume([P] * (d - 1) + [A])
        r = inradius(P, A)
        if not (vol / (d * mva) <= r <= vol / mva):
            bad.append((i, "sandwich"))
        if inradius(P, A) < inradius(P, B) * inradius(B, A):
            bad.append((i, "chain"))
        n += 1
    dt = time.perf_counter() - t0
    report(1, "convex kernel exactness", not bad and dt < 60, f"{n} instances, {dt:.1f}s, failures={bad[:5]}")


def test_criterion_02_duality_normalization(report):
    rng = random.Random(202)
    t0 = time.perf_counter()
    bad = []
    for i in range(200):
        d = 1 + i % 2
        f = random_pa(rng, d)
        if legendre_dual(legendre_dual(f)) != f:
            bad.append((i, "involution"))
        if mixed_integral([f] * (d + 1)) != math.factorial(d + 1) * integral(f):
            bad.append((i, "normalization"))
        fs = [f] + [random_pa(rng, d) for _ in range(d)]
        ref = mixed_integral(fs)
        if mixed_integral(fs[::-1]) != ref or mixed_integral(fs[1:] + fs[:1]) != ref:
            bad.append((i, "symmetry"))
    dt = time.perf_counter() - t0
    report(2, "Legendre involution and MI normalization/symmetry", not bad and dt < 120, f"200 instances, {dt:.1f}s, failures={bad[:5]}")


def test_criterion_03_affine_mixed_integral_oracle(report):
    rng = random.Random(303)
    bad = []
    for i in range(50):
        d = 1 + i % 2
        C = random_polytope(rng, d)
        g = random_pa(rng, d)
        u = tuple(F(rng.randint(-3, 3), rng.choice((1, 2))) for _ in range(d))
        c = F(rng.randint(-4, 4), 3)
        ell = PAConcave.affine(C, u, c)
        lhs = mixed_integral([ell] * d + [g])
        rhs = (
            mi_linear([C] * d + [g.domain], u)
            + c * d * mixed_volume([C] * (d - 1) + [g.domain])
            - math.factorial(d) * C.volume * dual_at(g, u)
        )
        if lhs != rhs:
            bad.append(i)
    report(3, "mixed integral against the affine closed form", not bad, f"50 instances, failures={bad[:5]}")


def probe_directions(s, d):
    dirs = set()
    for v in list(s.points) + list(s.rays) + [w for w, _ in (s.constraints or ())]:
        m = max(abs(x) for x in v)
        if m:
            dirs.add(tuple(F(x) / m for x in v))
    for j in range(d):
        dirs.add(tuple(F(int(i == j)) for i in range(d)))
    return sorted(dirs)


def probe_verdict(f):
    """(not_wide_by_probe, monotone) from levels mu - 2^-k, k = 0..20."""
    mu = maximize(f).mu
    x0 = maximize(f).argmax
    s = sup_differential(f, x0)
    levels = [mu - F(1, 2**k) for k in range(0, 21)]
    monotone, not_wide = True, False
    for u in probe_directions(s, f.ambient):
        if width_along(sup_level(f, levels[-1]), u) == 0:
            return True, monotone  # S_t collapses along u: linear-rate decay at best
        r = decay_probe(f, u, levels)
        monotone &= all(a >= b for a, b in zip(r, r[1:]))
        not_wide |= r[-1] >= F(1, 1000)
    return not_wide, monotone


def test_criterion_04_wideness_equivalence(report):
    corpus = random_corpus(404, 100)
    bad, nonmono, wide_count = [], [], 0
    for i, f in enumerate(corpus):
        D = ToricAdelicDivisor(f.domain, [(Place("v"), _roof(f))]) if f.domain.is_full_dim else None
        exact = bool(is_wide(D)) if D is not None else False
        wide_count += exact
        pnot, mono = probe_verdict(f)
        if exact == pnot:
            bad.append(i)
        if not mono:
            nonmono.append(i)
    report(
        4,
        "vertex test vs decay probe",
        not bad and not nonmono,
        f"100 functions ({wide_count} wide), disagreements={bad[:5]}, non-monotone={nonmono[:5]}",
    )


def _roof(f):
    from toriceq.toric import Roof

    return Roof(f)


def _zhang_corpus():
    rng = random.Random(505)
    out = [random_roof_divisor(rng, 1 + i % 2) for i in range(60)]
    for i in range(10):
        d = 1 + i % 2
        C = random_polytope(rng, d)
        data = {}
        for j in range(rng.randint(1, 3)):
            u = tuple(F(rng.randint(-3, 3), rng.choice((1, 2))) for _ in range(d))
            data[Place(f"v{j}", weight=F(1))] = (u, F(rng.randint(-3, 3), 4))
        us = [u for u, _ in data.values()]
        # balance the last gradient so the global roof is constant
        last = list(data)[-1]
        tot = tuple(sum(u[k] for u in us[:-1]) for k in range(d))
        data[last] = (tuple(-x for x in tot), data[last][1])
        out.append(example2(C, data))
    return out


def test_criterion_05_zhang(report):
    bad = []
    eq = 0
    for i, D in enumerate(_zhang_corpus()):
        z = zhang_check(D)
        th = D.global_roof
        mean = integral(th) / D.delta.volume
        ok = z.mu_ess >= mean and z.mean_delta == mean
        if z.mean_gamma is not None:
            ok &= z.mu_ess >= z.mean_gamma
        ok &= z.equality == th.is_constant() == (z.mu_ess == mean)
        eq += z.equality
        if not ok:
            bad.append(i)
    report(5, "Zhang inequality, equality iff constant roof", not bad, f"70 divisors ({eq} equality cases), failures={bad[:5]}")


def test_criterion_06_tilde(report):
    bad = []
    count = 0
    for i, D in enumerate(_zhang_corpus()):
        if not D.semipositive:
            continue
        count += 1
        T = tilde_upper_bound(D)
        mu = maximize(D.global_roof).mu
        m = minima(T)
        if not (difference_pseudo_effective(T, D) and m.ess == mu and m.abs == mu):
            bad.append(i)
    report(6, "upper-bound divisor construction", not bad, f"{count} semipositive divisors, failures={bad[:5]}")


def test_criterion_07_end_to_end(report):
    t0 = time.perf_counter()
    D = load_divisor(ROOT / "scenarios" / "log2_scenario.json")
    E = load_divisor(ROOT / "scenarios" / "canonical_p1.json")
    exp = convergence_experiment(D, E, 50)
    ok = all(r.h_D == LOG2 / r.k and r.h_E == F(r.k + 1, r.k) * LOG2 for r in exp.rows)
    ok &= derivative_essmin(D, E) == LOG2 and exp.final_gap == LOG2 / 50
    dt = time.perf_counter() - t0
    report(7, "height convergence on the projective line", ok and dt < 5, f"k <= 50, {dt:.2f}s")


def test_criterion_08_gauss_mahler(report):
    from test_equidist import _random_binomial, canonical, shifted

    rng = random.Random(808)
    worst, done, refused = 0.0, 0, 0
    while done < 50:
        d = rng.choice((1, 2))
        D = shifted() if d == 1 and rng.random() < 0.5 else canonical(d)
        f = _random_binomial(rng, d)
        quad = gauss_mahler(D, f, 2**16, closed_forms=False)
        if quad.error > 1e-7:
            refused += 1
            continue
        worst = max(worst, abs(to_float(gauss_mahler(D, f).exact) - quad.value))
        done += 1
    mono = all(
        gauss_mahler(canonical(d), LaurentPolynomial.make({tuple(rng.randint(-4, 4) for _ in range(d)): F(rng.randint(1, 50), rng.randint(1, 50))})).exact == 0
        for d in (1, 2)
        for _ in range(25)
    )
    neg = []
    for i in range(50):
        d = 1 + i % 2
        terms = {tuple(rng.randint(-2, 2) for _ in range(d)): F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rng.randint(1, 4))}
        f = LaurentPolynomial.make(terms)
        if f.is_zero():
            f = LaurentPolynomial.make({(0,) * d: 1})
        v = gauss_mahler(canonical(d), f, 2**16)
        if v.value < -v.error - 1e-12:
            neg.append(i)
    ok = worst <= 1e-6 and mono and not neg
    report(8, "Gauss-Mahler quadrature vs closed form", ok, f"max diff {worst:.2e} on 50 binomials ({refused} near-singular skipped), negatives={neg}")


def test_criterion_09_dynamical(report):
    ok = True
    for ell in (2, 3, 5):
        for r in range(5):
            for g in range(5):
                if r + g == 0:
                    continue
                data = semiabelian(r, g, ell)
                ok &= [expand_labels(data, a) for a in index_set(data)] == [(r, g)]
                mu_abs = F(-1, ell)
                for st in approximation_sequence(data, 20, mu_abs):
                    q1, qs = data.q[0], data.q[-1]
                    ok &= st.coefficients == tuple((q / qs) ** st.n for q in data.q)
                    ok &= st.inradius_lower == qs ** -st.n * q1**st.n
                    ok &= st.abs_min_scale == qs ** -st.n
                    ok &= st.ratio_bound == -mu_abs / q1**st.n
    report(9, "semiabelian index sets and approximation bounds", ok, "r,g <= 4, ell in {2,3,5}, n <= 20")


def test_criterion_10_cli_golden(report):
    bad = []
    cases = list(golden_cases())
    for name, argv in cases:
        want = (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")
        if not (transcript(argv) == want == transcript(argv)):
            bad.append(name)
    report(10, "CLI golden outputs byte-identical", not bad, f"{len(cases)} cases, mismatches={bad}")
