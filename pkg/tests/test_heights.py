import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from toriceq.concave import PAConcave
from toriceq.corpus import random_pa
from toriceq.exactgeom import hull
from toriceq.heights import (
    RootPoint,
    convergence_experiment,
    demo_csv_rows,
    height,
    small_sequence,
    valuations,
    weil_height,
)
from toriceq.loglinear import log_of
from toriceq.schema import load_divisor
from toriceq.toric import Place, PreconditionError, Roof, ToricAdelicDivisor, minima, twist

F = Fraction
I01 = hull([(0,), (1,)])
SCEN = Path(__file__).resolve().parents[1] / "scenarios"
LOG2 = log_of(2)


def canonical():
    return ToricAdelicDivisor(I01, [], "q")


def shifted():
    return load_divisor(SCEN / "log2_scenario.json")


def test_height_examples():
    D = canonical()
    for n in range(1, 6):
        assert height(D, RootPoint(2, n)) == LOG2 / n
    assert height(D, RootPoint(1, 3)) == 0
    c = F(2, 5)
    assert height(twist(D, -c), RootPoint(2, 3)) == LOG2 / 3 + c
    with pytest.raises(ValueError):
        RootPoint(0, 2)
    with pytest.raises(ValueError):
        RootPoint(2, 0)


def test_height_preconditions():
    Q = hull([(0, 0), (1, 0), (0, 1)])
    with pytest.raises(PreconditionError):
        height(ToricAdelicDivisor(Q, [], "q"), RootPoint(2, 1))
    with pytest.raises(PreconditionError):
        height(ToricAdelicDivisor(I01, []), RootPoint(2, 1))


def test_weil_examples():
    assert weil_height(2, 1) == LOG2
    assert weil_height(1, 7) == 0
    assert weil_height(F(4, 9), 3) == 2 * log_of(3) / 3


def test_small_sequence_examples():
    seq = small_sequence(shifted(), 6)
    assert [(p.r, p.n) for p in seq.points] == [(F(1, 2 ** (k + 1)), k) for k in range(1, 7)]
    assert list(seq.heights) == [LOG2 / k for k in range(1, 7)] and seq.mu_ess == 0
    seq = small_sequence(canonical(), 5)
    assert [(p.r, p.n) for p in seq.points] == [(2, k) for k in range(1, 6)]
    assert list(seq.heights) == [LOG2 / k for k in range(1, 6)]
    c = F(1, 3)
    seq = small_sequence(twist(canonical(), -c), 4)
    assert seq.mu_ess == c and list(seq.heights) == [LOG2 / k + c for k in range(1, 5)]


def test_small_sequence_rejects_unrealizable():
    # roofs x/2 at 3 and -x/2 at infinity force u_3 = 1/2, not a rational multiple of log 3
    D = ToricAdelicDivisor(
        I01,
        [(Place.infinity(), Roof(PAConcave.affine(I01, (F(-1, 2),), 0))), (Place.finite(3), Roof(PAConcave.affine(I01, (F(1, 2),), 0)))],
        "q",
    )
    with pytest.raises(PreconditionError):
        small_sequence(D, 3)


def test_convergence_examples():
    exp = convergence_experiment(shifted(), canonical(), 10)
    for row in exp.rows:
        assert row.h_E == F(row.k + 1, row.k) * LOG2
        assert row.gap == LOG2 / row.k
    assert exp.derivative == LOG2
    exp = convergence_experiment(shifted(), shifted(), 5)
    assert exp.derivative == 0 and all(r.h_E == r.h_D for r in exp.rows)
    zero = ToricAdelicDivisor(hull([(0,)]), [], "q")
    exp = convergence_experiment(shifted(), zero, 4)
    assert all(r.h_E == 0 for r in exp.rows) and exp.derivative == 0


def test_csv_rows():
    rows = demo_csv_rows(convergence_experiment(canonical(), canonical(), 3))
    assert rows[0] == ("k", "n", "r", "h_D", "h_D_float", "h_E", "h_E_float", "gap")
    assert rows[2][:4] == ("2", "2", "2", "1/2*log(2)")


def test_random_weil_comparison():
    rng = random.Random(7)
    D = canonical()
    for _ in range(100):
        r = F(rng.choice([-1, 1]) * rng.randint(1, 2000), rng.randint(1, 2000))
        n = rng.randint(1, 9)
        assert height(D, RootPoint(r, n)) == weil_height(r, n)


@given(
    st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6).filter(lambda x: x != 0),
    st.integers(1, 12),
)
def test_product_formula(r, n):
    assert sum(valuations(RootPoint(r, n)).values(), F(0)) == 0


def _random_p1(rng):
    places = [(Place.infinity(), Roof(random_pa(rng, 1, I01)))]
    for p in rng.sample([2, 3, 5], rng.randint(0, 2)):
        places.append((Place.finite(p), Roof(random_pa(rng, 1, I01))))
    return ToricAdelicDivisor(I01, places, "q")


@given(seeds, st.fractions(min_value=-50, max_value=50, max_denominator=60).filter(lambda x: x != 0), st.integers(1, 6))
def test_root_points_sit_above_the_essential_minimum(seed, r, n):
    D = _random_p1(random.Random(seed))
    h = height(D, RootPoint(r, n))
    m = minima(D)
    assert h >= m.ess >= m.abs


def test_rate_certificate():
    for D in (shifted(), canonical(), twist(canonical(), F(-1, 4))):
        seq = small_sequence(D, 30)
        hs = list(seq.heights)
        assert all(a >= b for a, b in zip(hs, hs[1:]))
        for k, h in enumerate(hs, start=1):
            assert h - seq.mu_ess <= seq.constant / k
        assert seq.constant == LOG2
