import itertools
import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toriceq.dynamical import (
    DynamicalData,
    EmptyIndexSet,
    approximation_sequence,
    derivative_formula,
    expand_labels,
    index_set,
    multinomial,
    semiabelian,
)

F = Fraction


def brute_index_set(q, deg, d):
    out = []
    for a in itertools.product(range(d + 1), repeat=len(q)):
        if sum(a) == d and math.prod(F(x) ** k for x, k in zip(q, a)) == deg:
            out.append(a)
    return sorted(out)


def test_index_set_examples():
    assert index_set(DynamicalData((2, 4), 8, 2)) == [(1, 1)]
    assert index_set(DynamicalData((F(5, 2),), F(5, 2) ** 3, 3)) == [(3,)]
    assert index_set(DynamicalData((2, 2), 8, 3)) == [(0, 3), (1, 2), (2, 1), (3, 0)]


def test_empty_index_set_warns():
    with pytest.warns(EmptyIndexSet):
        assert index_set(DynamicalData((2, 3), 7, 2)) == []


def test_data_validation():
    for bad in [((1, 2), 4, 1), ((3, 2), 4, 1), ((2,), 0, 1), ((2,), 4, -1), ((), 1, 1)]:
        with pytest.raises(ValueError):
            DynamicalData(*bad)


def test_derivative_formula_examples():
    data = semiabelian(1, 1, 2)
    data = DynamicalData(data.q, data.deg, data.d, {"arith": {(1, 1): "E.M.N"}, "geom": {(1, 1): "M.N"}}, data.labels)
    form = derivative_formula(data)
    assert form.terms == (((1, 1), 2, "E.M.N"),) and form.normalization == (((1, 1), 2, "M.N"),)
    assert form.value is None
    assert form.render() == "(2*E.D^(1,1)) / (2*D^(1,1))"
    one = DynamicalData((3,), 27, 3, {"arith": {(3,): F(5)}, "geom": {(3,): F(2)}, "degree": 2})
    f1 = derivative_formula(one)
    assert f1.value == F(5, 2) and f1.degree == 2 and f1.degree_consistent
    tab = {"arith": {"0,3": 0, "1,2": 0, "2,1": F(7), "3,0": 0}, "geom": {"0,3": 1, "1,2": 1, "2,1": 1, "3,0": 1}}
    f2 = derivative_formula(DynamicalData((2, 2), 8, 3, tab))
    assert f2.degree == 8 and f2.value == F(3 * 7, 8)


def test_missing_table_entry():
    with pytest.raises(KeyError):
        derivative_formula(DynamicalData((2, 4), 8, 2, {"arith": {}, "geom": {}}))


def test_approximation_examples():
    steps = approximation_sequence(semiabelian(1, 1, 2), 3)
    s3 = steps[3]
    assert s3.coefficients == (F(1, 8), 1) and s3.inradius_lower == F(1, 8) and s3.abs_min_scale == F(1, 64)
    assert steps[0].coefficients == (1, 1) and steps[0].abs_min_scale == 1
    for n, st_ in enumerate(approximation_sequence(semiabelian(2, 1, 3), 5)):
        assert st_.coefficients == (F(1, 3**n), 1)  # Q_n = ell^-n M + N


def test_semiabelian_examples():
    d = semiabelian(1, 1, 2)
    assert (d.q, d.d, d.deg) == ((2, 4), 2, 8)
    t = semiabelian(3, 0, 5)
    assert (t.s, t.q, t.deg) == (1, (5,), 125)
    assert index_set(semiabelian(2, 3, 3)) == [(2, 3)]
    with pytest.raises(ValueError):
        semiabelian(0, 0, 2)
    with pytest.raises(ValueError):
        semiabelian(1, 1, 1)


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_semiabelian_index_set_is_r_g(ell):
    for r in range(5):
        for g in range(5):
            if r + g == 0:
                continue
            data = semiabelian(r, g, ell)
            I = index_set(data)
            assert [expand_labels(data, a) for a in I] == [(r, g)]


@given(
    st.lists(st.fractions(min_value=F(4, 3), max_value=6, max_denominator=3), min_size=1, max_size=3),
    st.integers(0, 4),
    st.data(),
)
def test_index_set_matches_brute_force(q, d, data):
    q = sorted(q)
    a = data.draw(st.tuples(*[st.integers(0, d)] * len(q)))
    deg = math.prod(F(x) ** k for x, k in zip(q, a))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyIndexSet)
        got = index_set(DynamicalData(tuple(q), deg, d))
    assert got == brute_index_set(q, deg, d)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=4))
def test_multinomial(a):
    assert multinomial(a) == math.factorial(sum(a)) // math.prod(math.factorial(x) for x in a)


@given(
    st.lists(st.fractions(min_value=F(3, 2), max_value=5, max_denominator=2), min_size=1, max_size=3),
    st.fractions(min_value=-5, max_value=0, max_denominator=4),
    st.integers(1, 8),
)
def test_ratio_bound_decreasing(q, mu_abs, n_max):
    q = sorted(q)
    data = DynamicalData(tuple(q), 2, 1)
    steps = approximation_sequence(data, n_max, mu_abs)
    bounds = [s.ratio_bound for s in steps]
    for s in steps:
        assert all(0 < c <= 1 for c in s.coefficients) and s.coefficients[-1] == 1
        assert s.ratio_bound <= -mu_abs / q[0] ** s.n
        assert s.ratio_bound == -mu_abs / q[0] ** s.n  # mu_ess = 0 for canonical data
    assert all(a >= b for a, b in zip(bounds, bounds[1:]))
    if mu_abs < 0:
        assert all(a > b for a, b in zip(bounds, bounds[1:]))


@given(st.integers(1, 3), st.integers(0, 3), st.integers(2, 5), st.data())
def test_degree_from_geometric_entries(r, g, ell, data):
    base = semiabelian(r, g, ell)
    I = index_set(base)
    geom = {a: data.draw(st.fractions(0, 10, max_denominator=3)) for a in I}
    total = sum(multinomial(a) * geom[a] for a in I)
    D = DynamicalData(base.q, base.deg, base.d, {"geom": geom, "degree": total}, base.labels)
    f = derivative_formula(D)
    assert f.degree == total and f.degree_consistent
