import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from toriceq.corpus import random_pa, random_polytope, random_roof_divisor
from toriceq.exactgeom import hull

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
seeds = st.integers(min_value=0, max_value=10**6)


def points(d):
    return st.tuples(*[rationals] * d)


@st.composite
def polytopes(draw, d=None, full=True):
    d = d or draw(st.integers(1, 3))
    return random_polytope(random.Random(draw(seeds)), d, full=full)


@st.composite
def pa_functions(draw, d=None, kind=None):
    d = d or draw(st.integers(1, 2))
    return random_pa(random.Random(draw(seeds)), d, kind=kind)


@st.composite
def roof_divisors(draw, d=None):
    d = d or draw(st.integers(1, 2))
    return random_roof_divisor(random.Random(draw(seeds)), d)


@pytest.fixture
def square():
    return hull([(0, 0), (1, 0), (0, 1), (1, 1)])


@pytest.fixture
def unit_interval():
    return hull([(0,), (1,)])


def F(x):
    return Fraction(x)
