import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import k1

from prodtail import dist as D
from prodtail.conv import ProductTail, product_tail, product_tail_grid, sum_conv2_tail, truncation_band
from prodtail.errors import DomainError, UsageError


def _k1_ref(x):
    s = 2 * math.sqrt(x)
    return math.log(s * k1(s))


@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 10.0, 100.0])
def test_exp_exp_matches_bessel(x):
    E = D.make_exponential(1.0)
    b = product_tail(E, E, x, tol=1e-6)
    assert b.lo - 1e-12 <= _k1_ref(x) <= b.hi + 1e-12
    assert b.width < 1e-4
    assert abs(b.mid - _k1_ref(x)) < 1e-9


@given(c=st.floats(0.1, 50.0), x=st.floats(0.01, 500.0))
@settings(max_examples=30)
def test_point_mass_factor_shifts_the_argument(zoo, c, x):
    E = zoo["exp"]
    b = product_tail(E, D.make_point_mass(c), x, tol=1e-8)
    assert b.lo - 1e-12 <= -x / c <= b.hi + 1e-12


@pytest.mark.parametrize("pair", [("exp", "pareto"), ("lattice", "exp_half"), ("osc", "exp"), ("sin", "gauss")])
def test_product_is_symmetric(zoo, pair):
    F, G = zoo[pair[0]], zoo[pair[1]]
    for x in (3.0, 70.0, 2e3):
        assert product_tail(F, G, x, 1e-6).overlaps(product_tail(G, F, x, 1e-6))


def test_brackets_nest_around_a_common_value(zoo):
    F, G = zoo["lattice"], zoo["exp"]
    brackets = [product_tail(F, G, 40.0, tol) for tol in (1e-2, 1e-3, 1e-4, 1e-5)]
    for b, tol in zip(brackets, (1e-2, 1e-3, 1e-4, 1e-5)):
        assert b.converged and b.width <= tol
    assert all(a.overlaps(b) for a in brackets for b in brackets)


@given(rate=st.floats(0.2, 5.0), x=st.floats(0.1, 200.0))
@settings(max_examples=25)
def test_scaling_a_factor_rescales_x(zoo, rate, x):
    # rate * Y with Y ~ Exp(1) is Exp(1/rate)
    E = zoo["exp"]
    a = product_tail(E, D.make_point_mass(rate), x, 1e-7)
    b = product_tail(E, D.make_exponential(1.0 / rate), x, 1e-7)
    c = product_tail(D.make_exponential(1.0 / rate), D.make_point_mass(1.0), x, 1e-7)
    assert a.overlaps(c)
    assert b.lo <= 0.0


def test_power_law_times_bounded_factor_is_exact():
    P = D.make_power_law(2.0)
    b = product_tail(P, D.make_point_mass(3.0), 300.0, 1e-9)
    assert b.lo - 1e-12 <= -2 * math.log(100.0) <= b.hi + 1e-12


def test_budget_exhaustion_is_reported(zoo):
    b = product_tail(zoo["lattice"], zoo["lattice"], 500.0, tol=1e-9, budget=500)
    assert not b.converged
    assert b.lo <= b.hi


def test_zero_tail_and_argument_checks(zoo):
    U = D.make_point_mass(1.0)
    b = product_tail(U, U, 2.0)
    assert b.hi == -math.inf and b.converged
    with pytest.raises(DomainError):
        product_tail(zoo["exp"], zoo["exp"], 0.0)
    with pytest.raises(DomainError):
        product_tail(zoo["exp"], zoo["exp"], 1.0, tol=2.0)


def test_unvalidated_input_is_refused():
    from prodtail.forms import ExpPolynomial

    raw = D.PiecewiseDistribution([D.Segment(0.0, np.inf, ExpPolynomial(((1.0, 1.0),)))])
    with pytest.raises(UsageError):
        product_tail(raw, D.make_exponential(1.0), 1.0)
    with pytest.raises(UsageError):
        sum_conv2_tail(raw, 1.0)


def test_grid_keeps_order_and_isolates_failures(zoo):
    E = zoo["exp"]
    out = product_tail_grid(E, E, [1.0, 2.0, 4.0], tol=1e-6, workers=2)
    assert [x for x, _ in out] == [1.0, 2.0, 4.0]
    for x, b in out:
        assert b.lo <= _k1_ref(x) <= b.hi
    with pytest.raises(DomainError):
        product_tail_grid(E, E, [2.0, 1.0])


def test_truncation_band_bounds_outside_mass(zoo):
    F, G = zoo["pareto"], zoo["exp"]
    band = truncation_band(F, G, 1e3, 1e-3)
    assert band.converged
    assert band.achieved_fraction <= 1e-3
    assert band.b1 < band.y_hi
    assert band.contains(math.sqrt(band.b1 * band.y_hi))


@pytest.mark.parametrize("x", [0.5, 3.0, 30.0, 300.0])
def test_sum_of_two_exponentials(x):
    b = sum_conv2_tail(D.make_exponential(1.0), x, tol=1e-8)
    assert b.lo <= math.log1p(x) - x <= b.hi


def test_sum_of_point_masses_and_lattice(zoo):
    pm = D.make_point_mass(2.0)
    assert sum_conv2_tail(pm, 3.9).contains(1.0)
    assert sum_conv2_tail(pm, 4.0).hi == -math.inf
    b = sum_conv2_tail(zoo["lattice"], 20.0, tol=1e-6)
    assert b.converged and b.width <= 1e-6


def test_product_tail_object_caches_and_bounds(zoo):
    H = ProductTail(zoo["exp"], zoo["exp"], tol=1e-6)
    v = H.tail_log(np.array([1.0, 10.0]))
    lo, hi = H.tail_log_bounds([1.0, 10.0])
    assert np.all(lo <= v) and np.all(v <= hi)
    assert H.bracket(1.0) is H.bracket(1.0)
    assert H.tail_log(0.0) == 0.0
