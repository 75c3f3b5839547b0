import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from prodtail.logmath import NEG_INF, log1m_exp, log_sub, log_sum

finite = st.floats(-700, 700)


@given(finite, st.floats(1e-6, 50))
def test_log_sub_inverts_addition(a, gap):
    b = a - gap
    assert math.isclose(math.exp(log_sub(a, b) - a), -math.expm1(b - a), rel_tol=1e-12)


def test_log_sub_edge_cases():
    assert log_sub(1.0, 1.0) == NEG_INF
    assert log_sub(NEG_INF, NEG_INF) == NEG_INF
    assert log_sub(0.0, NEG_INF) == 0.0
    assert log_sub(0.0, 0.5) == NEG_INF


@given(st.floats(-50, -1e-9))
def test_log1m_exp(a):
    assert math.isclose(log1m_exp(a), math.log(-math.expm1(a)), rel_tol=1e-12, abs_tol=1e-300)


@given(st.lists(finite, min_size=1, max_size=20))
def test_log_sum_matches_direct(xs):
    ref = max(xs) + math.log(sum(math.exp(x - max(xs)) for x in xs))
    assert math.isclose(log_sum([xs]), ref, rel_tol=1e-12, abs_tol=1e-12)


def test_log_sum_empty_and_neg_inf():
    assert log_sum([]) == NEG_INF
    assert log_sum([np.array([NEG_INF, NEG_INF])]) == NEG_INF
