import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodtail import dist as D
from prodtail import indicators as I
from prodtail.errors import DomainError

LN2 = math.log(2.0)


def test_shift_ratio_on_gaussian_type_tail():
    V = D.gaussian_type(1.0)
    assert math.isclose(I.shift_ratio(V, 1.0, 10.0), 19.0, rel_tol=1e-12)


def test_shift_ratio_domain():
    E = D.make_exponential(1.0)
    with pytest.raises(DomainError):
        I.shift_ratio(E, 2.0, 1.0)
    with pytest.raises(DomainError):
        I.shift_ratio(E, -1.0, 5.0)
    assert I.shift_ratio(E, 0.0, 5.0) == 0.0
    assert I.shift_ratio(D.make_point_mass(1.0), 1.0, 3.0) == math.inf


@pytest.mark.parametrize("key", ["exp", "pareto", "lattice", "osc", "sin", "gauss"])
@given(x=st.floats(20.0, 1e4), s=st.floats(0.01, 5.0), t=st.floats(0.01, 5.0))
def test_cocycle(zoo, key, x, s, t):
    V = zoo[key]
    whole = I.shift_ratio(V, s + t, x)
    split = I.shift_ratio(V, s, x - t) + I.shift_ratio(V, t, x)
    scale = max(1.0, abs(float(V.tail_log(x))))
    assert abs(whole - split) <= 1e-12 * scale


@pytest.mark.parametrize("key", ["exp", "pareto", "lattice", "osc", "gauss"])
@given(x=st.floats(20.0, 1e4), s=st.floats(0.0, 5.0), t=st.floats(0.0, 5.0))
def test_ratio_is_monotone_in_the_shift(zoo, key, x, s, t):
    V = zoo[key]
    a, b = sorted((s, t))
    assert I.shift_ratio(V, a, x) <= I.shift_ratio(V, b, x) + 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_oscillating_ratio_at_critical_points_approaches_two(zoo, n):
    F0 = zoo["osc"]
    r = math.exp(I.shift_ratio(F0, 1.0, 2 * F0.a_n[n]))
    assert 1.0 < r <= 2.0 + 1e-9
    if n >= 3:
        assert abs(r - 2.0) < 0.01


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_exponential_series_is_exact(zoo, t):
    s = I.c_star_series(zoo["exp"], t)
    # exact up to rounding of x - t
    assert math.isclose(s.c_star, math.exp(t), rel_tol=1e-10)
    assert math.isclose(s.c_substar, math.exp(t), rel_tol=1e-10)


def test_series_window_extremes_are_ordered(zoo):
    s = I.c_star_series(zoo["lattice"], 0.5)
    assert np.all(s.running_inf <= s.log_ratio + 1e-15)
    assert np.all(s.log_ratio <= s.running_sup + 1e-15)
    assert np.all(s.running_inf <= s.running_sup)
    assert s.K >= 10 and not s.flags
    assert s.c_substar <= s.c_star


def test_series_is_augmented_with_critical_points(zoo):
    F0 = zoo["osc"]
    s = I.c_star_series(F0, 1.0)
    hits = [p for p in 2 * F0.a_n if 10 <= p <= 1e6]
    assert all(np.any(s.x == p) for p in hits)
    plain = I.c_star_series(F0, 1.0, augment=False)
    assert plain.x.size < s.x.size


def test_series_arguments(zoo):
    with pytest.raises(DomainError):
        I.c_star_series(zoo["exp"], 20.0)
    with pytest.raises(DomainError):
        I.c_star_series(zoo["exp"], 1.0, grid=[30.0, 20.0])
    s = I.c_star_series(zoo["exp"], 1.0, grid=np.geomspace(10, 100, 12))
    assert any("sparse" in f for f in s.flags)


def test_series_csv_and_dict(zoo):
    s = I.c_star_series(zoo["exp"], 1.0, grid=np.geomspace(10, 100, 40))
    lines = s.to_csv().strip().splitlines()
    assert lines[0] == "x,ratio"
    assert len(lines) == 41
    x, r = map(float, lines[5].split(","))
    assert math.isclose(r, math.e, rel_tol=1e-12)
    d = s.to_dict()
    assert d["t"] == 1.0 and len(d["points"]) == 40


def test_gaussian_series_diverges(zoo):
    rep = I.classify(zoo["gauss"])
    assert rep.verdict("OL") == I.AGAINST
    assert rep.zero_shift.c_star_0 == math.inf


def test_zero_shift_for_exponential(zoo):
    series = {t: I.c_star_series(zoo["exp"], t) for t in (0.5, 0.25, 0.125, 0.0625)}
    c0, c0_sub = I.c_zero_extrapolate(series)
    assert math.isclose(c0, 1.0, abs_tol=1e-9) and math.isclose(c0_sub, 1.0, abs_tol=1e-9)
    with pytest.raises(DomainError):
        I.c_zero_extrapolate(dict(list(series.items())[:3]))


def test_zero_shift_for_lattice_plateau(zoo):
    series = {t: I.c_star_series(zoo["lattice"], t) for t in (0.5, 0.25, 0.125, 0.0625)}
    est = I.c_zero_extrapolate(series)
    assert abs(est.c_star_0 - 2.0) <= 0.1
    assert abs(est.c_substar_0 - 1.0) <= 0.02
    assert est.monotone


def test_zero_shift_for_oscillating_heavy(zoo):
    series = {t: I.c_star_series(zoo["osc"], t) for t in (0.5, 0.25, 0.125, 0.0625)}
    assert abs(I.c_zero_extrapolate(series).c_star_0 - 1.0) <= 0.02


def test_decay_exponents(zoo):
    de = I.decay_exponent(D.make_exponential(2.0), 1.0)
    assert de.lo_hat == pytest.approx(2.0, rel=1e-12) and de.hi_hat == pytest.approx(2.0, rel=1e-12)
    assert de.condition_1_2 == I.FOR
    de = I.decay_exponent(zoo["exp_sqrt"], 1.0)
    # the sqrt(x)/x correction is still 0.018 at the bottom of the window
    assert LN2 < de.lo_hat <= de.hi_hat < LN2 + 0.02
    # the base contributes about theta log(x) / sqrt(x), so look far out
    de = I.decay_exponent(zoo["osc_sqrt"], 0.5, grid=np.geomspace(1e6, 1e12, 200))
    assert 0.5 <= de.lo_hat <= de.hi_hat < 0.502
    assert de.condition_1_2 == I.FOR
    de = I.decay_exponent(zoo["pareto"], 1.0)
    assert de.condition_1_2 == I.AGAINST and de.condition_1_3 == I.AGAINST
    with pytest.raises(DomainError):
        I.decay_exponent(zoo["exp"], 0.0)


@pytest.mark.parametrize("key,delta,expected", [("pareto", 3.0, "to-infinity"), ("pareto", 2.0, "bounded"),
                                                ("exp", 1.0, "to-zero"), ("exp", 10.0, "to-zero")])
def test_poly_limit(zoo, key, delta, expected):
    assert I.poly_limit_check(zoo[key], delta) == expected


def test_classify_exponential():
    g = 0.7
    rep = I.classify(D.make_exponential(g))
    assert rep.verdict("L(gamma)") == I.FOR
    assert abs(rep.gamma_hat - g) <= 1e-6
    assert rep.verdict("L") == I.AGAINST
    assert rep.verdict("D") == I.AGAINST
    assert rep.heavy_light == "light"
    assert rep.caveat


def test_classify_power_law(zoo):
    rep = I.classify(zoo["pareto"])
    assert rep.verdict("D") == I.FOR and rep.verdict("L") == I.FOR and rep.verdict("OL") == I.FOR
    assert rep.heavy_light == "heavy"


def test_classify_lattice_plateau(zoo):
    rep = I.classify(zoo["lattice"])
    assert rep.verdict("OL") == I.FOR
    assert rep.verdict("L") == I.AGAINST
    assert rep.lattice is not None and rep.lattice["span"] == 2.0
    # shift 2 leaves a 1/sqrt(x) residue from the base tail
    assert abs(rep.lattice["gamma_hat"] - LN2) < 5e-3


def test_classify_tilted_oscillating(zoo):
    # with a = 25 the ramp a_3..2a_3 lies above 1e6, so the grid must reach it
    rep = I.classify(zoo["osc_tilt"], I.ClassifyConfig(grid_hi=1e7))
    assert rep.verdict("OL") == I.FOR
    assert rep.verdict("L(gamma)") == I.AGAINST
    assert rep.verdict("L") == I.AGAINST
    d = rep.to_dict()
    assert set(d["verdicts"]) == {"L", "L(gamma)", "OL", "D"}


def test_condition_a(zoo):
    assert I.condition_A_check(zoo["exp"], zoo["exp"]).verdict == "vacuous-pass"
    one = D.make_point_mass(1.0)
    rep = I.condition_A_check(one, zoo["exp"])
    assert rep.verdict == I.AGAINST
    ratio = np.exp([p[1] for p in rep.series[0]["points"]])
    np.testing.assert_allclose(ratio, 1 - math.exp(-1), rtol=1e-3)
    assert I.condition_A_check(one, zoo["pareto"]).verdict == I.FOR


def test_tang_conditions(zoo):
    E, P2, P1 = zoo["exp"], zoo["pareto"], D.make_power_law(1.0)
    assert I.tang_c_conditions(E, E, 2.0)["C1"]["verdict"] == I.FOR
    assert I.tang_c_conditions(E, P2, 2.0)["C1"]["verdict"] == I.AGAINST
    out = I.tang_c_conditions(P1, P2, 1.0)
    assert "C1" not in out and out["C2"]["verdict"] == I.FOR
    with pytest.raises(DomainError):
        I.tang_c_conditions(E, E, 0.0)


def test_trend_directions():
    x = np.geomspace(10, 1e4, 100)
    assert I.trend(x, -np.log(x))[0] == "decreasing"
    assert I.trend(x, np.log(x))[0] == "increasing"
    assert I.trend(x, np.zeros_like(x))[0] == "flat"
    assert I.trend(x, np.full_like(x, -np.inf))[0] == "decreasing"


def test_lattice_span(zoo):
    assert I.lattice_span(zoo["lattice"]) == 2.0
    assert I.lattice_span(zoo["exp"]) is None
