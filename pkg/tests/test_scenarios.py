import math

import pytest

from prodtail import dist as D
from prodtail import scenarios as S
from prodtail.errors import DomainError


def test_sin_modulated_default_passes():
    res = S.run_scenario("sin-modulated")
    assert res.verdict == S.PASS, [c.to_dict() for c in res.checks]
    assert res.runtime > 0
    assert res.observations


def test_sin_modulated_below_threshold_is_inconclusive():
    res = S.sin_modulated(a=2.9, hazard_bound=0.5)
    assert res.verdict == S.INCONCLUSIVE


def test_sin_modulated_large_amplitude_reduces_to_exponential():
    res = S.sin_modulated(a=1e6)
    assert res.verdict == S.PASS


@pytest.mark.parametrize("variant", ["heavy-base", "tilt-1", "tilt-half"])
def test_oscillating_heavy_variants_pass(variant):
    res = S.oscillating_heavy(variant=variant)
    assert res.verdict == S.PASS, [c.to_dict() for c in res.checks]
    assert any("warning" in n for n in res.notes)


def test_oscillating_heavy_rejects_small_a():
    res = S.oscillating_heavy(a=2.0)
    assert res.verdict != S.PASS


def test_oscillating_tilt_with_ln2_reaches_four():
    res = S.oscillating_heavy(variant="tilt-1", gamma=math.log(2.0), t_list=(1.0,))
    assert res.verdict == S.PASS


def test_gaussian_product_series_increases():
    res = S.gaussian_product()
    assert res.check("log ratio strictly increasing").outcome == S.PASS


def test_lattice_plateau_zero_shift_is_trivial():
    res = S.lattice_plateau(t=0.0, n_min=2, n_max=3)
    assert all(r == 1.0 for r in res.observations["ratio"]["ratio"])
    assert res.verdict == S.PASS


def test_double_factorial():
    assert [S.double_factorial_odd(n) for n in range(5)] == [1, 3, 15, 105, 945]


def test_breiman_power_law_and_exponential():
    res = S.breiman(xs=(1e2, 1e3))
    assert res.verdict == S.PASS, [c.to_dict() for c in res.checks]


def test_breiman_point_mass_moment_is_exact():
    res = S.breiman(G=D.make_point_mass(3.0), xs=(1e2, 1e3))
    assert res.verdict == S.PASS


def test_result_serialisation():
    res = S.sin_modulated(t_list=(0.5, 0.25, 0.125, 0.0625), grid_hi=1e4)
    d = res.to_dict()
    assert d["verdict"] == res.verdict and d["scenario_id"] == "sin-modulated"
    csvs = res.observation_csvs()
    assert csvs and all(body.count("\n") >= 2 for body in csvs.values())
    with pytest.raises(KeyError):
        res.check("nope")


def test_verdict_rules():
    r = S.ScenarioResult("x", {}, "claim")
    assert r.verdict == S.INCONCLUSIVE
    r.checks = [S.Check("a", S.PASS), S.Check("b", S.INCONCLUSIVE)]
    assert r.verdict == S.INCONCLUSIVE
    r.checks.append(S.Check("c", S.FAIL))
    assert r.verdict == S.FAIL


def test_unknown_scenario():
    with pytest.raises(DomainError):
        S.run_scenario("nope")
