import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asympde.colehopf import InnerPoint
from asympde.flux import FluxModel
from asympde.oracle import GridSpec, SampledField
from asympde.verify import (
    OMEGA1,
    OMEGA2,
    OMEGA_EPS,
    RegionSpec,
    ResidualReport,
    compare_fields,
    fit_order,
    omega_eps_boundary,
    region_contains,
    residual_ratio,
    residual_sweep,
    residual_terms,
)


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_fit_order_recovers_synthetic_slope(slope, logc):
    eps = [1e-2, 1e-3, 1e-4, 1e-5]
    entries = [(e, np.exp(logc) * e**slope) for e in eps]
    got, r2 = fit_order(entries)
    assert abs(got - slope) <= 1e-12
    if abs(slope) > 1e-3:  # r^2 is rounding-dominated for a flat line
        assert r2 == pytest.approx(1.0, abs=1e-9)


def test_fit_order_noisy_r2_below_one():
    s, r2 = fit_order([(1e-1, 1.0), (1e-2, 0.2), (1e-3, 0.3), (1e-4, 0.01)])
    assert 0 < r2 < 1 and s > 0


def test_fit_order_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_order([(1e-2, 1.0), (1e-3, 0.5)])
    with pytest.raises(ValueError):
        fit_order([(1e-2, 1.0), (1e-3, 0.0), (1e-4, 0.1)])
    with pytest.raises(ValueError):
        fit_order([(1e-2, 1.0), (1e-2, 0.5), (1e-4, 0.1)])


def test_region_examples():
    r1 = RegionSpec(OMEGA1)
    assert region_contains(r1, (1.0, -5.0))
    assert region_contains(r1, (0.0, -1.0))
    assert not region_contains(r1, (0.5, 4.0))  # |xi| < tau^(1/2)
    assert region_contains(r1, (3.0, 4.0))
    r2 = RegionSpec(OMEGA2)
    assert region_contains(r2, (0.5, 4.0))  # 0.5 * 2 < 4^1.5
    assert not region_contains(r2, (1.0, -4.0))
    assert not region_contains(r2, (9.0, 4.0))


@given(st.floats(1.01, 1e3), st.floats(0, 50))
def test_region_predicates_follow_inequalities(tau, xi):
    g1, g2 = 1.0, 1.2
    assert g2 < g1 + 0.5
    in1 = region_contains(RegionSpec(OMEGA1, g1, g2), (xi, tau))
    in2 = region_contains(RegionSpec(OMEGA2, g1, g2), (xi, tau))
    assert in1 == (xi >= tau ** (g1 - 0.5))
    assert in2 == (xi * np.sqrt(tau) < tau**g2)
    # with gamma2 > gamma1 the two regions overlap on a band of xi
    if tau ** (g1 - 0.5) <= xi < tau ** (g2 - 0.5):
        assert in1 and in2


def test_region_spec_validation():
    with pytest.raises(ValueError):
        RegionSpec("Omega3")
    with pytest.raises(ValueError):
        RegionSpec(OMEGA1, gamma1=1.6, gamma2=1.5)
    with pytest.raises(ValueError):
        RegionSpec(OMEGA_EPS, K=0.0)


def test_omega_eps_membership_and_boundary():
    reg = RegionSpec(OMEGA_EPS, n=1)
    eps = 1e-4
    assert reg.x_exponent == Fraction(1, 4)
    assert region_contains(reg, InnerPoint(0.0, 0.0, eps))
    assert region_contains(reg, (0.5 * eps**0.75, 0.4 * eps**0.5, eps))
    assert not region_contains(reg, (0.7 * eps**0.75, 0.4 * eps**0.5, eps))
    x, t = omega_eps_boundary(reg, eps, 32)
    lhs = np.abs(x) * eps**-0.25 + np.abs(t)
    np.testing.assert_allclose(lhs, eps**0.5, rtol=1e-13)


def test_quadratic_flux_residual_is_rounding():
    burgers = FluxModel.burgers()
    for n in (1, 2):
        for eps in (1e-2, 1e-4):
            assert residual_ratio(n, burgers, eps, samples=512, refine=False) <= 1e-9


def test_ratio_stable_between_sample_budgets(cubic):
    a = residual_ratio(1, cubic, 1e-3, samples=1024)
    b = residual_ratio(1, cubic, 1e-3, samples=4096, seed=3)
    assert abs(a - b) <= 0.2 * b


def test_ratio_details_and_positivity(cubic):
    r, d = residual_ratio(1, cubic, 1e-2, samples=256, details=True)
    assert 0 < r < 1
    assert d["numerator_sup"] / d["denominator_sup"] == r


def test_residual_terms_match_cubic_correction(cubic):
    # for phi = u^2/2 + u^3/6 the residual is exactly (u^2/2) u_x
    x = np.linspace(-0.01, 0.01, 5)
    r = residual_terms(x, 0.02, 1e-3, 1, cubic)
    np.testing.assert_allclose(r["residual"], 0.5 * r["u"] ** 2 * r["u_x"], rtol=1e-8, atol=1e-14)


def test_sweep_monotone_and_report(cubic):
    rep = residual_sweep(1, cubic, [1e-2, 1e-3, 1e-4], samples=1024)
    ratios = [r for _, r in rep.entries]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert rep.predicted_order == Fraction(1, 4)
    assert not rep.meta["near_zero_residuals"]
    back = ResidualReport.from_dict(json.loads(rep.to_json()))
    assert back == rep
    d = rep.to_dict()
    assert set(d) >= {"n", "flux_id", "entries", "fitted_order", "predicted_order", "r_squared"}
    assert d["entries"][0] == {"eps": 1e-2, "ratio": ratios[0]}


def test_within_band():
    rep = ResidualReport(1, "cubic", [], 0.33, Fraction(1, 4), 0.99)
    assert rep.within_band()
    assert not ResidualReport(1, "cubic", [], 0.36, Fraction(1, 4), 0.99).within_band()
    assert not ResidualReport(1, "cubic", [], 0.25, Fraction(1, 4), 0.9).within_band()


def _field(shift=0.0, nx=21, nt=4):
    g = GridSpec(0, 1, max(nx, 16), 0, 1, nt)
    X, T = np.meshgrid(g.x, g.t)
    return SampledField(g, np.sin(3 * X) * np.exp(-T) + shift)


def test_compare_fields_norms():
    a = _field()
    assert compare_fields(a, _field()) == 0.0
    assert compare_fields(a, _field(0.25)) == pytest.approx(0.25, rel=1e-15)
    assert compare_fields(a, _field(0.25), "L1") == pytest.approx(0.25, rel=1e-12)
    assert compare_fields(a, _field(0.25), "L2") == pytest.approx(0.25, rel=1e-12)
    assert compare_fields(a, lambda x, t: np.sin(3 * x) * np.exp(-t)) <= 1e-15
    with pytest.raises(ValueError):
        compare_fields(a, a, "Linf")


def test_compare_fields_interpolates_and_checks_extents():
    fine = _field(nx=401, nt=41)
    coarse = _field(nx=21)
    assert compare_fields(coarse, fine) <= 1e-3
    g = GridSpec(0, 2, 21, 0, 1, 4)
    wide = SampledField(g, np.zeros((4, 21)))
    with pytest.raises(ValueError, match="incompatible"):
        compare_fields(wide, coarse)
