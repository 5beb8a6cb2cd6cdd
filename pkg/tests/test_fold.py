import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import optimize

from asympde.fold import FoldQuery, fold_root, outer_leading, phase_coefficient, real_roots


def test_single_root_negative_tau():
    r = fold_root(FoldQuery(0.0, -1.0, 1))
    assert r.root == 0.0
    assert r.all_real_roots == [0.0]
    assert not r.is_maxwell


def test_cube_root():
    r = fold_root(FoldQuery(-2.0, 0.0, 1))
    assert r.root == pytest.approx(2 ** (1 / 3), rel=1e-15)
    assert abs(r.root**3 - 2.0) < 1e-14


def test_maxwell_set():
    r = fold_root(FoldQuery(0.0, 1.0, 1))
    np.testing.assert_allclose(r.all_real_roots, [-1.0, 0.0, 1.0], atol=1e-15)
    assert r.is_maxwell
    assert r.root == pytest.approx(-1.0)
    a = phase_coefficient(1)
    p = lambda s: -a * s**4 + s**2
    assert p(0.5) == pytest.approx(p(-0.5))


def test_degenerate_origin():
    r = fold_root(FoldQuery(0.0, 0.0, 1))
    assert r.root == 0.0 and not r.is_maxwell


def test_outer_leading_values():
    assert outer_leading(FoldQuery(0.0, -1.0, 1), 1.0) == 0.0
    assert outer_leading(FoldQuery(-2.0, 0.0, 1), 2.0) == pytest.approx(0.6299605249474366, rel=1e-14)
    assert outer_leading(FoldQuery(-2.0, 0.0, 2), 1.0) == pytest.approx(2 ** 0.2, rel=1e-14)
    with pytest.raises(ValueError):
        outer_leading(FoldQuery(1.0, 1.0, 1), 0.0)


def test_phase_coefficient_matches_root_equation():
    # p'(s) with U = 2s is exactly -(U^(2n+1) - tau U + xi)
    for n in range(1, 6):
        a = phase_coefficient(n)
        assert a * (2 * n + 2) / 2 ** (2 * n + 1) == pytest.approx(1.0, rel=1e-15)


finite = st.floats(-50, 50, allow_nan=False)


@given(finite, finite, st.integers(1, 4))
@settings(max_examples=300)
def test_root_residual_and_ordering(xi, tau, n):
    r = fold_root(FoldQuery(xi, tau, n))
    m = 2 * n + 1
    for u in r.all_real_roots:
        assert abs(u**m - tau * u + xi) <= 1e-12 * (1 + abs(u)) ** m
    assert r.root in r.all_real_roots
    assert r.all_real_roots == sorted(r.all_real_roots)
    assert len(r.all_real_roots) in (1, 2, 3)
    if tau < 0:
        assert len(r.all_real_roots) == 1


@given(finite, finite, st.integers(1, 3))
def test_generic_cardinality_is_odd(xi, tau, n):
    roots = real_roots(2 * n + 1, tau, xi)
    # two roots only at an exact tangency, which random floats never hit
    m = 2 * n + 1
    crit = (tau / m) ** (1 / (m - 1)) if tau > 0 else None
    if crit is not None:
        assume(min(abs(crit**m - tau * crit + xi), abs(-crit**m + tau * crit + xi)) > 1e-9)
    assert len(roots) % 2 == 1


@given(st.floats(1e-6, 50), finite, st.integers(1, 3))
def test_odd_symmetry(xi, tau, n):
    a = fold_root(FoldQuery(xi, tau, n)).root
    b = fold_root(FoldQuery(-xi, tau, n)).root
    assert a == pytest.approx(-b, rel=1e-12, abs=1e-13)


def _brute_argmax(xi, tau, n):
    """Dense sampling of the phase plus bounded local refinement."""
    a = phase_coefficient(n)
    p = lambda s: -a * s ** (2 * n + 2) + tau * s * s - xi * s
    R = 1.0 + abs(tau) ** 0.5 + abs(xi) ** (1 / 3)
    s = np.linspace(-R, R, 40001)
    k = int(np.argmax(p(s)))
    h = s[1] - s[0]
    res = optimize.minimize_scalar(lambda z: -p(z), bounds=(s[k] - h, s[k] + h), method="bounded",
                                   options={"xatol": 1e-14})
    # polish with Newton on p'(s) = 0
    z = res.x
    for _ in range(5):
        d1 = -a * (2 * n + 2) * z ** (2 * n + 1) + 2 * tau * z - xi
        d2 = -a * (2 * n + 2) * (2 * n + 1) * z ** (2 * n) + 2 * tau
        z -= d1 / d2
    return z


def test_branch_matches_brute_force_argmax_grid():
    xis = np.linspace(-3, 3, 30) + 0.013
    taus = np.linspace(-6, 8, 30)
    for xi in xis:
        for tau in taus:
            r = fold_root(FoldQuery(float(xi), float(tau), 1)).root
            assert abs(2 * _brute_argmax(xi, tau, 1) - r) <= 1e-10 * max(1.0, abs(r))


def test_branch_matches_argmax_for_n2():
    for xi, tau in [(0.3, 2.0), (-1.1, 4.0), (2.0, -1.0), (0.05, 6.0)]:
        r = fold_root(FoldQuery(xi, tau, 2)).root
        assert abs(2 * _brute_argmax(xi, tau, 2) - r) <= 1e-10 * max(1.0, abs(r))


def test_invalid_query():
    with pytest.raises(ValueError):
        FoldQuery(0.0, 0.0, 0)
    with pytest.raises(ValueError):
        FoldQuery(math.nan, 0.0, 1)
