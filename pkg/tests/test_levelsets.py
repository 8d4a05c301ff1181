import math

import numpy as np
import pytest

from bowlforge import BarrierCurve, asymptotic_exponents, dw_dr, level_value, w_of_r


def bisect_oracle(m, beta, r, lo=0.0, hi=None):
    """Plain bisection on the defining relation, independent of w_of_r."""
    f = lambda w: w / (r * (1.0 + w * w) ** beta) - m
    if hi is None:
        hi = 1.0
        while f(hi) < 0.0:
            hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_linear_when_beta_zero():
    curve = BarrierCurve(m=2.0, beta=0.0)
    assert w_of_r(curve, 3.0) == pytest.approx(6.0, rel=1e-14)
    assert dw_dr(curve, 17.3) == pytest.approx(2.0, rel=1e-14)


def test_closed_form_beta_minus_half():
    # w^2 (1+w^2) = (m r)^2 gives w^2 = (-1 + sqrt(5))/2 at m = r = 1
    curve = BarrierCurve(m=1.0, beta=-0.5)
    expected = math.sqrt((-1.0 + math.sqrt(5.0)) / 2.0)
    assert w_of_r(curve, 1.0) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.7861513777574233)


def test_against_bisection_oracle():
    curve = BarrierCurve(m=1.0, beta=0.25)
    w = w_of_r(curve, 10.0)
    assert w == pytest.approx(bisect_oracle(1.0, 0.25, 10.0), rel=1e-12)
    for m, beta, r in [(0.5, 0.4, 3.0), (2.0, -1.5, 0.7), (7.0, 0.45, 10.0)]:
        assert w_of_r(BarrierCurve(m=m, beta=beta), r) == pytest.approx(
            bisect_oracle(m, beta, r), rel=1e-11)


def test_dw_dr_closed_form():
    # m (1+w^2)^(1+beta) / (1 + (1-2 beta) w^2) at beta=-1/2, m=1, w=1
    curve = BarrierCurve(m=1.0, beta=-0.5)
    assert dw_dr(curve, 1.0) == pytest.approx(math.sqrt(2.0) / 3.0, rel=1e-14)
    assert math.sqrt(2.0) / 3.0 == pytest.approx(0.4714045207910317)


@pytest.mark.parametrize("m,beta", [(1.0, 0.25), (2.0, -0.5), (0.3, 0.45),
                                    (1.0, -1.5)])
def test_dw_dr_matches_finite_differences(m, beta):
    curve = BarrierCurve(m=m, beta=beta)
    for r in np.geomspace(0.01, 100.0, 20):
        w = w_of_r(curve, float(r))
        h = 1e-6 * r
        fd = (w_of_r(curve, r + h) - w_of_r(curve, r - h)) / (2.0 * h)
        assert dw_dr(curve, w) == pytest.approx(fd, rel=1e-6)


def test_monotone_in_r_and_m():
    rs = np.geomspace(1e-3, 1e3, 100)
    for beta in (-0.5, 0.0, 0.25):
        curve = BarrierCurve(m=1.3, beta=beta)
        ws = np.array([w_of_r(curve, float(r)) for r in rs])
        assert np.all(np.diff(ws) > 0.0)
    ms = np.linspace(0.1, 5.0, 100)
    for beta in (-0.5, 0.25):
        ws = [w_of_r(BarrierCurve(m=float(m), beta=beta), 2.0) for m in ms]
        assert all(b > a for a, b in zip(ws, ws[1:]))


def test_level_value_monotone_in_w():
    # the level m is increasing in w at fixed r (beta < 1/2)
    ws = np.geomspace(1e-3, 1e6, 200)
    for beta in (-0.5, 0.0, 0.45):
        ms = [level_value(3.0, float(w), beta) for w in ws]
        assert all(b > a for a, b in zip(ms, ms[1:]))


def test_inversion_residual():
    rng = np.random.default_rng(17)
    for _ in range(200):
        m = rng.uniform(0.05, 20.0)
        beta = rng.uniform(-2.0, 0.499)
        r = 10.0 ** rng.uniform(-3, 5)
        w = w_of_r(BarrierCurve(m=m, beta=beta), r)
        assert abs(level_value(r, w, beta) - m) < 1e-12 * m


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 5.0])
def test_large_r_growth_exponent(alpha):
    beta = 0.5 - 0.5 / alpha
    curve = BarrierCurve(m=1.7, beta=beta)
    rs = np.geomspace(1e4, 1e6, 30)
    ws = np.log([w_of_r(curve, float(r)) for r in rs])
    slope = np.polyfit(np.log(rs), ws, 1)[0]
    assert slope == pytest.approx(alpha, abs=1e-3)
    growth, deriv_growth = asymptotic_exponents(curve, alpha)
    assert (growth, deriv_growth) == (alpha, alpha - 1.0)


def test_asymptotic_exponents_consistency_check():
    curve = BarrierCurve(m=1.0, beta=0.25)
    with pytest.raises(ValueError):
        asymptotic_exponents(curve, 1.0)  # beta 0.25 implies alpha 2
    with pytest.raises(ValueError):
        asymptotic_exponents(curve, -2.0)


def test_rejects_beta_at_least_half():
    with pytest.raises(ValueError):
        BarrierCurve(m=1.0, beta=0.5)
    with pytest.raises(ValueError):
        BarrierCurve(m=1.0, beta=0.8)
    with pytest.raises(ValueError):
        BarrierCurve(m=0.0, beta=0.0)
