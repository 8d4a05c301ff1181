import math

import numpy as np
import pytest

from bowlforge import (DomainError, IntegrationConfig, NotApplicable,
                       check_convexity, compute_invariants, curvatures,
                       fit_asymptotics, get_speed, integrate, recover_u,
                       residual)
from bowlforge.ode import ProfileSolution, ReachedHorizon


def synthetic_profile(r, v, vp, speed_spec=("mean", 2)):
    """A ProfileSolution with hand-chosen samples (dense output absent)."""
    speed = get_speed(*speed_spec)
    inv = compute_invariants(speed)
    samples = np.column_stack([r, v, vp])
    return ProfileSolution(samples=samples,
                           status=ReachedHorizon(r_end=float(r[-1])),
                           speed=speed, speed_id=speed.name,
                           config=IntegrationConfig(r_start=float(r[0]),
                                                    r_max=float(r[-1]) + 1),
                           invariants=inv)


# ---------------------------------------------------------------------------
# height recovery
# ---------------------------------------------------------------------------

def test_recover_u_constant_slope():
    r = np.linspace(1e-6, 5.0, 400)
    c = 0.7
    prof = synthetic_profile(r, np.full_like(r, c), np.full_like(r, 1e-12))
    u = recover_u(prof).u
    assert np.allclose(u, c * r, atol=3e-6 * c, rtol=0.0)


def test_recover_u_linear_slope():
    r = np.linspace(1e-6, 4.0, 300)
    prof = synthetic_profile(r, r.copy(), np.ones_like(r))
    u = recover_u(prof).u
    # gamma-stub uses the mean-curvature gamma=1/2 on [0, 1e-6]: negligible
    assert np.allclose(u, r ** 2 / 2.0, atol=1e-12, rtol=1e-12)


def test_recover_u_exact_for_unit_alpha_half_gauss():
    # the quarter-power Gauss speed in the plane has the exact profile v = r
    speed = get_speed("gauss:0.5", 2)
    sol = integrate(speed, IntegrationConfig(r_max=10.0))
    bowl = recover_u(sol)
    assert np.allclose(bowl.v, bowl.r, rtol=1e-10, atol=1e-14)
    assert np.allclose(bowl.u, bowl.r ** 2 / 2.0, rtol=1e-10, atol=1e-14)


def test_recover_u_against_high_resolution_reference(profile_cache):
    speed = get_speed("mean", 2)
    sol = profile_cache("mean", 2, IntegrationConfig(r_max=100.0))
    bowl = recover_u(sol)
    # dense quadrature of the run's own slope, as an interpolation-free value
    fine = np.geomspace(1e-6, 10.0, 40000)
    u10 = float(np.trapezoid(sol.v_at(fine), fine)) + 0.25 * 1e-12
    assert 0.9 <= u10 / 50.0 <= 1.0
    assert float(np.interp(10.0, bowl.r, bowl.u)) == pytest.approx(u10,
                                                                   rel=1e-4)
    ref = recover_u(integrate(speed, IntegrationConfig(
        r_max=10.0, rel_tol=1e-12, abs_tol=1e-14)))
    assert u10 == pytest.approx(float(ref.u[-1]), rel=1e-6)


def test_recover_u_validates_samples():
    r = np.array([1.0, 0.5])
    with pytest.raises(ValueError):
        recover_u(synthetic_profile(r, r, np.ones_like(r)))


# ---------------------------------------------------------------------------
# curvatures and equation residual
# ---------------------------------------------------------------------------

def test_curvature_formulas():
    k1, krot = curvatures(1.0, 1.0, 1.0)
    assert k1 == pytest.approx(2.0 ** -1.5, rel=1e-14)
    assert krot == pytest.approx(2.0 ** -0.5, rel=1e-14)


def test_curvatures_umbilic_tip_limit():
    gamma = 0.5
    for r in (1e-3, 1e-5, 1e-7):
        k1, krot = curvatures(r, gamma * r, gamma)
        assert k1 == pytest.approx(gamma, rel=1e-5)
        assert krot == pytest.approx(gamma, rel=1e-5)


def test_residual_on_integrated_profiles(profile_cache):
    for spec, dim, cfg in [("mean", 2, IntegrationConfig(r_max=100.0)),
                           ("scalar", 3, None),
                           ("harmonic-mean", 2, None)]:
        sol = profile_cache(spec, dim, cfg)
        bowl = recover_u(sol)
        assert bowl.residual.max() < 1e-8


def test_residual_perturbed_point_linear_speed(profile_cache):
    # for the curvature-sum speed the defect is linear in the slope
    # derivative: scaling v' by 1.1 on a solution point leaves a residual of
    # exactly 0.1 v'/(1+v^2)^(3/2)
    speed = get_speed("mean", 2)
    sol = profile_cache("mean", 2, IntegrationConfig(r_max=100.0))
    i = len(sol.r) // 2
    r, v, vp = (float(sol.r[i]), float(sol.v[i]), float(sol.v_prime[i]))
    assert residual(speed, (r, v, vp)) < 1e-10
    expected = 0.1 * vp / (1.0 + v * v) ** 1.5
    assert residual(speed, (r, v, 1.1 * vp)) == pytest.approx(expected,
                                                              rel=1e-6)


def test_residual_tip_point():
    speed = get_speed("harmonic-mean", 2)
    gamma = compute_invariants(speed).gamma
    r = 1e-8
    assert residual(speed, (r, gamma * r, gamma)) < 1e-10


def test_residual_requires_positive_profile_curvature():
    with pytest.raises(DomainError):
        residual(get_speed("mean", 2), (1.0, 1.0, 0.0))


# ---------------------------------------------------------------------------
# asymptotic fit
# ---------------------------------------------------------------------------

def test_fit_asymptotics_mean(profile_cache):
    for n, c_expected in [(2, 0.5), (3, 0.25)]:
        speed = get_speed("mean", n)
        sol = profile_cache("mean", n, IntegrationConfig(r_max=100.0))
        fit = fit_asymptotics(recover_u(sol), compute_invariants(speed))
        assert fit.exponent == pytest.approx(2.0, abs=0.01)
        assert fit.constant == pytest.approx(c_expected, rel=0.02)
        assert fit.expected_constant == pytest.approx(c_expected, rel=1e-12)


def test_fit_asymptotics_scalar(profile_cache):
    sol = profile_cache("scalar", 3, None)
    fit = fit_asymptotics(recover_u(sol), compute_invariants(get_speed("scalar", 3)))
    assert fit.constant == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)), rel=0.02)
    assert fit.exponent == pytest.approx(2.0, abs=0.01)


def test_fit_asymptotics_not_applicable(profile_cache):
    hm = profile_cache("harmonic-mean", 2, None)
    with pytest.raises(NotApplicable):
        fit_asymptotics(recover_u(hm),
                        compute_invariants(get_speed("harmonic-mean", 2)))
    short = integrate(get_speed("mean", 2), IntegrationConfig(r_max=5.0))
    with pytest.raises(NotApplicable):
        fit_asymptotics(recover_u(short), compute_invariants(get_speed("mean", 2)))


# ---------------------------------------------------------------------------
# convexity
# ---------------------------------------------------------------------------

def test_convexity_of_integrated_profiles(profile_cache):
    for spec, dim, cfg in [("mean", 2, IntegrationConfig(r_max=100.0)),
                           ("scalar", 3, None), ("harmonic-mean", 2, None)]:
        bowl = recover_u(profile_cache(spec, dim, cfg))
        report = check_convexity(bowl)
        assert report.passed
        assert report.min_v_prime > 0.0 and report.min_v_over_r > 0.0


def test_convexity_flags_handmade_defect():
    r = np.linspace(0.1, 2.0, 50)
    v = r.copy()
    vp = np.ones_like(r)
    vp[30] = -0.5  # injected concavity
    bowl = recover_u(synthetic_profile(r, v, np.abs(vp) + 1e-12))
    bowl.data[30, 3] = -0.5
    report = check_convexity(bowl)
    assert not report.passed
    assert report.argmin_v_prime_r == pytest.approx(float(r[30]))


def test_tip_ratio_bounded_below_by_gamma(profile_cache):
    sol = profile_cache("mean", 2, IntegrationConfig(r_max=100.0))
    bowl = recover_u(sol)
    gamma = sol.invariants.gamma
    mask = bowl.r < 1e-3
    assert np.all(bowl.v[mask] / bowl.r[mask] >= gamma * (1.0 - 1e-6))


# ---------------------------------------------------------------------------
# worked-example bounds
# ---------------------------------------------------------------------------

def test_harmonic_tan_sandwich(profile_cache):
    sol = profile_cache("harmonic-mean", 2, None)
    r_lo = sol.status.r_low
    rs = np.linspace(2e-6, r_lo * 0.999, 200)
    vs = sol.v_at(rs)
    assert np.all(vs >= np.tan(rs) * (1.0 - 1e-9))
    mask = 2.0 * rs < math.pi / 2.0
    assert np.all(vs[mask] <= np.tan(2.0 * rs[mask]) * (1.0 + 1e-9))


def test_scalar_linear_barriers(profile_cache):
    sol = profile_cache("scalar", 3, None)
    r, v = sol.r, sol.v
    assert np.all(v >= r / math.sqrt(6.0) * (1.0 - 1e-9))
    assert np.all(v <= r / math.sqrt(2.0) * (1.0 + 1e-9))
