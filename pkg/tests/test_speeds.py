import math

import numpy as np
import pytest

from bowlforge import (DomainError, NonConvergentLimit, ParseError,
                       SpeedFunction, compute_invariants, evaluate, get_speed,
                       verify_admissibility)

BUILTINS = [("mean", 2), ("mean", 4), ("harmonic-mean", 2),
            ("harmonic-mean", 3), ("scalar", 3), ("scalar", 5),
            ("gauss:1", 2), ("gauss:2", 2), ("gauss:3", 3),
            ("power-mean:2:1", 3), ("power-mean:-1:2", 2)]


def test_evaluate_worked_examples():
    assert evaluate(get_speed("mean", 2), [1.0, 1.0]) == 2.0
    assert evaluate(get_speed("harmonic-mean", 2), [1.0, 1.0]) == 0.5
    assert evaluate(get_speed("gauss:2", 2), [2.0, 3.0]) == pytest.approx(6.0)


def test_evaluate_rejects_nonpositive():
    mean = get_speed("mean", 2)
    with pytest.raises(DomainError):
        evaluate(mean, [1.0, 0.0])
    with pytest.raises(DomainError):
        evaluate(mean, [-1.0, 2.0])
    with pytest.raises(DomainError):
        evaluate(mean, [1.0, 2.0, 3.0])  # wrong arity


def test_invariants_mean():
    inv = compute_invariants(get_speed("mean", 2))
    assert inv.gamma == pytest.approx(0.5, abs=1e-14)
    assert inv.boundary_value == pytest.approx(1.0, abs=1e-12)
    assert not inv.degenerate
    assert inv.gamma_plus == pytest.approx(1.0, abs=1e-12)
    assert inv.beta == 0.0


def test_invariants_harmonic():
    inv = compute_invariants(get_speed("harmonic-mean", 2))
    assert inv.gamma == pytest.approx(2.0, abs=1e-14)
    assert inv.boundary_value == 0.0
    assert inv.degenerate
    assert inv.gamma_plus is None
    assert inv.beta == 0.0


def test_invariants_scalar_n3():
    # f(0, 1, 1) = sqrt(2 * S2(0,1,1)) = sqrt(2)
    inv = compute_invariants(get_speed("scalar", 3))
    assert inv.boundary_value == pytest.approx(math.sqrt(2), rel=1e-10)
    assert inv.gamma_plus == pytest.approx(2 ** -0.5, rel=1e-10)
    assert inv.gamma == pytest.approx(1 / math.sqrt(6), rel=1e-12)


def test_invariants_gauss():
    inv = compute_invariants(get_speed("gauss:2", 2))
    assert inv.degenerate and inv.boundary_value == 0.0
    assert inv.beta == pytest.approx(0.25)
    assert inv.gamma == pytest.approx(1.0)


@pytest.mark.parametrize("spec,dim", BUILTINS)
def test_gamma_is_unit_level(spec, dim):
    speed = get_speed(spec, dim)
    inv = compute_invariants(speed)
    value = evaluate(speed, np.full(dim, inv.gamma))
    assert abs(value - 1.0) < 1e-10


@pytest.mark.parametrize("spec,dim,degenerate", [
    ("mean", 2, False), ("mean", 5, False),
    ("scalar", 3, False), ("scalar", 4, False),
    ("harmonic-mean", 2, True), ("harmonic-mean", 4, True),
    ("gauss:0.5", 2, True), ("gauss:2", 3, True),
    ("power-mean:2:1", 3, False), ("power-mean:-1:1", 2, True),
])
def test_degeneracy_table(spec, dim, degenerate):
    assert compute_invariants(get_speed(spec, dim)).degenerate == degenerate


@pytest.mark.parametrize("spec,dim", BUILTINS)
def test_homogeneity_probe(spec, dim):
    speed = get_speed(spec, dim)
    rng = np.random.default_rng(3)
    for _ in range(100):
        z = rng.uniform(0.1, 10.0, size=dim)
        f1, f2 = evaluate(speed, z), evaluate(speed, 2.0 * z)
        assert abs(f2 - 2.0 ** speed.alpha * f1) < 1e-10 * abs(f2)


@pytest.mark.parametrize("spec,dim", BUILTINS)
def test_eval_xy_matches_evaluator(spec, dim):
    speed = get_speed(spec, dim)
    rng = np.random.default_rng(5)
    for _ in range(20):
        x, y = rng.uniform(0.1, 10.0, size=2)
        z = np.full(dim, y)
        z[0] = x
        assert speed.eval_xy(x, y) == pytest.approx(evaluate(speed, z), rel=1e-14)


@pytest.mark.parametrize("spec,dim", BUILTINS)
def test_builtins_pass_admissibility(spec, dim):
    report = verify_admissibility(get_speed(spec, dim), samples=100)
    assert report.all_pass, str(report)


def test_admissibility_catches_asymmetry():
    bad = SpeedFunction(name="first-slot", n=2, alpha=1.0,
                        evaluator=lambda z: float(z[0]))
    report = verify_admissibility(bad, samples=100)
    sym = next(c for c in report.checks if c.name == "symmetry")
    assert not sym.passed and sym.witness is not None


def test_admissibility_catches_inhomogeneity():
    bad = SpeedFunction(name="affine", n=2, alpha=1.0,
                        evaluator=lambda z: float(z[0] + z[1] + 1.0))
    report = verify_admissibility(bad, samples=100)
    hom = next(c for c in report.checks if c.name == "homogeneity")
    assert not hom.passed and hom.witness is not None


def test_admissibility_catches_nonelliptic():
    bad = SpeedFunction(name="humped", n=2, alpha=2.0,
                        evaluator=lambda z: float(z[0] * z[1] * np.exp(-z[0] - z[1])))
    report = verify_admissibility(bad, samples=100)
    assert not next(c for c in report.checks if c.name == "ellipticity").passed


def test_boundary_limit_requires_monotone_sequence():
    # increasing toward s = 0 contradicts ellipticity in the first slot
    bad = SpeedFunction(name="rigged", n=2, alpha=1.0,
                        evaluator=lambda z: float(z[1] / (1.0 + z[0])))
    with pytest.raises(NonConvergentLimit):
        compute_invariants(bad)


def test_get_speed_errors():
    with pytest.raises(ParseError):
        get_speed("unknown-speed", 2)
    with pytest.raises(ParseError):
        get_speed("gauss:-1", 2)
    with pytest.raises(ParseError):
        get_speed("gauss:abc", 2)
    with pytest.raises(ParseError):
        get_speed("power-mean:1", 2)


def test_power_mean_zero_is_geometric():
    pm = get_speed("power-mean:0:2", 2)
    gk = get_speed("gauss:2", 2)
    z = np.array([0.7, 3.1])
    assert evaluate(pm, z) == pytest.approx(evaluate(gk, z), rel=1e-14)
