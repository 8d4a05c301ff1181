"""Admissible speed functions and their scalar invariants.

A speed is a positive function f of the n principal curvatures, defined on
the positive cone, symmetric under permutation, strictly increasing in each
argument and homogeneous of some degree alpha > 0.  Everything downstream
(the slope constraint, the barrier curves, the profile ODE) is driven by a
handful of scalars derived from f:

* ``gamma``  -- the tip slope, 1 / f(1,...,1)^(1/alpha);
* ``f(0,e)`` -- the limit of f(s, 1, ..., 1) as s -> 0, which separates
  *degenerate* speeds (limit 0; round cylinders are stationary) from
  *nondegenerate* ones (limit positive; cylinders shrink);
* ``gamma_plus`` -- 1 / f(0,e)^(1/alpha), the asymptotic slope level,
  defined only for nondegenerate speeds;
* ``beta``   -- the exponent 1/2 - 1/(2*alpha) appearing in the profile ODE.

Built-in speeds are resolved from identifier strings: ``mean``,
``harmonic-mean``, ``scalar``, ``gauss:<alpha>``, ``power-mean:<p>:<alpha>``
and ``expr:<source>`` (see :mod:`bowlforge.expr` for the expression
language).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from . import expr as expr_mod
from .errors import DomainError, NonConvergentLimit, ParseError

__all__ = [
    "SpeedFunction",
    "SpeedInvariants",
    "AdmissibilityReport",
    "evaluate",
    "compute_invariants",
    "verify_admissibility",
    "get_speed",
    "builtin_ids",
    "mean_curvature",
    "harmonic_mean_curvature",
    "scalar_curvature",
    "gauss_power",
    "power_mean",
]

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpeedFunction:
    """An evaluable admissible speed.

    ``evaluator`` maps a positive curvature vector of length ``n`` to a
    positive float.  ``eval_xy(x, y)`` evaluates on the rotationally
    symmetric slice (x, y, y, ..., y); the default builds the full vector,
    built-ins may supply a cheaper closed form.
    """

    name: str
    n: int
    alpha: float
    evaluator: Callable[[np.ndarray], float]
    _eval_xy: Optional[Callable[[float, float], float]] = field(
        default=None, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be at least 2, got {self.n}")
        if not self.alpha > 0:
            raise ValueError(f"homogeneity degree must be positive, got {self.alpha}")

    def __call__(self, z) -> float:
        return evaluate(self, z)

    def eval_xy(self, x: float, y: float) -> float:
        """f evaluated at (x, y, y, ..., y); x, y > 0."""
        if x <= 0.0 or y <= 0.0:
            raise DomainError(f"curvatures must be positive, got ({x!r}, {y!r})")
        if self._eval_xy is not None:
            return self._eval_xy(x, y)
        z = np.full(self.n, y)
        z[0] = x
        return self.evaluator(z)

    @property
    def beta(self) -> float:
        return 0.5 - 0.5 / self.alpha


@dataclass(frozen=True)
class SpeedInvariants:
    """Scalar invariants of a speed; see the module docstring."""

    gamma: float
    boundary_value: float
    degenerate: bool
    gamma_plus: Optional[float]
    beta: float


def evaluate(speed: SpeedFunction, z) -> float:
    """Evaluate ``speed`` at the positive curvature vector ``z``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (speed.n,):
        raise DomainError(
            f"speed {speed.name!r} expects {speed.n} curvatures, got shape {z.shape}")
    if not np.all(z > 0.0):
        raise DomainError(f"curvatures must be positive, got {z!r}")
    value = speed.evaluator(z)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(
            f"speed {speed.name!r} evaluated to {value!r} at {z!r}")
    return float(value)


# ---------------------------------------------------------------------------
# Limit probes
# ---------------------------------------------------------------------------

def _aitken(seq: list[float]) -> float:
    """One Delta-squared pass over the tail of a sequence."""
    a, b, c = seq[-3], seq[-2], seq[-1]
    denom = c - 2.0 * b + a
    if denom == 0.0 or abs(denom) < 1e-300:
        return c
    return c - (c - b) ** 2 / denom


def extrapolate_monotone_limit(values: list[float], *, decreasing: bool,
                               what: str) -> float:
    """Limit of a monotone sequence sampled at geometrically spaced arguments.

    Applies Aitken extrapolation twice (killing the two leading geometric
    correction modes) and checks that successive extrapolants agree.  Raises
    NonConvergentLimit when monotonicity fails or no stable limit emerges.
    """
    values = [float(v) for v in values]
    scale = max(1.0, max(abs(v) for v in values))
    for prev, cur in zip(values, values[1:]):
        if decreasing and cur > prev * (1 + 1e-12) + 1e-300:
            raise NonConvergentLimit(
                f"{what}: sequence must decrease monotonically "
                f"({prev!r} -> {cur!r})")
        if not decreasing and cur < prev * (1 - 1e-12) - 1e-300:
            raise NonConvergentLimit(
                f"{what}: sequence must increase monotonically "
                f"({prev!r} -> {cur!r})")

    # Already flat at float resolution: done.
    if abs(values[-1] - values[-2]) <= 1e-14 * scale:
        return values[-1]

    def refine(seq: list[float]) -> list[float]:
        return [_aitken(seq[: i + 1]) for i in range(2, len(seq))]

    first = refine(values)
    second = refine(first) if len(first) >= 3 else first
    tail = second[-3:] if len(second) >= 3 else second
    spread = max(tail) - min(tail)
    if spread > 1e-9 * scale:
        raise NonConvergentLimit(
            f"{what}: limit did not stabilize (spread {spread:.3e} "
            f"over extrapolants {tail!r})")
    return tail[-1]


def boundary_value(speed: SpeedFunction) -> float:
    """f(0, e) as the limit of f(s, 1, ..., 1) along s = 10^-k, k = 1..12."""
    probes = [speed.eval_xy(10.0 ** -k, 1.0) for k in range(1, 13)]
    limit = extrapolate_monotone_limit(
        probes, decreasing=True, what=f"boundary value of {speed.name!r}")
    return max(limit, 0.0)


def edge_growth_limit(speed: SpeedFunction) -> float:
    """lim_{s->inf} f(s, 1, ..., 1); may be math.inf.

    Finite exactly when the speed vanishes as all but one curvature go to
    zero; the finite value fixes the lower endpoint of the constraint
    domain.
    """
    probes = [speed.eval_xy(10.0 ** k, 1.0) for k in range(1, 13)]
    diffs = [b - a for a, b in zip(probes, probes[1:])]
    if diffs[-1] > diffs[-2] > 0:
        return math.inf
    if probes[-1] > 1e280:
        return math.inf
    return extrapolate_monotone_limit(
        probes, decreasing=False, what=f"edge growth of {speed.name!r}")


def compute_invariants(speed: SpeedFunction,
                       degeneracy_tol: float = DEGENERACY_TOL) -> SpeedInvariants:
    """All scalar invariants of ``speed``.

    The boundary value is computed as a limit rather than by direct
    evaluation, since many speeds (harmonic mean, Gauss powers) are undefined
    when a curvature is exactly zero.
    """
    ones = np.ones(speed.n)
    gamma = evaluate(speed, ones) ** (-1.0 / speed.alpha)
    f0 = boundary_value(speed)
    degenerate = f0 < degeneracy_tol
    if degenerate:
        f0 = 0.0
    gamma_plus = None if degenerate else f0 ** (-1.0 / speed.alpha)
    return SpeedInvariants(
        gamma=gamma,
        boundary_value=f0,
        degenerate=degenerate,
        gamma_plus=gamma_plus,
        beta=speed.beta,
    )


# ---------------------------------------------------------------------------
# Admissibility sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    witness: Optional[np.ndarray] = None
    detail: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    speed_name: str
    samples: int
    checks: tuple[AxiomCheck, ...]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = [f"admissibility of {self.speed_name!r} ({self.samples} samples):"]
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"  {c.name:12s} {mark}  {c.detail}")
        return "\n".join(lines)


def verify_admissibility(speed: SpeedFunction, samples: int = 100,
                         seed: int = 7) -> AdmissibilityReport:
    """Sample the three speed axioms on quasi-random points in [0.1, 10]^n.

    Failures are reported with a witness point, not raised: a bad speed is
    data, not an error.  Sampling cannot certify the axioms globally; this is
    evidence, used as a gate before expensive computations.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    sampler = qmc.Halton(d=speed.n, scramble=True, seed=seed)
    points = qmc.scale(sampler.random(samples), 0.1, 10.0)
    rng = np.random.default_rng(seed)

    sym_fail = ell_fail = hom_fail = None
    sym_detail = ell_detail = hom_detail = ""
    for z in points:
        try:
            fz = evaluate(speed, z)
        except DomainError as exc:
            detail = f"evaluation failed: {exc}"
            checks = (
                AxiomCheck("symmetry", False, z, detail),
                AxiomCheck("ellipticity", False, z, detail),
                AxiomCheck("homogeneity", False, z, detail),
            )
            return AdmissibilityReport(speed.name, samples, checks)

        if sym_fail is None:
            perm = rng.permutation(speed.n)
            try:
                fp = evaluate(speed, z[perm])
                ok = abs(fp - fz) <= 1e-12 * max(abs(fz), abs(fp))
                detail = "" if ok else f"f(z)={fz!r} but f(perm(z))={fp!r}"
            except DomainError as exc:
                ok, detail = False, f"evaluation failed: {exc}"
            if not ok:
                sym_fail, sym_detail = z, detail

        if ell_fail is None:
            for i in range(speed.n):
                h = 1e-6 * abs(z[i])
                zp, zm = z.copy(), z.copy()
                zp[i] += h
                zm[i] -= h
                try:
                    deriv = (evaluate(speed, zp) - evaluate(speed, zm)) / (2 * h)
                    ok = deriv > 0.0
                    detail = "" if ok else f"df/dz_{i} = {deriv!r}"
                except DomainError as exc:
                    ok, detail = False, f"evaluation failed: {exc}"
                if not ok:
                    ell_fail, ell_detail = z, detail
                    break

        if hom_fail is None:
            for lam in (0.5, 2.0, 10.0):
                try:
                    lhs = evaluate(speed, lam * z)
                    rhs = lam ** speed.alpha * fz
                    ok = abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))
                    detail = "" if ok else (f"f({lam}*z)={lhs!r} vs "
                                            f"{lam}^{speed.alpha}*f(z)={rhs!r}")
                except DomainError as exc:
                    ok, detail = False, f"evaluation failed: {exc}"
                if not ok:
                    hom_fail, hom_detail = z, detail
                    break

    checks = (
        AxiomCheck("symmetry", sym_fail is None, sym_fail, sym_detail),
        AxiomCheck("ellipticity", ell_fail is None, ell_fail, ell_detail),
        AxiomCheck("homogeneity", hom_fail is None, hom_fail, hom_detail),
    )
    return AdmissibilityReport(speed.name, samples, checks)


# ---------------------------------------------------------------------------
# Built-in speeds
# ---------------------------------------------------------------------------

def mean_curvature(n: int) -> SpeedFunction:
    """Sum of the principal curvatures; 1-homogeneous, nondegenerate."""
    return SpeedFunction(
        name="mean", n=n, alpha=1.0,
        evaluator=lambda z: float(np.sum(z)),
        _eval_xy=lambda x, y: x + (n - 1) * y,
    )


def harmonic_mean_curvature(n: int) -> SpeedFunction:
    """Reciprocal of the sum of reciprocals; 1-homogeneous, degenerate."""
    return SpeedFunction(
        name="harmonic-mean", n=n, alpha=1.0,
        evaluator=lambda z: float(1.0 / np.sum(1.0 / z)),
        _eval_xy=lambda x, y: 1.0 / (1.0 / x + (n - 1) / y),
    )


def scalar_curvature(n: int) -> SpeedFunction:
    """sqrt(2 * S2), the scalar curvature of a convex hypersurface.

    Nondegenerate for n >= 3; at n = 2 it reduces to sqrt(2 * K) and is
    degenerate.
    """
    def ev(z: np.ndarray) -> float:
        s1 = float(np.sum(z))
        s2 = 0.5 * (s1 * s1 - float(np.sum(z * z)))
        return math.sqrt(2.0 * s2)

    m = n - 1
    return SpeedFunction(
        name="scalar", n=n, alpha=1.0,
        evaluator=ev,
        _eval_xy=lambda x, y: math.sqrt(2.0 * m * x * y + m * (m - 1) * y * y),
    )


def gauss_power(n: int, alpha: float) -> SpeedFunction:
    """K^(alpha/n) where K is the product of the principal curvatures."""
    p = alpha / n
    return SpeedFunction(
        name=f"gauss:{alpha:g}", n=n, alpha=alpha,
        evaluator=lambda z: float(np.prod(z) ** p),
        _eval_xy=lambda x, y: (x * y ** (n - 1)) ** p,
    )


def power_mean(n: int, p: float, alpha: float) -> SpeedFunction:
    """alpha-th power of the p-power mean ((1/n) sum z_i^p)^(1/p).

    p = 0 is the geometric mean.  Nondegenerate iff p > 0.
    """
    if p == 0.0:
        base = gauss_power(n, alpha)
        return SpeedFunction(
            name=f"power-mean:0:{alpha:g}", n=n, alpha=alpha,
            evaluator=base.evaluator, _eval_xy=base._eval_xy)
    q = alpha / p
    return SpeedFunction(
        name=f"power-mean:{p:g}:{alpha:g}", n=n, alpha=alpha,
        evaluator=lambda z: float((np.sum(z ** p) / n) ** q),
        _eval_xy=lambda x, y: ((x ** p + (n - 1) * y ** p) / n) ** q,
    )


def _expr_speed(source: str, n: int) -> SpeedFunction:
    parsed = expr_mod.parse_speed(source, n)
    alpha = expr_mod.measure_homogeneity(parsed)
    return SpeedFunction(
        name=f"expr:{source}", n=n, alpha=alpha, evaluator=parsed.evaluate)


def builtin_ids() -> list[str]:
    return ["mean", "harmonic-mean", "scalar", "gauss:<alpha>",
            "power-mean:<p>:<alpha>", "expr:<source>"]


def get_speed(spec: str, dim: int) -> SpeedFunction:
    """Resolve a speed identifier string (see module docstring) at ``dim``."""
    if spec == "mean":
        return mean_curvature(dim)
    if spec == "harmonic-mean":
        return harmonic_mean_curvature(dim)
    if spec == "scalar":
        return scalar_curvature(dim)
    if spec.startswith("gauss:"):
        try:
            alpha = float(spec.split(":", 1)[1])
        except ValueError:
            raise ParseError(f"bad gauss exponent in {spec!r}", len("gauss:"))
        if alpha <= 0:
            raise ParseError(f"gauss exponent must be positive in {spec!r}",
                             len("gauss:"))
        return gauss_power(dim, alpha)
    if spec.startswith("power-mean:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParseError(f"expected power-mean:<p>:<alpha>, got {spec!r}", 0)
        try:
            p, alpha = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"bad power-mean parameters in {spec!r}",
                             len("power-mean:"))
        if alpha <= 0:
            raise ParseError(f"power-mean degree must be positive in {spec!r}",
                             len("power-mean:"))
        return power_mean(dim, p, alpha)
    if spec.startswith("expr:"):
        return _expr_speed(spec[len("expr:"):], dim)
    raise ParseError(
        f"unknown speed identifier {spec!r} "
        f"(built-ins: {', '.join(builtin_ids())})", 0)
