"""Inversion of the slope constraint f(x, y, ..., y) = 1.

For an admissible speed the map x -> f(x, y*e) is strictly increasing, so
the constraint has at most one solution x = g(y) for each y; likewise
y -> f(x, y*e) is strictly increasing and yields y = g1(x).  The solver
never differentiates: it brackets by exponential search (monotonicity makes
this unconditional) and polishes with Brent's method.

The large-y behaviour of g classifies the profile equation: the tail limit
L = lim g(y) and, when L = 0, the decay exponent of g(y) ~ c * y^-k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, NotApplicable, OutOfDomain
from .speeds import SpeedFunction, SpeedInvariants, compute_invariants, edge_growth_limit

__all__ = [
    "ConstraintContext",
    "constraint_context",
    "solve_g",
    "solve_g1",
    "tail_limit",
    "tail_decay_exponent",
    "TailDecay",
]

_RESIDUAL_TOL = 1e-12
_RTOL = 4.0 * np.finfo(float).eps
_TINY = 1e-305
_HUGE = 1e305


@dataclass(frozen=True)
class ConstraintContext:
    """A speed together with its invariants and the solvable y-interval.

    The constraint f(x, y*e) = 1 is solvable for x exactly when
    y_min < y < y_max.  y_max is the asymptotic slope level gamma_plus for
    nondegenerate speeds and infinite otherwise; y_min is positive only for
    speeds that stay bounded as a single curvature grows (harmonic mean:
    y_min = n - 1), and zero otherwise.
    """

    speed: SpeedFunction
    invariants: SpeedInvariants
    y_min: float
    y_max: float


def constraint_context(speed: SpeedFunction) -> ConstraintContext:
    inv = compute_invariants(speed)
    edge = edge_growth_limit(speed)
    y_min = 0.0 if math.isinf(edge) else edge ** (-1.0 / speed.alpha)
    y_max = math.inf if inv.degenerate else inv.gamma_plus
    return ConstraintContext(speed=speed, invariants=inv, y_min=y_min, y_max=y_max)


def _constraint_residual(speed: SpeedFunction, x: float, y: float) -> float:
    """f(x, y*e) - 1, evaluated overflow-tolerantly (inf means above 1)."""
    try:
        with np.errstate(all="ignore"):
            value = speed.eval_xy(x, y)
    except OverflowError:
        return math.inf
    if math.isnan(value):
        return math.inf
    return value - 1.0


def _bracket_root(phi, guess: float, what: str,
                  exhausted_error=BracketFailure) -> float:
    """Root of the increasing function phi, bracketed from ``guess``."""
    lo = hi = guess
    flo = fhi = phi(guess)
    if flo == 0.0:
        return guess
    if flo < 0.0:
        while fhi < 0.0:
            hi *= 4.0
            if hi > _HUGE:
                raise exhausted_error(
                    f"{what}: no sign change up to {hi:.3e}")
            fhi = phi(hi)
        lo = hi / 4.0
    else:
        while flo > 0.0:
            lo /= 4.0
            if lo < _TINY:
                raise exhausted_error(
                    f"{what}: no sign change down to {lo:.3e}")
            flo = phi(lo)
        hi = lo * 4.0
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return float(brentq(phi, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=200))


def solve_g(ctx: ConstraintContext, y: float, x0: Optional[float] = None) -> float:
    """The unique x with f(x, y*e) = 1, to residual below 1e-12.

    ``x0`` warm-starts the bracket (used by the ODE integrator, whose
    successive queries move slowly).
    """
    if not (ctx.y_min < y < ctx.y_max):
        raise OutOfDomain(
            f"y = {y!r} outside the solvable interval "
            f"({ctx.y_min!r}, {ctx.y_max!r}) of {ctx.speed.name!r}")
    speed = ctx.speed
    guess = x0 if x0 is not None and x0 > 0.0 else ctx.invariants.gamma
    x = _bracket_root(lambda t: _constraint_residual(speed, t, y), guess,
                      f"solve_g({ctx.speed.name!r}, y={y!r})")
    residual = abs(_constraint_residual(speed, x, y))
    if residual > _RESIDUAL_TOL:
        raise BracketFailure(
            f"solve_g residual {residual:.3e} exceeds {_RESIDUAL_TOL:.1e} "
            f"at x={x!r}, y={y!r}")
    return x


def solve_g1(ctx: ConstraintContext, x: float, y0: Optional[float] = None) -> float:
    """The unique y with f(x, y*e) = 1 (inverse of solve_g)."""
    if x <= 0.0:
        raise OutOfDomain(f"x must be positive, got {x!r}")
    speed = ctx.speed
    guess = y0 if y0 is not None and y0 > 0.0 else ctx.invariants.gamma
    y = _bracket_root(lambda t: _constraint_residual(speed, x, t), guess,
                      f"solve_g1({ctx.speed.name!r}, x={x!r})",
                      exhausted_error=OutOfDomain)
    residual = abs(_constraint_residual(speed, x, y))
    if residual > _RESIDUAL_TOL:
        raise BracketFailure(
            f"solve_g1 residual {residual:.3e} exceeds {_RESIDUAL_TOL:.1e} "
            f"at x={x!r}, y={y!r}")
    return y


def tail_limit(ctx: ConstraintContext, zero_tol: float = 1e-9) -> float:
    """L = lim_{y -> inf} g(y), for degenerate speeds.

    Probed along y = 10^k with Aitken extrapolation; values below
    ``zero_tol`` collapse to exactly 0.
    """
    from .speeds import extrapolate_monotone_limit

    if not ctx.invariants.degenerate:
        raise NotApplicable(
            f"{ctx.speed.name!r} is nondegenerate: its constraint interval "
            "is bounded and g has no tail")
    ks = [k for k in range(1, 9) if 10.0 ** k > ctx.y_min * 1.000001]
    k = 9
    while len(ks) < 6 and k <= 14:
        ks.append(k)
        k += 1
    probes = [solve_g(ctx, 10.0 ** k) for k in ks]
    limit = extrapolate_monotone_limit(
        probes, decreasing=True, what=f"tail limit of {ctx.speed.name!r}")
    return 0.0 if limit < zero_tol else limit


@dataclass(frozen=True)
class TailDecay:
    """Least-squares power-law fit g(y) ~ c * y^-exponent over the window."""

    exponent: float
    rms_residual: float
    window: tuple[float, float]
    good_fit: bool


def tail_decay_exponent(ctx: ConstraintContext,
                        window: tuple[float, float] = (1e3, 1e8),
                        points: int = 25,
                        fit_tol: float = 1e-4) -> TailDecay:
    """Decay exponent of g(y) as y -> inf, for degenerate speeds with L = 0.

    Fits log g against log y over the window; the rms residual of the fit
    measures how power-law-like the tail is.  ``good_fit`` is the
    residual-based confidence gate used by the classifier: power-law tails
    fit to near machine precision, while log-corrected tails leave residuals
    orders of magnitude above ``fit_tol``.
    """
    if not ctx.invariants.degenerate:
        raise NotApplicable(
            f"{ctx.speed.name!r} is nondegenerate: no tail to fit")
    L = tail_limit(ctx)
    if L > 0.0:
        raise NotApplicable(
            f"{ctx.speed.name!r} has positive tail limit L={L!r}; "
            "the decay exponent is defined only when L = 0")
    ys = np.geomspace(window[0], window[1], points)
    logs = np.log([solve_g(ctx, float(y)) for y in ys])
    logy = np.log(ys)
    slope, intercept = np.polyfit(logy, logs, 1)
    resid = logs - (slope * logy + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return TailDecay(exponent=float(-slope), rms_residual=rms,
                     window=window, good_fit=rms < fit_tol)
