"""Level curves of the slope expression w / (r * (1 + w^2)^beta).

For beta < 1/2 the expression is strictly increasing in w at fixed r and in
m at fixed r, so each level m defines a curve w_m(r), strictly increasing in
both r and m.  These curves are the sub- and supersolutions that sandwich
the profile slope: the tip level m = gamma bounds it from below everywhere,
and for nondegenerate speeds the level m = gamma_plus bounds it from above.

At large r the curve follows the power law w_m(r) ~ (m r)^alpha with
alpha = 1 / (1 - 2 beta), and its slope grows like r^(alpha - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from scipy.optimize import brentq

__all__ = ["BarrierCurve", "level_value", "w_of_r", "dw_dr",
           "asymptotic_exponents"]

_RTOL = 4.0 * 2.220446049250313e-16


def level_value(r: float, w: float, beta: float) -> float:
    """m = w / (r * (1 + w^2)^beta), rearranged to stay stable for large w."""
    if w <= 1.0:
        return w / (r * (1.0 + w * w) ** beta)
    # w^(1-2*beta) / (r * (1 + w^-2)^beta); the exponent 1-2*beta = 1/alpha
    # is positive, so no cancellation and no overflow below w ~ 1e300^alpha.
    iw2 = 1.0 / (w * w)
    return w ** (1.0 - 2.0 * beta) / (r * (1.0 + iw2) ** beta)


@dataclass(frozen=True)
class BarrierCurve:
    """The curve w_m(r) at level m, for a profile exponent beta < 1/2."""

    m: float
    beta: float
    kind: Literal["subsolution", "supersolution", "neutral"] = "neutral"

    def __post_init__(self):
        if not self.m > 0.0:
            raise ValueError(f"level must be positive, got {self.m!r}")
        if not self.beta < 0.5:
            # beta >= 1/2 would make r non-invertible in w (it corresponds
            # to alpha <= 0, which no admissible speed produces).
            raise ValueError(
                f"beta must be below 1/2 for an invertible level curve, "
                f"got {self.beta!r}")

    @property
    def alpha(self) -> float:
        return 1.0 / (1.0 - 2.0 * self.beta)

    def __call__(self, r: float) -> float:
        return w_of_r(self, r)


def w_of_r(curve: BarrierCurve, r: float) -> float:
    """The unique w > 0 on the level curve at radius r.

    Bracketed monotone inversion; the initial guess uses the exact small-r
    and large-r behaviour (w ~ m r near 0, w ~ (m r)^alpha at infinity).
    """
    if not r > 0.0:
        raise ValueError(f"radius must be positive, got {r!r}")
    m, beta = curve.m, curve.beta
    mr = m * r
    guess = mr if mr <= 1.0 else mr ** curve.alpha

    def phi(w: float) -> float:
        return level_value(r, w, beta) - m

    lo = hi = guess
    flo = fhi = phi(guess)
    if flo == 0.0:
        return guess
    if flo < 0.0:
        while fhi < 0.0:
            hi *= 2.0
            fhi = phi(hi)
        lo = hi / 2.0
    else:
        while flo > 0.0:
            lo /= 2.0
            flo = phi(lo)
        hi = lo * 2.0
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    w = float(brentq(phi, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=200))
    residual = abs(level_value(r, w, beta) - m)
    if residual > 1e-13 * m:
        raise RuntimeError(
            f"level-curve inversion residual {residual:.3e} at r={r!r}, "
            f"m={m!r}, beta={beta!r}")
    return w


def dw_dr(curve: BarrierCurve, w: float) -> float:
    """Slope dw/dr of the level curve at the point with height w.

    This is the reciprocal of dr/dw = (1 + (1-2b) w^2) / (m (1+w^2)^(1+b));
    it is positive for every beta < 1/2.
    """
    if not w > 0.0:
        raise ValueError(f"w must be positive, got {w!r}")
    m, beta = curve.m, curve.beta
    if w <= 1.0:
        return m * (1.0 + w * w) ** (1.0 + beta) / (1.0 + (1.0 - 2.0 * beta) * w * w)
    iw2 = 1.0 / (w * w)
    num = w ** (2.0 * beta) * (1.0 + iw2) ** (1.0 + beta)
    return m * num / (1.0 - 2.0 * beta + iw2)


def asymptotic_exponents(curve: BarrierCurve, alpha: float) -> tuple[float, float]:
    """Predicted large-r power-law exponents (of w and of dw/dr).

    w_m(r) grows like r^alpha and its slope like r^(alpha-1); ``alpha`` must
    agree with the curve's beta through beta = 1/2 - 1/(2 alpha).
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if not math.isclose(curve.alpha, alpha, rel_tol=1e-9):
        raise ValueError(
            f"alpha {alpha!r} inconsistent with curve beta {curve.beta!r} "
            f"(implied alpha {curve.alpha!r})")
    return (alpha, alpha - 1.0)
