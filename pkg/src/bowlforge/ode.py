"""The profile-slope ODE and its regularized integration.

The slope v(r) of a rotationally symmetric translator satisfies

    v' = (1 + v^2)^(1+beta) * g(v / (r (1+v^2)^beta))        v(0) = 0,

where g inverts the speed constraint (see :mod:`bowlforge.constraint`).  The
right-hand side is singular at the origin, so integration starts at a small
radius r_start *on* the tip-level curve w_gamma (the natural subsolution);
the start error is controlled by the Lipschitz stability of the equation and
is verified empirically by :func:`start_convergence`.

The primary stepper is a Dormand-Prince 5(4) embedded pair with PI step-size
control and a quartic dense-output polynomial.  Steps that would push the
slope ratio v / (r (1+v^2)^beta) below the tip level gamma (or above the
ceiling gamma_plus for nondegenerate speeds) are rejected and halved: the
exact solution lives between those level curves, so such steps are
integration artifacts.

Two regime switches keep the march efficient and sharp:

* Stiff outer regime.  For nondegenerate speeds the ratio is attracted to
  gamma_plus at a rate that grows like r, which stability-limits any
  explicit method to steps ~ 1/r.  A cheap finite-difference estimate of
  the local attraction rate detects this, and the remaining smooth stretch
  is integrated with an implicit Runge-Kutta method (Radau IIA) instead.

* Steep tail / blow-up.  Once v exceeds ``v_switch`` the march continues in
  the inverse slope s = 1/v, where dr/ds stays tame, down to 1/v_cap.  The
  blow-up radius is then bracketed by the final radius plus a power-law
  estimate of the remaining tail; when the tail is not integrable (dr/ds
  diverging at least like 1/s) no finite blow-up radius exists and the run
  reports a horizon reached at the slope cap.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .constraint import ConstraintContext, constraint_context, solve_g
from .errors import (BracketFailure, DomainError, NonConvergent, OutOfDomain,
                     StartupFailure)
from .levelsets import BarrierCurve, dw_dr, level_value, w_of_r
from .speeds import SpeedFunction, SpeedInvariants

__all__ = [
    "IntegrationConfig",
    "ProfileSolution",
    "ReachedHorizon",
    "BlewUpAt",
    "LeftDomain",
    "rhs",
    "integrate",
    "slope_at_origin",
    "start_convergence",
    "ConvergenceReport",
]


# ---------------------------------------------------------------------------
# Configuration and result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegrationConfig:
    """Numerical controls for the profile integration."""

    r_start: float = 1e-6
    r_max: float = 1e3
    v_cap: float = 1e8
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    min_step: float = 1e-14
    v_switch: float = 1e3  # slope at which integration switches to s = 1/v

    def __post_init__(self):
        if not 0.0 < self.r_start < self.r_max:
            raise ValueError(
                f"need 0 < r_start < r_max, got {self.r_start!r}, {self.r_max!r}")
        for name in ("v_cap", "rel_tol", "abs_tol", "min_step", "v_switch"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ReachedHorizon:
    """Integration ended without evidence of a finite blow-up radius.

    ``capped`` marks runs stopped by the slope cap rather than by r_max;
    the profile continues beyond r_end but its slope exceeds v_cap there.
    """
    r_end: float
    capped: bool = False

    kind = "reached_horizon"


@dataclass(frozen=True)
class BlewUpAt:
    """The slope diverges at a finite radius R in [r_low, r_high]."""
    r_low: float
    r_high: float

    kind = "blew_up"

    @property
    def width(self) -> float:
        return self.r_high - self.r_low


@dataclass(frozen=True)
class LeftDomain:
    """Integration could not continue and no blow-up was identified."""
    r: float
    reason: str

    kind = "left_domain"


Status = Union[ReachedHorizon, BlewUpAt, LeftDomain]


# ---------------------------------------------------------------------------
# Right-hand side
# ---------------------------------------------------------------------------

def _one_plus_sq_pow(v: float, p: float) -> float:
    """(1 + v^2)^p without overflow for large v."""
    try:
        if v <= 1.0:
            return (1.0 + v * v) ** p
        return v ** (2.0 * p) * (1.0 + 1.0 / (v * v)) ** p
    except OverflowError:
        return math.inf


class _SlopeRhs:
    """Stateful evaluator of the slope ODE right-hand side.

    Keeps the previous constraint solution as a warm start: the integrator's
    successive queries move the ratio slowly, so the bracketed root solve
    usually converges from a tight interval.
    """

    def __init__(self, ctx: ConstraintContext):
        self.ctx = ctx
        self.beta = ctx.invariants.beta
        self._last_x: float = ctx.invariants.gamma
        self.evals = 0

    def __call__(self, r: float, v: float) -> float:
        self.evals += 1
        y = level_value(r, v, self.beta)
        x = solve_g(self.ctx, y, x0=self._last_x)
        self._last_x = x
        return _one_plus_sq_pow(v, 1.0 + self.beta) * x


def rhs(speed: SpeedFunction, r: float, v: float,
        ctx: Optional[ConstraintContext] = None) -> float:
    """Slope derivative v'(r, v); raises OutOfDomain when the slope ratio
    leaves the solvable constraint interval."""
    if not (r > 0.0 and v > 0.0):
        raise DomainError(f"need r > 0 and v > 0, got r={r!r}, v={v!r}")
    if ctx is None:
        ctx = constraint_context(speed)
    return _SlopeRhs(ctx)(r, v)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with quartic dense output
# ---------------------------------------------------------------------------

_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (-71 / 57600, 71 / 16695, -71 / 1920,
                                17253 / 339200, -22 / 525, 1 / 40)
# Quartic interpolant coefficients (rows: stages k1..k7, columns: x..x^4).
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class _Seg:
    """One accepted step's dense polynomial: y(t0 + x*h) for x in [0, 1]."""
    t0: float
    h: float  # signed
    y0: float
    q: tuple[float, float, float, float]
    x_hi: float = 1.0  # < 1 when the step was truncated by an event

    @property
    def t1(self) -> float:
        return self.t0 + self.h * self.x_hi

    def at_x(self, x: float) -> float:
        q1, q2, q3, q4 = self.q
        return self.y0 + self.h * x * (q1 + x * (q2 + x * (q3 + x * q4)))

    def at(self, t: float) -> float:
        return self.at_x((t - self.t0) / self.h)


def _dense_q(k: tuple[float, ...]) -> tuple[float, float, float, float]:
    return tuple(sum(k[i] * _P[i][j] for i in range(7)) for j in range(4))


class _Collapse(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class _March:
    """Adaptive scalar Dormand-Prince march with guard-based step rejection.

    ``fun`` may raise DomainError; such steps are rejected and retried with
    a quarter step.  ``guard(t, y)`` vetoes accepted points.  The march ends
    at t_bound or raises _Collapse when the step size falls below min_step.
    """

    def __init__(self, fun: Callable[[float, float], float], t0: float,
                 y0: float, t_bound: float, rtol: float, atol: float,
                 min_step: float, first_step: float,
                 guard: Optional[Callable[[float, float], bool]] = None,
                 max_step_fn: Optional[Callable[[float], float]] = None):
        self.fun = fun
        self.t, self.y = t0, y0
        self.t_bound = t_bound
        self.dir = 1.0 if t_bound >= t0 else -1.0
        self.rtol, self.atol, self.min_step = rtol, atol, min_step
        self.guard = guard
        self.max_step_fn = max_step_fn
        self.f = fun(t0, y0)
        self.h = abs(first_step)
        self.err_prev = 1.0
        self.nodes: list[tuple[float, float, float]] = [(t0, y0, self.f)]
        self.segments: list[_Seg] = []
        self.done = False

    def _attempt(self, h: float):
        t, y, k1 = self.t, self.y, self.f
        fun = self.fun
        k2 = fun(t + h * _A21, y + h * (_A21 * k1))
        k3 = fun(t + h * 0.3, y + h * (_A31 * k1 + _A32 * k2))
        k4 = fun(t + h * 0.8, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = fun(t + h * (8 / 9),
                 y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = fun(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3
                                 + _A64 * k4 + _A65 * k5))
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = fun(t + h, y_new)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5
                   + _E6 * k6 + _E7 * k7)
        return y_new, k7, err, (k1, k2, k3, k4, k5, k6, k7)

    def step(self) -> bool:
        """Advance one accepted step; returns False once t_bound is reached."""
        if self.done:
            return False
        remaining = abs(self.t_bound - self.t)
        if remaining <= max(self.min_step, 4e-16 * abs(self.t)):
            self.done = True
            return False
        h = self.h
        while True:
            h_cap = remaining
            if self.max_step_fn is not None:
                h_cap = min(h_cap, self.max_step_fn(self.t))
            h = min(h, h_cap)
            if h < self.min_step:
                raise _Collapse("step size collapsed below min_step")
            hit_bound = h >= remaining
            try:
                y_new, f_new, err, k = self._attempt(self.dir * h)
            except DomainError:
                h *= 0.25
                continue
            if not (math.isfinite(y_new) and math.isfinite(err)):
                h *= 0.25
                continue
            scale = self.atol + self.rtol * max(abs(self.y), abs(y_new))
            err_norm = abs(err) / scale
            if err_norm > 1.0:
                h *= max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
                continue
            t_new = self.t_bound if hit_bound else self.t + self.dir * h
            if self.guard is not None and not self.guard(t_new, y_new):
                h *= 0.5
                continue
            # accepted: PI growth from this and the previous error
            e = max(err_norm, 1e-10)
            factor = _SAFETY * e ** -0.14 * self.err_prev ** 0.08
            self.h = h * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            self.err_prev = e
            self.segments.append(
                _Seg(t0=self.t, h=self.dir * h, y0=self.y, q=_dense_q(k)))
            self.t, self.y, self.f = t_new, y_new, f_new
            self.nodes.append((t_new, y_new, f_new))
            if hit_bound:
                self.done = True
            return True

    def cut_last_at_level(self, level: float) -> tuple[float, float]:
        """Truncate the last accepted step where y crosses ``level``.

        Rewrites the node/segment lists so the march output ends exactly at
        the crossing; returns (t_cut, y_cut).
        """
        seg = self.segments[-1]
        t_prev, y_prev, _ = self.nodes[-2]
        if y_prev >= level:
            x_cut = 0.0
        else:
            x_cut = brentq(lambda x: seg.at_x(x) - level, 0.0, 1.0,
                           xtol=1e-15, rtol=9e-16)
        t_cut = seg.t0 + seg.h * x_cut
        y_cut = seg.at_x(x_cut)
        self.segments[-1] = _Seg(seg.t0, seg.h, seg.y0, seg.q, x_hi=x_cut)
        f_cut = self.fun(t_cut, y_cut)
        self.nodes[-1] = (t_cut, y_cut, f_cut)
        self.t, self.y, self.f = t_cut, y_cut, f_cut
        return t_cut, y_cut


# ---------------------------------------------------------------------------
# Profile solution
# ---------------------------------------------------------------------------

@dataclass
class ProfileSolution:
    """Sampled slope profile with termination status and dense evaluators.

    ``samples`` columns are (r, v, v'), with v' evaluated from the ODE at
    each node so the translator equation holds there to solver precision.
    """

    samples: np.ndarray
    status: Status
    speed: SpeedFunction
    speed_id: str
    config: IntegrationConfig
    invariants: SpeedInvariants
    diagnostics: dict = field(default_factory=dict)
    _dense1: list = field(default_factory=list, repr=False)
    _stiff: object = field(default=None, repr=False)   # OdeSolution or None
    _dense2: list = field(default_factory=list, repr=False)
    _ceiling: Optional[BarrierCurve] = field(default=None, repr=False)
    _ceiling_span: tuple[float, float] = field(default=(math.inf, -math.inf),
                                               repr=False)

    @property
    def r(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def v_prime(self) -> np.ndarray:
        return self.samples[:, 2]

    @property
    def r_end(self) -> float:
        return float(self.samples[-1, 0])

    def v_at(self, r) -> np.ndarray | float:
        """Dense-output slope at radius r (scalar or array)."""
        if np.ndim(r) > 0:
            return np.array([self.v_at(float(ri)) for ri in np.asarray(r)])
        r = float(r)
        if not self._dense1:
            raise ValueError("no dense output stored")
        if r <= self._dense1[-1].t1:
            return self._v_at_explicit(r)
        if self._stiff is not None and r <= self._stiff.t_max * (1 + 1e-12):
            return float(self._stiff(min(r, self._stiff.t_max))[0])
        if self._ceiling is not None \
                and r <= self._ceiling_span[1] * (1 + 1e-12):
            return w_of_r(self._ceiling, min(r, self._ceiling_span[1]))
        if self._dense2:
            return self._v_at_steep(r)
        raise ValueError(
            f"radius {r!r} outside the integrated range (ends {self.r_end!r})")

    def _v_at_explicit(self, r: float) -> float:
        segs = self._dense1
        lo, hi = segs[0].t0, segs[-1].t1
        if not (lo - 1e-12 * max(1.0, abs(lo)) <= r <= hi * (1 + 1e-12)):
            raise ValueError(
                f"radius {r!r} outside the integrated range [{lo!r}, {hi!r}]")
        r = min(max(r, lo), hi)
        ends = [s.t1 for s in segs]
        i = min(bisect_left(ends, r), len(segs) - 1)
        return segs[i].at(r)

    def _v_at_steep(self, r: float) -> float:
        segs = self._dense2  # s-parametrized; r = seg(s) rises as s falls
        r_hi = [seg.at_x(seg.x_hi) for seg in segs]
        if r > r_hi[-1] * (1 + 1e-12):
            raise ValueError(
                f"radius {r!r} beyond the integrated range (ends {r_hi[-1]!r})")
        i = min(bisect_left(r_hi, r), len(segs) - 1)
        seg = segs[i]
        if r >= r_hi[i]:
            x = seg.x_hi
        elif r <= seg.y0:
            x = 0.0
        else:
            x = brentq(lambda u: seg.at_x(u) - r, 0.0, seg.x_hi,
                       xtol=1e-15, rtol=9e-16)
        s = seg.t0 + seg.h * x
        return 1.0 / s

    def ratio_at(self, r) -> np.ndarray | float:
        """The slope ratio v / (r (1+v^2)^beta) at radius r."""
        beta = self.invariants.beta
        if np.ndim(r) > 0:
            return np.array([level_value(float(ri), self.v_at(float(ri)), beta)
                             for ri in np.asarray(r)])
        return level_value(float(r), self.v_at(float(r)), beta)


# ---------------------------------------------------------------------------
# Integration driver
# ---------------------------------------------------------------------------

def integrate(speed: SpeedFunction, config: Optional[IntegrationConfig] = None,
              ctx: Optional[ConstraintContext] = None) -> ProfileSolution:
    """Integrate the profile slope from the regularized start.

    The start point sits on the tip-level curve w_gamma at r_start, exactly
    as in the vanishing-start approximation scheme; halving r_start and
    comparing is the standard error check (see :func:`start_convergence`).
    """
    cfg = config or IntegrationConfig()
    if ctx is None:
        ctx = constraint_context(speed)
    inv = ctx.invariants
    gamma, beta = inv.gamma, inv.beta

    sub = BarrierCurve(m=gamma, beta=beta, kind="subsolution")
    v0 = w_of_r(sub, cfg.r_start)
    fun1 = _SlopeRhs(ctx)

    ratio_floor = gamma * (1.0 - 1e-9)
    ratio_ceil = math.inf if inv.degenerate else inv.gamma_plus * (1.0 + 1e-9)

    def guard(r: float, v: float) -> bool:
        if v <= 0.0:
            return False
        m = level_value(r, v, beta)
        return ratio_floor <= m <= ratio_ceil

    try:
        march = _March(fun1, cfg.r_start, v0, cfg.r_max,
                       rtol=cfg.rel_tol, atol=cfg.abs_tol,
                       min_step=cfg.min_step, first_step=cfg.r_start / 8.0,
                       guard=guard)
    except (DomainError, BracketFailure, OverflowError) as exc:
        raise StartupFailure(
            f"slope equation not evaluable at the start point "
            f"(r={cfg.r_start!r}, v={v0!r}): {exc}") from exc
    if not math.isfinite(march.f):
        raise StartupFailure(
            f"slope equation returned {march.f!r} at the start point")

    # A blow-up can only happen for degenerate speeds (nondegenerate
    # profiles stay below the ceiling level curve), so only they switch to
    # the inverse-slope variable; nondegenerate runs are truncated at the
    # slope cap instead of analyzed.
    nondegenerate = not inv.degenerate
    v_stop = cfg.v_cap if nondegenerate else min(cfg.v_switch, cfg.v_cap)
    # Nondegenerate profiles approach the ceiling level like a power of 1/v;
    # once the gap falls below float resolution the equation can no longer
    # be distinguished from the ceiling curve itself, which then continues
    # the profile analytically.
    contact_level = None if inv.degenerate \
        else inv.gamma_plus * (1.0 - 1e-12)
    diagnostics: dict = {}
    status: Optional[Status] = None
    crossed = False
    contact = False
    go_stiff = False
    stiff_strikes = 0
    n_accept = 0

    try:
        while march.step():
            if march.y >= v_stop:
                march.cut_last_at_level(v_stop)
                crossed = True
                break
            if contact_level is not None \
                    and level_value(march.t, march.y, beta) >= contact_level:
                contact = True
                break
            n_accept += 1
            if n_accept % 4 == 0:
                # attraction-rate probe: explicit stepping is wasteful once
                # the step is stability-limited (h * |dF/dv| pinned near the
                # stability boundary) with a long smooth stretch ahead
                delta = 1e-7 * (1.0 + abs(march.y))
                try:
                    lam = abs(fun1(march.t, march.y + delta) - march.f) / delta
                except DomainError:
                    lam = 0.0
                if march.h * lam > 1.8 and (cfg.r_max - march.t) > 25 * march.h:
                    stiff_strikes += 1
                    if stiff_strikes >= 2:
                        go_stiff = True
                        break
                else:
                    stiff_strikes = 0
    except _Collapse as collapse:
        r_c, v_c, f_c = march.nodes[-1]
        if not nondegenerate and f_c > 1e3 and v_c > 1.0:
            # steep enough that the r-march cannot continue: resolve the
            # (possible) blow-up in the inverse-slope variable instead
            crossed = True
            v_stop = v_c
        elif nondegenerate:
            # the explicit march stalled against the ceiling level curve;
            # the implicit continuation handles that attraction robustly
            go_stiff = True
        else:
            status = LeftDomain(r=r_c, reason=collapse.reason)

    nodes = list(march.nodes)
    dense1 = list(march.segments)
    stiff_sol = None
    dense2: list = []

    if go_stiff:
        diagnostics["stiff_switch_r"] = march.t
        outcome, stiff_sol, stiff_nodes = _stiff_stretch(
            fun1, ctx, cfg, march.t, march.y, v_stop, contact_level,
            first_step=march.h)
        nodes.extend(stiff_nodes)
        if outcome == "event":
            crossed = True
        elif outcome == "contact":
            contact = True
        elif outcome == "bound":
            status = ReachedHorizon(r_end=nodes[-1][0], capped=False)
        else:
            status = LeftDomain(r=nodes[-1][0],
                                reason=f"implicit solver failed: {outcome}")

    ceiling = None
    ceiling_span = (math.inf, -math.inf)
    if status is None and contact:
        r_c, v_c = nodes[-1][0], nodes[-1][1]
        diagnostics["ceiling_contact_r"] = r_c
        ceiling = BarrierCurve(m=inv.gamma_plus, beta=beta,
                               kind="supersolution")
        extra, capped_at = _ceiling_nodes(ceiling, r_c, cfg.r_max, cfg.v_cap)
        nodes.extend(extra)
        ceiling_span = (r_c, nodes[-1][0])
        if capped_at is not None:
            status = ReachedHorizon(r_end=nodes[-1][0], capped=True)
            diagnostics["cap_hit"] = True
        else:
            status = ReachedHorizon(r_end=nodes[-1][0], capped=False)

    if status is None and not crossed:
        status = ReachedHorizon(r_end=nodes[-1][0], capped=False)

    if status is None and crossed:
        r_sw, v_sw, _ = nodes[-1]
        if r_sw >= cfg.r_max * (1.0 - 1e-12):
            # the slope threshold was crossed at the horizon itself
            status = ReachedHorizon(r_end=r_sw, capped=False)
        elif nondegenerate or cfg.v_cap <= v_stop:
            # the cap truncates the run before any tail analysis is possible
            status = ReachedHorizon(r_end=r_sw, capped=True)
            diagnostics["cap_hit"] = True
        else:
            status, extra_nodes, dense2 = _resolve_steep_tail(
                fun1, cfg, r_sw, v_sw, diagnostics)
            nodes.extend(extra_nodes)

    diagnostics["rhs_evals"] = fun1.evals
    kept = [nodes[0]]
    for node in nodes[1:]:  # steep-tail radii can collide at float resolution
        if node[0] > kept[-1][0]:
            kept.append(node)
    samples = np.array(kept)
    return ProfileSolution(
        samples=samples, status=status, speed=speed, speed_id=speed.name,
        config=cfg, invariants=inv, diagnostics=diagnostics,
        _dense1=dense1, _stiff=stiff_sol, _dense2=dense2,
        _ceiling=ceiling, _ceiling_span=ceiling_span)


def _stiff_stretch(fun1: _SlopeRhs, ctx: ConstraintContext,
                   cfg: IntegrationConfig, r0: float, v0: float,
                   v_stop: float, contact_level: Optional[float],
                   first_step: float):
    """Continue a stability-limited stretch with an implicit RK method.

    The right-hand side is made total for the benefit of Newton trial
    points: the constraint inverse is extended by its continuous boundary
    value 0 above the ceiling, and queries below the solvable interval are
    nudged inside.  Converged steps stay within the barrier strip, which is
    validated at the nodes afterwards.
    """
    inv = ctx.invariants
    beta = inv.beta
    y_max = ctx.y_max
    y_floor = ctx.y_min * (1.0 + 1e-9) + 1e-300

    def fun(t, y):
        v = float(y[0])
        if v <= 0.0:
            return np.array([inv.gamma])
        m = level_value(t, v, beta)
        if m >= y_max:
            return np.array([0.0])
        if m < y_floor:
            m = y_floor
        x = solve_g(ctx, m, x0=inv.gamma)
        return np.array([_one_plus_sq_pow(v, 1.0 + beta) * x])

    def hit_switch(t, y):
        return y[0] - v_stop
    hit_switch.terminal = True
    hit_switch.direction = 1.0
    events = [hit_switch]

    if contact_level is not None:
        def hit_ceiling(t, y):
            v = max(float(y[0]), 1e-300)
            return contact_level - level_value(t, v, beta)
        hit_ceiling.terminal = True
        hit_ceiling.direction = -1.0
        events.append(hit_ceiling)

    try:
        res = solve_ivp(fun, (r0, cfg.r_max), [v0], method="Radau",
                        rtol=cfg.rel_tol, atol=cfg.abs_tol, dense_output=True,
                        events=events,
                        first_step=min(first_step, (cfg.r_max - r0) / 2.0),
                        max_step=cfg.r_max)
    except (DomainError, BracketFailure) as exc:
        return f"constraint solve failed: {exc}", None, []
    nodes = []
    ceiling = None if math.isinf(y_max) else BarrierCurve(m=y_max, beta=beta)
    for t, v in zip(res.t[1:], res.y[0][1:]):
        try:
            vp = fun1(float(t), float(v))
        except DomainError:
            vp = float(fun(t, [v])[0])
            if vp <= 0.0 and ceiling is not None:
                # the node ratio reached the ceiling at float resolution;
                # the ceiling curve's own slope is the honest limit value
                vp = dw_dr(ceiling, float(v))
        nodes.append((float(t), float(v), vp))
    if res.status == 1:
        outcome = "event" if len(res.t_events[0]) else "contact"
    elif res.status == 0:
        outcome = "bound"
    else:
        outcome = res.message
    return outcome, res.sol, nodes


def _ceiling_nodes(ceiling: BarrierCurve, r_from: float, r_max: float,
                   v_cap: float, per_decade: int = 24):
    """Sample the ceiling level curve on (r_from, r_max].

    Used once the profile is within float resolution of the curve; the
    samples stop early (returning the capping radius) if the curve's height
    crosses ``v_cap`` first.
    """
    if r_from >= r_max * (1.0 - 1e-12):
        return [], None
    # radius at which the ceiling curve reaches the slope cap
    r_at_cap = v_cap / (ceiling.m * (1.0 + v_cap * v_cap) ** ceiling.beta)
    r_stop = min(r_max, r_at_cap)
    capped_at = None if r_stop >= r_max else r_stop
    if r_stop <= r_from * (1.0 + 1e-12):
        return [], capped_at
    decades = max(math.log10(r_stop / r_from), 1e-9)
    count = max(8, int(per_decade * decades) + 2)
    out = []
    for r in np.geomspace(r_from, r_stop, count)[1:]:
        w = w_of_r(ceiling, float(r))
        out.append((float(r), w, dw_dr(ceiling, w)))
    return out, capped_at


_BRACKET_WIDTH_TARGET = 1e-6
_S_FLOOR = 1e-13  # the inverse slope is never resolved below this


def _resolve_steep_tail(fun1: _SlopeRhs, cfg: IntegrationConfig,
                        r_sw: float, v_sw: float, diagnostics: dict):
    """March r as a function of s = 1/v from the switch point down to 1/v_cap.

    Decides between a finite blow-up radius (integrable dr/ds tail, which a
    power-law fit certifies) and a merely very steep entire profile.  When
    dr/ds diverges mildly (exponent in (0, 0.9)) the remaining tail at
    1/v_cap can exceed the bracket-width budget; the march then continues
    below 1/v_cap, exactly as far as the power law says is needed.
    """
    def fun2(s: float, r: float) -> float:
        vp = fun1(r, 1.0 / s)
        return -1.0 / (s * s * vp)

    cur_s, cur_r = 1.0 / v_sw, r_sw
    bound = max(1.0 / cfg.v_cap, _S_FLOOR)
    nodes: list[tuple[float, float, float]] = []
    segments: list[_Seg] = []

    while True:
        march = _March(fun2, cur_s, cur_r, bound,
                       rtol=cfg.rel_tol, atol=cfg.abs_tol,
                       min_step=min(cfg.min_step, bound / 100.0),
                       first_step=cur_s / 8.0,
                       max_step_fn=lambda s: abs(s) / 2.0)
        try:
            while march.step():
                if march.y >= cfg.r_max:
                    march.cut_last_at_level(cfg.r_max)
                    nodes.extend(_steep_nodes(march))
                    segments.extend(march.segments)
                    return (ReachedHorizon(r_end=cfg.r_max, capped=False),
                            nodes, segments)
        except _Collapse as collapse:
            nodes.extend(_steep_nodes(march))
            segments.extend(march.segments)
            diagnostics["steep_tail_collapse"] = collapse.reason
            return (LeftDomain(r=march.nodes[-1][1],
                               reason="step collapse while resolving the "
                                      "steep tail"),
                    nodes, segments)
        nodes.extend(_steep_nodes(march))
        segments.extend(march.segments)

        # fit |dr/ds| ~ c * s^-q over the last stretch of s
        s_end, r_end, f_end = march.nodes[-1]
        tail = [(s, abs(f)) for s, _, f in march.nodes if s <= 50.0 * bound]
        if len(tail) < 3:
            tail = [(s, abs(f)) for s, _, f in march.nodes[-3:]]
        logs = np.log([t[0] for t in tail])
        logd = np.log([t[1] for t in tail])
        q_hat = float(-np.polyfit(logs, logd, 1)[0])
        drds_end = abs(f_end)
        tail_est = s_end * drds_end / max(1.0 - q_hat, 0.05)
        diagnostics.update(cap_hit=True, tail_exponent=q_hat,
                           tail_estimate=tail_est, v_final=1.0 / s_end)

        if q_hat >= 0.9:
            # dr/ds is not integrable at s = 0: no finite radius in sight
            diagnostics["blowup_confirmed"] = False
            return (ReachedHorizon(r_end=r_end, capped=True), nodes, segments)
        if 2.0 * tail_est <= 0.4 * _BRACKET_WIDTH_TARGET or bound <= _S_FLOOR * 1.05:
            pad = 1e3 * (cfg.rel_tol * r_end + cfg.abs_tol)
            diagnostics["blowup_confirmed"] = True
            return (BlewUpAt(r_low=r_end - pad,
                             r_high=r_end + 2.0 * tail_est + pad),
                    nodes, segments)
        # deepen: choose the bound the fitted power law needs for the budget
        coeff = drds_end * s_end ** q_hat
        need = (0.1 * _BRACKET_WIDTH_TARGET * (1.0 - q_hat) / coeff) \
            ** (1.0 / (1.0 - q_hat))
        cur_s, cur_r = s_end, r_end
        bound = min(bound / 10.0, max(need, _S_FLOOR))


def _steep_nodes(march: _March) -> list[tuple[float, float, float]]:
    """Convert (s, r, dr/ds) nodes to (r, v, v') samples, skipping the
    duplicated switch point."""
    out = []
    for s, r, f in march.nodes[1:]:
        v = 1.0 / s
        vp = 1.0 / (s * s * abs(f))
        out.append((r, v, vp))
    return out


# ---------------------------------------------------------------------------
# Tip slope and start-regularization convergence
# ---------------------------------------------------------------------------

def slope_at_origin(speed: SpeedFunction, probe_start: float = 1e-6) -> float:
    """The tip slope gamma = v'(0), cross-checked against a short integration.

    Integrates over [probe_start, 8*probe_start] and verifies v(r)/r -> gamma
    at r = probe_start * {1, 2, 4}.
    """
    ctx = constraint_context(speed)
    gamma = ctx.invariants.gamma
    cfg = IntegrationConfig(r_start=probe_start, r_max=8.0 * probe_start,
                            rel_tol=1e-12, abs_tol=1e-16)
    sol = integrate(speed, cfg, ctx=ctx)
    for mult in (1.0, 2.0, 4.0):
        r = probe_start * mult
        dev = abs(sol.v_at(r) / r - gamma)
        if dev > 1e-4 * gamma:
            raise NonConvergent(
                f"numeric slope ratio v/r deviates from gamma by {dev!r} "
                f"at r={r!r}; the start regularization looks broken")
    return gamma


@dataclass(frozen=True)
class ConvergenceReport:
    """Pairwise differences between runs started at shrinking radii."""

    starts: tuple[float, ...]
    grid: np.ndarray
    sup_diffs: tuple[float, ...]      # one per consecutive start pair
    shrink_ratios: tuple[float, ...]  # sup_diff[i] / sup_diff[i+1]
    fitted_rate: float                # slope of log sup_diff vs log r_start
    linear_shrink: bool               # shrink at least linear (within 2x)


def start_convergence(speed: SpeedFunction, starts,
                      r_ref: float = 1.0,
                      rel_tol: float = 1e-12, abs_tol: float = 1e-15,
                      grid_points: int = 200) -> ConvergenceReport:
    """Integrate once per start radius and compare on a common grid.

    The runs differ only in where they leave the tip-level curve; their
    sup-norm distance on [max(starts), r_ref] must shrink at least linearly
    in the start radius (Lipschitz stability of the equation), and in
    practice shrinks much faster.
    """
    starts = tuple(float(s) for s in starts)
    if len(starts) < 2:
        raise ValueError("need at least two start radii")
    if any(b > a for a, b in zip(starts, starts[1:])):
        raise ValueError(f"starts must be non-increasing, got {starts!r}")
    if starts[0] >= r_ref:
        raise ValueError(f"starts must lie below r_ref={r_ref!r}")

    ctx = constraint_context(speed)
    grid = np.geomspace(starts[0], r_ref, grid_points)
    profiles = []
    for s in starts:
        cfg = IntegrationConfig(r_start=s, r_max=r_ref,
                                rel_tol=rel_tol, abs_tol=abs_tol)
        profiles.append(integrate(speed, cfg, ctx=ctx))
    values = [p.v_at(grid) for p in profiles]

    sup_diffs = tuple(float(np.max(np.abs(a - b)))
                      for a, b in zip(values, values[1:]))
    ratios = []
    linear = True
    for i in range(len(sup_diffs) - 1):
        d0, d1 = sup_diffs[i], sup_diffs[i + 1]
        ratios.append(math.inf if d1 == 0.0 else d0 / d1)
        start_ratio = starts[i] / starts[i + 1] if starts[i + 1] else math.inf
        if d1 > 0.0 and d0 / d1 < start_ratio / 2.0:
            linear = False
    pairs = [(0.5 * (starts[i] + starts[i + 1]), d)
             for i, d in enumerate(sup_diffs) if d > 0.0]
    if len(pairs) >= 2:
        xs = np.log([p[0] for p in pairs])
        ys = np.log([p[1] for p in pairs])
        rate = float(np.polyfit(xs, ys, 1)[0])
    else:
        rate = math.nan
    return ConvergenceReport(starts=starts, grid=grid, sup_diffs=sup_diffs,
                             shrink_ratios=tuple(ratios), fitted_rate=rate,
                             linear_shrink=linear)
