"""Entire-versus-bounded classification of bowl profiles.

The decision needs only four scalars: the degeneracy of the speed, its
homogeneity degree alpha, and (for degenerate speeds with alpha > 1/2) the
tail limit L of the constraint inverse g and, when L = 0, the decay
exponent of g.  The rules, in precedence order:

1. nondegenerate             -> entire, with height ~ C r^(alpha+1),
                                C = 1 / ((alpha+1) f(0, e));
2. alpha <= 1/2              -> entire (no height coefficient claimed);
3. degenerate, L > 0         -> bounded (cylinder asymptote);
4. degenerate, L = 0         -> entire when g decays at least like
                                y^-(2 alpha - 1) with a clean power-law fit,
                                bounded when it decays strictly slower, and
                                undetermined when the fit cannot tell (the
                                borderline rate with a poor power-law fit).

Bounded verdicts carry a numerically bracketed blow-up radius, obtained by
integration, since no general formula provides one.  ``cross_validate``
compares any verdict against an integrated profile and flags disagreement
rather than reconciling it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .constraint import (ConstraintContext, TailDecay, constraint_context,
                         tail_decay_exponent, tail_limit)
from .levelsets import level_value
from .ode import (BlewUpAt, IntegrationConfig, LeftDomain, ProfileSolution,
                  ReachedHorizon, integrate)
from .speeds import SpeedFunction

__all__ = [
    "Classification",
    "ValidationCheck",
    "ValidationReport",
    "classify",
    "cross_validate",
]

RULE_NONDEGENERATE = "nondegenerate"
RULE_LOW_HOMOGENEITY = "low_homogeneity"
RULE_POSITIVE_L = "degenerate_positive_L"
RULE_FAST_DECAY = "degenerate_fast_decay"
RULE_SLOW_DECAY = "degenerate_slow_decay"
RULE_BOUNDARY = "boundary_case"


@dataclass(frozen=True)
class Classification:
    verdict: Literal["entire", "bounded", "undetermined"]
    rule_fired: str
    speed_id: str
    dim: int
    alpha: float
    asymptotic_constant: Optional[float] = None  # entire + nondegenerate only
    r_low: Optional[float] = None                # bounded only
    r_high: Optional[float] = None
    evidence: str = ""
    tail_limit: Optional[float] = None
    tail: Optional[TailDecay] = None

    def __post_init__(self):
        if self.verdict == "bounded" and self.r_low is not None \
                and self.r_high is not None and self.r_low > self.r_high:
            raise ValueError("bounded verdict needs r_low <= r_high")

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "rule": self.rule_fired,
            "speed": self.speed_id,
            "dim": self.dim,
            "alpha": self.alpha,
        }
        if self.asymptotic_constant is not None:
            out["C"] = self.asymptotic_constant
        if self.r_low is not None:
            out["R_low"] = self.r_low
            out["R_high"] = self.r_high
        if self.evidence:
            out["evidence"] = self.evidence
        if self.tail_limit is not None:
            out["tail_limit"] = self.tail_limit
        if self.tail is not None:
            out["tail_fit"] = {
                "exponent": self.tail.exponent,
                "rms_residual": self.tail.rms_residual,
                "window": list(self.tail.window),
                "good_fit": self.tail.good_fit,
            }
        return out


def _blowup_bracket(speed: SpeedFunction, ctx: ConstraintContext,
                    config: Optional[IntegrationConfig],
                    tail_L: float) -> tuple[Optional[float], Optional[float], str]:
    """Best-effort numeric bracket of the blow-up radius."""
    if config is None:
        if tail_L > 0.0:
            # v' >= L (1+v^2)^(1+beta) bounds the blow-up radius by
            # (1 + 1/(1+2*beta)) / L up to the start radius; pad generously.
            beta = ctx.invariants.beta
            r_bound = 4.0 * (1.0 + 1.0 / (1.0 + 2.0 * beta)) / tail_L + 1.0
        else:
            r_bound = 1e6
        config = IntegrationConfig(r_max=r_bound)
    profile = integrate(speed, config, ctx=ctx)
    if isinstance(profile.status, BlewUpAt):
        return profile.status.r_low, profile.status.r_high, ""
    return (profile.r_end, math.inf,
            f"no blow-up detected up to r={profile.r_end!r}; "
            "bracket left open above")


def classify(speed: SpeedFunction, margin: float = 1e-3,
             config: Optional[IntegrationConfig] = None,
             ctx: Optional[ConstraintContext] = None) -> Classification:
    """Decide entire / bounded / undetermined for the bowl profile of ``speed``.

    ``margin`` is the half-width of the band around the critical decay
    exponent 2*alpha - 1 inside which a fitted exponent is treated as
    matching it.
    """
    if ctx is None:
        ctx = constraint_context(speed)
    inv = ctx.invariants
    alpha = speed.alpha
    base = dict(speed_id=speed.name, dim=speed.n, alpha=alpha)

    if not inv.degenerate:
        constant = 1.0 / ((alpha + 1.0) * inv.boundary_value)
        return Classification(
            verdict="entire", rule_fired=RULE_NONDEGENERATE,
            asymptotic_constant=constant, **base)

    if alpha <= 0.5:
        return Classification(
            verdict="entire", rule_fired=RULE_LOW_HOMOGENEITY, **base)

    L = tail_limit(ctx)
    if L > 0.0:
        r_low, r_high, note = _blowup_bracket(speed, ctx, config, L)
        return Classification(
            verdict="bounded", rule_fired=RULE_POSITIVE_L,
            r_low=r_low, r_high=r_high, evidence=note, tail_limit=L, **base)

    decay = tail_decay_exponent(ctx)
    critical = 2.0 * alpha - 1.0
    if decay.good_fit and decay.exponent >= critical - margin:
        return Classification(
            verdict="entire", rule_fired=RULE_FAST_DECAY,
            tail_limit=0.0, tail=decay, **base)
    if decay.good_fit:
        r_low, r_high, note = _blowup_bracket(speed, ctx, config, 0.0)
        return Classification(
            verdict="bounded", rule_fired=RULE_SLOW_DECAY,
            r_low=r_low, r_high=r_high, evidence=note,
            tail_limit=0.0, tail=decay, **base)
    return Classification(
        verdict="undetermined", rule_fired=RULE_BOUNDARY,
        evidence=(f"tail fit exponent {decay.exponent!r} vs critical "
                  f"{critical!r}; rms residual {decay.rms_residual:.3e} "
                  "is too large for a power-law tail, so neither growth "
                  "regime can be certified"),
        tail_limit=0.0, tail=decay, **base)


# ---------------------------------------------------------------------------
# Cross-validation against an integrated profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    speed_id: str
    checks: tuple[ValidationCheck, ...]

    @property
    def mismatches(self) -> tuple[str, ...]:
        return tuple(f"{c.name}: {c.detail}" for c in self.checks if not c.passed)

    @property
    def consistent(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "speed": self.speed_id,
            "consistent": self.consistent,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }


def _sample_ratios(profile: ProfileSolution) -> np.ndarray:
    beta = profile.invariants.beta
    r, v = profile.r, profile.v
    return np.array([level_value(float(ri), float(vi), beta)
                     for ri, vi in zip(r, v)])


def cross_validate(speed: SpeedFunction, profile: ProfileSolution,
                   classification: Classification) -> ValidationReport:
    """Check an integrated profile against a theoretical verdict.

    Disagreements are reported, never reconciled: a truncated or faulty run
    shows up as a failed check even when the verdict itself is correct.
    """
    checks: list[ValidationCheck] = []
    inv = profile.invariants
    gamma = inv.gamma
    status = profile.status

    ratios = _sample_ratios(profile)
    floor_ok = bool(np.all(ratios >= gamma * (1.0 - 1e-8)))
    checks.append(ValidationCheck(
        "slope ratio above tip level", floor_ok,
        "" if floor_ok else
        f"min ratio {ratios.min()!r} fell below gamma {gamma!r}"))
    if not inv.degenerate:
        ceil = inv.gamma_plus * (1.0 + 1e-8)
        ceil_ok = bool(np.all(ratios <= ceil))
        checks.append(ValidationCheck(
            "slope ratio below asymptotic level", ceil_ok,
            "" if ceil_ok else
            f"max ratio {ratios.max()!r} exceeded gamma_plus {inv.gamma_plus!r}"))

    if classification.verdict == "entire":
        if isinstance(status, BlewUpAt):
            checks.append(ValidationCheck(
                "profile reaches the horizon", False,
                f"classified entire but the profile blew up in "
                f"[{status.r_low!r}, {status.r_high!r}]"))
        elif isinstance(status, LeftDomain):
            checks.append(ValidationCheck(
                "profile reaches the horizon", False,
                f"classified entire but integration left the domain at "
                f"r={status.r!r} ({status.reason})"))
        elif not status.capped:
            reached = status.r_end >= 0.999 * profile.config.r_max
            checks.append(ValidationCheck(
                "profile reaches the horizon", reached,
                "" if reached else
                f"stopped at r={status.r_end!r} before r_max="
                f"{profile.config.r_max!r}"))
        else:
            confirmed = profile.diagnostics.get("blowup_confirmed")
            if confirmed is None:
                checks.append(ValidationCheck(
                    "profile reaches the horizon", False,
                    "slope cap truncated the run before the steep tail "
                    "could be analyzed; rerun with a larger v_cap"))
            else:
                checks.append(ValidationCheck(
                    "profile reaches the horizon", not confirmed,
                    "" if not confirmed else
                    "classified entire but the steep-tail analysis "
                    "certified a finite blow-up radius"))
    elif classification.verdict == "bounded":
        if not isinstance(status, BlewUpAt):
            checks.append(ValidationCheck(
                "profile blows up", False,
                f"classified bounded but integration ended with "
                f"{status.kind} at r={profile.r_end!r}"))
        else:
            inside = status.r_high <= profile.config.r_max
            checks.append(ValidationCheck(
                "profile blows up", inside,
                "" if inside else
                f"blow-up bracket [{status.r_low!r}, {status.r_high!r}] "
                f"extends beyond r_max={profile.config.r_max!r}"))
            if classification.r_low is not None \
                    and math.isfinite(classification.r_high):
                overlap = (status.r_low <= classification.r_high
                           and classification.r_low <= status.r_high)
                checks.append(ValidationCheck(
                    "blow-up brackets overlap", overlap,
                    "" if overlap else
                    f"profile bracket [{status.r_low!r}, {status.r_high!r}] "
                    f"vs classified [{classification.r_low!r}, "
                    f"{classification.r_high!r}]"))
    else:
        checks.append(ValidationCheck(
            "undetermined verdict", True,
            "classification is undetermined; profile recorded as evidence"))

    return ValidationReport(speed_id=speed.name, checks=tuple(checks))
