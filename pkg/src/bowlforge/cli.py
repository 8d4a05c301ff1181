"""Command-line front end.

Subcommands:

* ``solve``     -- integrate a profile, write CSV samples + a JSON sidecar;
* ``classify``  -- entire/bounded/undetermined verdict as JSON, optionally
                   cross-validated against an integration (``--verify``);
* ``verify``    -- run the invariant bundle (admissibility, barriers,
                   convexity, equation residual, oracles, start convergence)
                   and report machine-readable pass/fail per check;
* ``sweep``     -- fan a grid of (speed, dim) classifications out to a
                   process pool, one JSON per combination.

Exit codes: 0 success; 1 verify found a failing invariant; 2 malformed
speed specification; 3 admissibility failure; 4 numerical failure.  CSV
numbers carry 17 significant digits so identical runs diff byte-equal.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .classifier import classify, cross_validate
from .constraint import constraint_context, solve_g
from .errors import (BowlforgeError, BracketFailure, DimensionError,
                     DomainError, NonConvergentLimit, NotApplicable,
                     NotHomogeneous, ParseError, StartupFailure)
from .levelsets import BarrierCurve, w_of_r
from .ode import (BlewUpAt, IntegrationConfig, LeftDomain, ProfileSolution,
                  ReachedHorizon, integrate, start_convergence)
from .profiles import check_convexity, fit_asymptotics, recover_u
from .speeds import get_speed, verify_admissibility

SCHEMA = "bowlforge/1"

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_PARSE = 2
EXIT_ADMISSIBILITY = 3
EXIT_NUMERICAL = 4


@dataclass
class RunManifest:
    """Everything needed to reproduce a run bit-identically."""

    command: str
    speed: str
    dim: int
    config: dict
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _fail(code: int, message: str) -> int:
    print(f"bowlforge: error: {message}", file=sys.stderr)
    return code


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _status_dict(status) -> dict:
    if isinstance(status, BlewUpAt):
        return {"kind": "blew_up", "R_low": status.r_low,
                "R_high": status.r_high}
    if isinstance(status, ReachedHorizon):
        return {"kind": "reached_horizon", "r_end": status.r_end,
                "capped": status.capped}
    return {"kind": "left_domain", "r": status.r, "reason": status.reason}


def _config_from_args(args) -> IntegrationConfig:
    kwargs = {}
    if args.rmax is not None:
        kwargs["r_max"] = args.rmax
    if args.rstart is not None:
        kwargs["r_start"] = args.rstart
    if args.vcap is not None:
        kwargs["v_cap"] = args.vcap
    if args.tol is not None:
        kwargs["rel_tol"] = args.tol
        kwargs["abs_tol"] = args.tol * 1e-2
    return IntegrationConfig(**kwargs)


def _resolve_speed(args):
    speed = get_speed(args.speed, args.dim)
    report = verify_admissibility(speed, samples=64)
    return speed, report


def _profile_csv(bowl) -> str:
    out = io.StringIO()
    out.write("r,v,vprime,u,kappa1,kappa_rot,residual\n")
    cols = (bowl.r, bowl.v, bowl.v_prime, bowl.u,
            bowl.kappa1, bowl.kappa_rot, bowl.residual)
    for row in zip(*cols):
        out.write(",".join(f"{x:.16e}" for x in row) + "\n")
    return out.getvalue()


def _invariants_dict(inv) -> dict:
    return {
        "gamma": inv.gamma,
        "boundary_value": inv.boundary_value,
        "degenerate": inv.degenerate,
        "gamma_plus": inv.gamma_plus,
        "beta": inv.beta,
    }


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    speed, report = _resolve_speed(args)
    if not report.all_pass:
        print(report, file=sys.stderr)
        return _fail(EXIT_ADMISSIBILITY,
                     f"speed {args.speed!r} failed admissibility sampling")
    cfg = _config_from_args(args)
    ctx = constraint_context(speed)
    profile = integrate(speed, cfg, ctx=ctx)
    bowl = recover_u(profile)
    verdict = classify(speed, ctx=ctx)

    manifest = RunManifest(
        command="solve", speed=args.speed, dim=args.dim,
        config=asdict(cfg))
    sidecar = {
        "schema": SCHEMA,
        "manifest": manifest.to_dict(),
        "status": _status_dict(profile.status),
        "invariants": _invariants_dict(profile.invariants),
        "classification": verdict.to_dict(),
        "samples": len(bowl.r),
    }
    csv_text = _profile_csv(bowl)
    manifest.wall_time_s = time.perf_counter() - t0

    if args.out:
        json_path = os.path.splitext(args.out)[0] + ".json"
        manifest.outputs = [args.out, json_path]
        sidecar["manifest"] = manifest.to_dict()
        if args.format == "json":
            sidecar["profile_csv"] = csv_text
            _atomic_write(args.out, json.dumps(sidecar, indent=2) + "\n")
        else:
            _atomic_write(args.out, csv_text)
            _atomic_write(json_path, json.dumps(sidecar, indent=2) + "\n")
        print(f"wrote {' and '.join(manifest.outputs)}", file=sys.stderr)
    else:
        sidecar["manifest"] = manifest.to_dict()
        if args.format == "json":
            print(json.dumps(sidecar, indent=2))
        else:
            sys.stdout.write(csv_text)
            print(json.dumps(sidecar), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    speed, report = _resolve_speed(args)
    if not report.all_pass:
        print(report, file=sys.stderr)
        return _fail(EXIT_ADMISSIBILITY,
                     f"speed {args.speed!r} failed admissibility sampling")
    ctx = constraint_context(speed)
    verdict = classify(speed, ctx=ctx)
    out = {
        "schema": SCHEMA,
        "manifest": RunManifest(command="classify", speed=args.speed,
                                dim=args.dim, config={}).to_dict(),
    }
    out.update(verdict.to_dict())
    if args.verify:
        cfg = _config_from_args(args)
        profile = integrate(speed, cfg, ctx=ctx)
        validation = cross_validate(speed, profile, verdict)
        out["profile_status"] = _status_dict(profile.status)
        out["validation"] = validation.to_dict()
    out["manifest"]["wall_time_s"] = time.perf_counter() - t0
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _speed_specific_checks(args, speed, ctx, profile, checks) -> None:
    n = speed.n
    if args.speed == "harmonic-mean":
        if isinstance(profile.status, BlewUpAt):
            lo, hi = math.pi / (2 * n), math.pi / 2
            ok = (lo - 1e-3 <= profile.status.r_low
                  and profile.status.r_high <= hi + 1e-3)
            checks.append(("blow-up radius within [pi/2n, pi/2]", ok,
                           f"bracket [{profile.status.r_low:.9g}, "
                           f"{profile.status.r_high:.9g}]"))
            rs = np.linspace(2 * profile.config.r_start,
                             profile.status.r_low * 0.999, 200)
            at = np.arctan(profile.v_at(rs))
            ok = bool(np.all(rs <= at + 1e-12) and np.all(at <= n * rs * (1 + 1e-9)))
            checks.append(("arctan(v) between r and n*r", ok, ""))
        else:
            checks.append(("blow-up detected", False,
                           f"expected blow-up, got {profile.status.kind}"))
    elif args.speed == "scalar":
        lo = 1.0 / math.sqrt(n * (n - 1))
        hi = 1.0 / math.sqrt((n - 1) * (n - 2))
        rs, vs = profile.r, profile.v
        ok = bool(np.all(vs >= lo * rs * (1 - 1e-9))
                  and np.all(vs <= hi * rs * (1 + 1e-9)))
        checks.append((f"linear barriers {lo:.4g} r <= v <= {hi:.4g} r", ok, ""))
    elif args.speed.startswith("gauss:") and n == 2:
        alpha = speed.alpha
        beta = 0.5 - 0.5 / alpha
        cfg = IntegrationConfig(
            r_max=profile.config.r_max, rel_tol=1e-12, abs_tol=1e-14)
        tight = integrate(speed, cfg, ctx=ctx)
        r_hi = (tight.status.r_low * 0.92
                if isinstance(tight.status, BlewUpAt) else
                min(tight.r_end, 2.0))
        rs = np.geomspace(2 * cfg.r_start, r_hi, 200)
        vnum = tight.v_at(rs)
        if beta == 0.0:
            vex = np.sqrt(np.expm1(rs ** 2))
        else:
            vex = np.sqrt(np.expm1(-np.log1p(-2.0 * beta * rs ** 2)
                                   / (2.0 * beta)))
        rel = float(np.max(np.abs(vnum - vex) / vex))
        checks.append(("separable closed-form match (rel err < 1e-8)",
                       rel < 1e-8, f"max rel err {rel:.3e}"))


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    try:
        speed, report = _resolve_speed(args)
    except (ParseError, DimensionError):
        raise
    checks: list[tuple[str, bool, str]] = []
    for c in report.checks:
        checks.append((f"admissibility: {c.name}", c.passed, c.detail))
    if not report.all_pass:
        return _emit_verify(args, checks, t0)

    ctx = constraint_context(speed)
    inv = ctx.invariants
    gamma = inv.gamma
    checks.append(("beta below 1/2", inv.beta < 0.5, f"beta={inv.beta!r}"))
    checks.append(("gamma_plus present iff nondegenerate",
                   (inv.gamma_plus is not None) == (not inv.degenerate), ""))
    g_at_gamma = solve_g(ctx, gamma)
    checks.append(("tip level is the constraint fixed point",
                   abs(g_at_gamma - gamma) <= 1e-9 * gamma,
                   f"|g(gamma)-gamma| = {abs(g_at_gamma - gamma):.3e}"))

    cfg = _config_from_args(args)
    profile = integrate(speed, cfg, ctx=ctx)
    checks.append(("slope positive at all samples",
                   bool(np.all(profile.v > 0.0)), ""))
    checks.append(("slope derivative positive at all samples",
                   bool(np.all(profile.v_prime > 0.0)), ""))

    sub = BarrierCurve(m=gamma, beta=inv.beta, kind="subsolution")
    w_lo = np.array([w_of_r(sub, float(ri)) for ri in profile.r])
    ok = bool(np.all(profile.v >= w_lo * (1 - 1e-8)))
    checks.append(("slope above the tip-level curve", ok, ""))
    if not inv.degenerate:
        sup = BarrierCurve(m=inv.gamma_plus, beta=inv.beta, kind="supersolution")
        w_hi = np.array([w_of_r(sup, float(ri)) for ri in profile.r])
        ok = bool(np.all(profile.v <= w_hi * (1 + 1e-8)))
        checks.append(("slope below the asymptotic-level curve", ok, ""))

    bowl = recover_u(profile)
    res_max = float(bowl.residual.max())
    checks.append(("translator equation residual < 1e-8 at all samples",
                   res_max < 1e-8, f"max residual {res_max:.3e}"))
    rt = 2.0 * cfg.r_start
    vt = profile.v_at(rt)
    vpt = float(profile.v_prime[np.searchsorted(profile.r, rt) - 1])
    k1 = vpt / (1.0 + vt * vt) ** 1.5
    krot = vt / (rt * math.sqrt(1.0 + vt * vt))
    tip_ok = (abs(k1 - gamma) <= 1e-4 * gamma
              and abs(krot - gamma) <= 1e-4 * gamma)
    checks.append(("tip curvatures approach the tip slope", tip_ok,
                   f"kappa1={k1!r}, kappa_rot={krot!r}, gamma={gamma!r}"))
    conv = check_convexity(bowl)
    checks.append(("convexity (v' > 0 and v/r > 0)", conv.passed,
                   f"min v'={conv.min_v_prime:.3e}, "
                   f"min v/r={conv.min_v_over_r:.3e}"))

    verdict = classify(speed, ctx=ctx)
    validation = cross_validate(speed, profile, verdict)
    checks.append((f"classification ({verdict.verdict}) consistent with "
                   "integration", validation.consistent,
                   "; ".join(validation.mismatches)))
    if verdict.verdict == "entire" and not inv.degenerate \
            and isinstance(profile.status, ReachedHorizon) \
            and profile.r_end >= 100.0:
        fit = fit_asymptotics(bowl, inv)
        ok = (abs(fit.exponent - fit.expected_exponent) < 0.05
              and abs(fit.constant - fit.expected_constant)
              <= 0.05 * fit.expected_constant)
        checks.append(("height growth matches the predicted power law", ok,
                       f"exponent {fit.exponent:.4f} vs "
                       f"{fit.expected_exponent:.4f}, constant "
                       f"{fit.constant:.5g} vs {fit.expected_constant:.5g}"))

    _speed_specific_checks(args, speed, ctx, profile, checks)

    if args.starts:
        starts = tuple(float(s) for s in args.starts.split(","))
        rep = start_convergence(speed, starts)
        detail = (f"sup diffs {['%.3e' % d for d in rep.sup_diffs]}, "
                  f"ratios {['%.1f' % rho for rho in rep.shrink_ratios]}")
        checks.append(("start-regularization differences shrink linearly",
                       rep.linear_shrink, detail))

    return _emit_verify(args, checks, t0)


def _emit_verify(args, checks, t0) -> int:
    all_pass = all(ok for _, ok, _ in checks)
    out = {
        "schema": SCHEMA,
        "manifest": RunManifest(
            command="verify", speed=args.speed, dim=args.dim,
            config={}, wall_time_s=time.perf_counter() - t0).to_dict(),
        "checks": [{"name": name, "passed": ok, "detail": detail}
                   for name, ok, detail in checks],
        "all_pass": all_pass,
    }
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    for name, ok, detail in checks:
        mark = "pass" if ok else "FAIL"
        print(f"[{mark}] {name}" + (f" ({detail})" if detail and not ok else ""),
              file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_one(task) -> tuple[str, int, dict]:
    spec, dim, do_verify, rmax = task
    speed = get_speed(spec, dim)
    ctx = constraint_context(speed)
    verdict = classify(speed, ctx=ctx)
    out = {"schema": SCHEMA}
    out.update(verdict.to_dict())
    if do_verify:
        cfg = IntegrationConfig(r_max=rmax) if rmax else IntegrationConfig()
        profile = integrate(speed, cfg, ctx=ctx)
        out["profile_status"] = _status_dict(profile.status)
        out["validation"] = cross_validate(speed, profile, verdict).to_dict()
    return spec, dim, out


def cmd_sweep(args) -> int:
    specs = [s.strip() for s in args.speeds.split(",") if s.strip()]
    dims = [int(d) for d in args.dims.split(",")]
    tasks = [(spec, dim, args.verify, args.rmax)
             for spec in specs for dim in dims]
    results = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for spec, dim, out in results:
        fname = os.path.join(
            args.out, f"{spec.replace(':', '_').replace('/', '_')}_n{dim}.json")
        _atomic_write(fname, json.dumps(out, indent=2) + "\n")
        rows.append((spec, dim, out["verdict"], out["rule"],
                     out.get("validation", {}).get("consistent")))
    width = max(len(r[0]) for r in rows)
    for spec, dim, verdict, rule, consistent in rows:
        extra = "" if consistent is None else f"  validated={consistent}"
        print(f"{spec:{width}s} n={dim}: {verdict:13s} [{rule}]{extra}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, with_config: bool = True) -> None:
    p.add_argument("--speed", required=True,
                   help="speed identifier: mean | harmonic-mean | scalar | "
                        "gauss:<alpha> | power-mean:<p>:<alpha> | expr:<source>")
    p.add_argument("--dim", type=int, required=True,
                   help="number of principal curvatures (>= 2)")
    p.add_argument("--out", help="output path (directory for sweep)")
    if with_config:
        p.add_argument("--rmax", type=float, help="integration horizon")
        p.add_argument("--rstart", type=float, help="regularized start radius")
        p.add_argument("--vcap", type=float, help="slope cap")
        p.add_argument("--tol", type=float,
                       help="relative tolerance (absolute = tol/100)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bowlforge",
        description="Rotationally symmetric translating solitons for "
                    "curvature flows: solve, classify, verify.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="integrate a profile to CSV+JSON")
    _add_common(p_solve)
    p_solve.add_argument("--format", choices=("csv", "json"), default="csv")
    p_solve.set_defaults(func=cmd_solve)

    p_cls = sub.add_parser("classify", help="entire/bounded verdict as JSON")
    _add_common(p_cls)
    p_cls.add_argument("--verify", action="store_true",
                       help="also integrate and cross-validate the verdict")
    p_cls.set_defaults(func=cmd_classify)

    p_ver = sub.add_parser("verify", help="run the invariant bundle")
    _add_common(p_ver)
    p_ver.add_argument("--starts",
                       help="comma list of start radii for the "
                            "regularization-convergence check")
    p_ver.set_defaults(func=cmd_verify)

    p_sw = sub.add_parser("sweep", help="classify a grid of speeds and dims")
    p_sw.add_argument("--speeds", required=True,
                      help="comma list of speed identifiers")
    p_sw.add_argument("--dims", required=True, help="comma list of dimensions")
    p_sw.add_argument("--out", required=True, help="output directory")
    p_sw.add_argument("--jobs", type=int, default=1,
                      help="worker processes (default 1)")
    p_sw.add_argument("--verify", action="store_true")
    p_sw.add_argument("--rmax", type=float)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, DimensionError) as exc:
        return _fail(EXIT_PARSE, str(exc))
    except NotHomogeneous as exc:
        return _fail(EXIT_ADMISSIBILITY, str(exc))
    except (BracketFailure, NonConvergentLimit, StartupFailure,
            NotApplicable, DomainError) as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except BowlforgeError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))


if __name__ == "__main__":
    sys.exit(main())
