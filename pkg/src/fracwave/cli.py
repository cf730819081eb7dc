"""Command line front end: oracle calculator, experiment runner, rate and
functional-covariance studies, and raw noise export.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage, config, or domain
error.  All numbers print with "." decimals at full double precision.

Config files are INI-style with three sections, unknown keys rejected:

    [experiment]
    hurst = 0.5              # in [0.5, 1)
    h = 0.015625             # lattice step, dt = dx = h
    times = 0.5, 1.0         # strictly increasing, multiples of h
    radii = 8, 16, 32        # strictly increasing, multiples of h
    replicas = 10000
    seed = 1
    normalization = self     # self | paper
    chaos = true             # also compute first-chaos projections
    x_half_width = 33.0      # optional; default max(radii) + max(times)

    [sigma]
    kind = constant          # constant | linear | affine_sine | tabulated
    value = 1.0              # constant only
    # base = 1.0             # affine_sine: base + amplitude * sin(u)
    # amplitude = 0.5
    # knots = -1, 0, 1       # tabulated: piecewise linear
    # values = 0, 1, 2

    [output]
    summary =                # path for summary JSON; empty = stdout
    raw =                    # optional CSV of per-replica samples
    threads = 0              # 0 = auto (FRACWAVE_THREADS, then CPU count)
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from .analytic import MomentCurves
from .estimators import (
    ExperimentPlan,
    ExperimentSummary,
    functional_cov_check,
    ks_normality,
    run_experiment,
    summary_to_dict,
)
from .noise import NoiseSpec, sample_sheet, write_sheet
from .solver import SigmaSpec

__all__ = ["RunConfig", "parse_config", "serialize_config", "main"]

_EXPERIMENT_KEYS = {
    "hurst", "h", "times", "radii", "replicas", "seed",
    "normalization", "chaos", "x_half_width",
}
_SIGMA_KEYS = {"kind", "value", "base", "amplitude", "knots", "values"}
_OUTPUT_KEYS = {"summary", "raw", "threads"}


class ConfigError(ValueError):
    """Malformed or contradictory configuration: maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Mirror of ExperimentPlan plus output paths and thread cap (0 = auto)."""

    plan: ExperimentPlan
    summary_path: str = ""
    raw_path: str = ""
    threads: int = 0


def _parse_floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from exc


def _parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _build_sigma(section) -> SigmaSpec:
    kind = section.get("kind")
    if kind is None:
        raise ConfigError("[sigma] section needs a 'kind' key")
    kind = kind.strip()
    try:
        if kind == "constant":
            return SigmaSpec.constant(float(section.get("value", "1.0")))
        if kind == "linear":
            return SigmaSpec.linear()
        if kind == "affine_sine":
            return SigmaSpec.affine_sine(
                float(section.get("base", "1.0")), float(section.get("amplitude", "0.5"))
            )
        if kind == "tabulated":
            knots = _parse_floats(section.get("knots", ""), "sigma.knots")
            values = _parse_floats(section.get("values", ""), "sigma.values")
            return SigmaSpec.tabulated(knots, values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sigma parameters: {exc}") from exc
    raise ConfigError(f"unknown sigma kind {kind!r}")


_SIGMA_ALLOWED = {
    "constant": {"kind", "value"},
    "linear": {"kind"},
    "affine_sine": {"kind", "base", "amplitude"},
    "tabulated": {"kind", "knots", "values"},
}


def parse_config(text: str) -> RunConfig:
    """Strict parse: unknown sections or keys are errors, not warnings."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc

    known = {"experiment": _EXPERIMENT_KEYS, "sigma": _SIGMA_KEYS, "output": _OUTPUT_KEYS}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown config section [{sec}]")
        for key in cp[sec]:
            if key not in known[sec]:
                raise ConfigError(f"unknown key '{key}' in section [{sec}]")
    if "experiment" not in cp or "sigma" not in cp:
        raise ConfigError("config needs [experiment] and [sigma] sections")

    exp = cp["experiment"]
    for req in ("hurst", "h", "times", "radii", "replicas", "seed"):
        if req not in exp:
            raise ConfigError(f"[experiment] is missing required key '{req}'")

    sig = _build_sigma(cp["sigma"])
    allowed = _SIGMA_ALLOWED[sig.kind]
    for key in cp["sigma"]:
        if key not in allowed:
            raise ConfigError(f"key '{key}' does not apply to sigma kind '{sig.kind}'")

    try:
        xhw = exp.get("x_half_width", "").strip()
        plan = ExperimentPlan(
            hurst=float(exp["hurst"]),
            sigma=sig,
            h=float(exp["h"]),
            times=_parse_floats(exp["times"], "times"),
            radii=_parse_floats(exp["radii"], "radii"),
            replicas=int(exp["replicas"]),
            seed=int(exp["seed"]),
            normalization=exp.get("normalization", "self").strip(),
            chaos=_parse_bool(exp.get("chaos", "true"), "chaos"),
            x_half_width=float(xhw) if xhw else None,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        # plan-level contradictions (window too small, off-lattice times) are
        # runtime guards per the exit-code contract, not config syntax errors
        raise ValueError(str(exc)) from exc

    out = cp["output"] if "output" in cp else {}
    threads_text = str(out.get("threads", "0")).strip() or "0"
    try:
        threads = int(threads_text)
    except ValueError as exc:
        raise ConfigError(f"output.threads must be an integer, got {threads_text!r}") from exc
    if threads < 0:
        raise ConfigError("output.threads must be >= 0 (0 = auto)")
    return RunConfig(
        plan=plan,
        summary_path=str(out.get("summary", "")).strip(),
        raw_path=str(out.get("raw", "")).strip(),
        threads=threads,
    )


def serialize_config(rc: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(s))) == parse(s)."""
    plan = rc.plan
    lines = [
        "[experiment]",
        f"hurst = {plan.hurst!r}",
        f"h = {plan.h!r}",
        "times = " + ", ".join(repr(t) for t in plan.times),
        "radii = " + ", ".join(repr(r) for r in plan.radii),
        f"replicas = {plan.replicas}",
        f"seed = {plan.seed}",
        f"normalization = {plan.normalization}",
        f"chaos = {'true' if plan.chaos else 'false'}",
        f"x_half_width = {plan.window_half_width!r}",
        "",
        "[sigma]",
        f"kind = {plan.sigma.kind}",
    ]
    if plan.sigma.kind == "constant":
        lines.append(f"value = {plan.sigma.params[0]!r}")
    elif plan.sigma.kind == "affine_sine":
        lines.append(f"base = {plan.sigma.params[0]!r}")
        lines.append(f"amplitude = {plan.sigma.params[1]!r}")
    elif plan.sigma.kind == "tabulated":
        knots, values = plan.sigma.params
        lines.append("knots = " + ", ".join(repr(k) for k in knots))
        lines.append("values = " + ", ".join(repr(v) for v in values))
    lines += [
        "",
        "[output]",
        f"summary = {rc.summary_path}",
        f"raw = {rc.raw_path}",
        f"threads = {rc.threads}",
        "",
    ]
    return "\n".join(lines)


def _load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _effective_threads(rc: RunConfig, cli_threads: Optional[int]) -> Optional[int]:
    if cli_threads is not None:
        return cli_threads
    if rc.threads > 0:
        return rc.threads
    return None  # run_experiment falls back to FRACWAVE_THREADS, then CPUs


def _json_print(obj, stream=None) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False), file=stream or sys.stdout)


# ---------------------------------------------------------------- oracle


def _oracle_curves(args) -> MomentCurves:
    if args.sigma == "constant":
        return MomentCurves.constant(args.value)
    if args.hurst == 0.5:
        return MomentCurves.linear_white()
    return MomentCurves.linear_mean_only()


def cmd_oracle(args) -> int:
    name = args.quantity
    try:
        if name == "cone":
            if args.hurst == 0.5:
                value = analytic.cone_overlap_white(args.x, args.xi, args.t, args.s)
                method = "closed-form overlap length (white case)"
            else:
                value = analytic.cone_inner_product(args.x, args.xi, args.t, args.s, args.hurst)
                method = "closed-form four-term power combination"
            inputs = {"x": args.x, "xi": args.xi, "t": args.t, "s": args.s, "hurst": args.hurst}
            tol = 0.0
        elif name == "overlap":
            value = analytic.cone_window_overlap_integral(args.a, args.b, args.R)
            inputs = {"a": args.a, "b": args.b, "R": args.R}
            method = "closed-form window-cone overlap integral"
            tol = 0.0
        elif name == "variance":
            curves = _oracle_curves(args)
            value = analytic.asymptotic_variance(args.t, args.hurst, curves)
            inputs = {"t": args.t, "hurst": args.hurst, "sigma": args.sigma, "value": args.value}
            method = "adaptive quadrature of the limit integrand"
            tol = 1e-9
        elif name == "cov":
            curves = _oracle_curves(args)
            value = analytic.cross_covariance(args.ti, args.tj, args.hurst, curves)
            inputs = {"ti": args.ti, "tj": args.tj, "hurst": args.hurst,
                      "sigma": args.sigma, "value": args.value}
            method = "adaptive quadrature of the limit cross integrand"
            tol = 1e-9
        elif name == "chaos1":
            value = analytic.first_chaos_variance(args.t, args.R, args.hurst)
            inputs = {"t": args.t, "R": args.R, "hurst": args.hurst}
            method = ("closed form" if args.hurst == 0.5
                      else "nested quadrature of the window-kernel reduction")
            tol = 0.0 if args.hurst == 0.5 else 1e-8
        elif name == "volterra":
            value = analytic.linear_white_second_moment_volterra(args.t, step=args.step)
            inputs = {"t": args.t, "step": args.step}
            method = "trapezoid marching of the second-moment integral equation"
            tol = 2.0 * args.step**2
        else:  # pragma: no cover - argparse restricts choices
            raise ValueError(f"unknown oracle quantity {name}")
    except ValueError as exc:
        print(f"oracle {name}: {exc}", file=sys.stderr)
        return 2
    _json_print({"inputs": inputs, "value": value, "method": method, "tolerance": tol})
    return 0


# ---------------------------------------------------------------- simulate


def _write_raw_csv(path: str, summary: ExperimentSummary) -> None:
    plan = summary.plan
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("replica_id,t,R,G\n")
        for k, rid in enumerate(summary.replica_ids):
            for it, t in enumerate(plan.times):
                for ir, r in enumerate(plan.radii):
                    g = float(summary.g_samples[k, it, ir])
                    fh.write(f"{int(rid)},{t!r},{r!r},{g!r}\n")


def _human_table(summary: ExperimentSummary) -> str:
    out = io.StringIO()
    plan = summary.plan
    out.write(
        f"plan {summary.plan_digest[:12]}  sigma={plan.sigma.kind}  H={plan.hurst}"
        f"  h={plan.h}  M={plan.replicas}  kappa={summary.kappa}\n"
    )
    out.write(f"{'t':>6} {'R':>7} {'variance':>12} {'oracle var':>12} "
              f"{'KS':>9} {'chaos ratio':>12}\n")
    for (it, ir), ps in sorted(summary.stats.items()):
        try:
            oracle_var = summary.oracle_scale(it, ir) ** 2
            oracle_txt = f"{oracle_var:12.5g}"
        except ValueError:
            oracle_txt = f"{'n/a':>12}"
        ks_txt = f"{ps.ks:9.4f}" if ps.ks is not None else f"{'n/a':>9}"
        cr_txt = f"{ps.chaos_ratio:12.5g}" if ps.chaos_ratio is not None else f"{'n/a':>12}"
        out.write(f"{ps.t:6.3g} {ps.radius:7.3g} {ps.variance:12.5g} "
                  f"{oracle_txt} {ks_txt} {cr_txt}\n")
    out.write(f"wall {summary.wall_seconds:.2f} s\n")
    return out.getvalue()


def cmd_simulate(args) -> int:
    rc = _load_config(args.config)
    summary = run_experiment(rc.plan, threads=_effective_threads(rc, args.threads))
    payload = summary_to_dict(summary, deterministic=args.deterministic)
    blob = json.dumps(payload, indent=2, sort_keys=False)
    out_path = args.out or rc.summary_path
    raw_path = args.raw or rc.raw_path
    if raw_path:
        _write_raw_csv(raw_path, summary)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(blob + "\n")
        print(_human_table(summary), end="")
    else:
        print(blob)
        print(_human_table(summary), end="", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- rate


def _ks_by_radius(summary: ExperimentSummary, i_time: int) -> tuple[np.ndarray, np.ndarray]:
    ks = np.array([summary.stats[(i_time, ir)].ks for ir in range(len(summary.plan.radii))])
    se = np.array([summary.stats[(i_time, ir)].ks_se for ir in range(len(summary.plan.radii))])
    return ks, se


def _ols_slope(logr: np.ndarray, logk: np.ndarray) -> float:
    lr = logr - logr.mean()
    return float(np.dot(lr, logk - logk.mean()) / np.dot(lr, lr))


def _bootstrap_slope_ci(
    summary: ExperimentSummary, i_time: int, n_boot: int = 200, level: float = 0.95
) -> tuple[float, float]:
    """Percentile CI of the log-log slope under replica resampling.

    Resampling is shared across radii (samples are coupled through common
    replicas), seeded from the plan for reproducibility.
    """
    plan = summary.plan
    g = summary.g_samples[:, i_time, :]
    m = g.shape[0]
    logr = np.log(np.asarray(plan.radii))
    rng = np.random.Generator(np.random.Philox(key=np.array([plan.seed, 2**63], dtype=np.uint64)))
    slopes = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, m, size=m)
        resampled = g[idx]
        ks = np.empty(len(plan.radii))
        for ir in range(len(plan.radii)):
            x = resampled[:, ir]
            ks[ir] = ks_normality(x / x.std(ddof=1))
        slopes[b] = _ols_slope(logr, np.log(ks))
    lo, hi = np.quantile(slopes, [(1 - level) / 2, 1 - (1 - level) / 2])
    return float(lo), float(hi)


def cmd_rate(args) -> int:
    rc = _load_config(args.config)
    plan = rc.plan
    if len(plan.radii) < 3:
        raise ConfigError("rate study needs at least 3 radii in the config")
    if plan.replicas < 100:
        raise ConfigError("rate study needs at least 100 replicas for KS distances")
    summary = run_experiment(plan, threads=_effective_threads(rc, args.threads))
    i_time = len(plan.times) - 1
    ks, se = _ks_by_radius(summary, i_time)
    slope = _ols_slope(np.log(np.asarray(plan.radii)), np.log(ks))
    lo, hi = _bootstrap_slope_ci(summary, i_time, n_boot=args.bootstrap)
    lines = ["R,ks,se"]
    for r, k, s in zip(plan.radii, ks, se):
        lines.append(f"{float(r)!r},{float(k)!r},{float(s)!r}")
    lines.append(f"# slope,{slope!r}")
    lines.append(f"# slope_ci_low,{lo!r}")
    lines.append(f"# slope_ci_high,{hi!r}")
    lines.append(f"# t,{plan.times[i_time]!r}")
    lines.append(f"# bootstrap,{args.bootstrap}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


# ---------------------------------------------------------------- funcclt


def cmd_funcclt(args) -> int:
    rc = _load_config(args.config)
    if len(rc.plan.times) < 2:
        raise ConfigError("functional covariance check needs at least 2 times in the config")
    summary = run_experiment(rc.plan, threads=_effective_threads(rc, args.threads))
    report = functional_cov_check(summary)
    payload = {
        "schema": "fracwave.funcclt/1",
        "times": report.times.tolist(),
        "radius": report.radius,
        "hurst": rc.plan.hurst,
        "empirical": report.empirical.tolist(),
        "oracle": report.oracle.tolist(),
        "se": report.se.tolist(),
        "max_se_units": report.max_se_units,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
    else:
        _json_print(payload)
    return 0


# ---------------------------------------------------------------- noise-dump


def cmd_noise_dump(args) -> int:
    try:
        spec = NoiseSpec(
            hurst=args.hurst, dt=args.dt, dx=args.dx,
            n_time=args.n_time, n_space=args.n_space, seed=args.seed,
        )
    except ValueError as exc:
        print(f"noise-dump: {exc}", file=sys.stderr)
        return 2
    sheet = sample_sheet(spec, replica=args.replica)
    write_sheet(sheet, args.out)
    print(f"wrote {args.n_time}x{args.n_space} sheet (H={args.hurst}) to {args.out}")
    return 0


# ---------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracwave", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    po = sub.add_parser("oracle", help="evaluate a closed-form or quadrature oracle")
    so = po.add_subparsers(dest="quantity", required=True)

    p_cone = so.add_parser("cone", help="inner product of two cone indicators")
    for name in ("x", "xi", "t", "s"):
        p_cone.add_argument(f"--{name}", type=float, required=True)
    p_cone.add_argument("--hurst", type=float, required=True)

    p_ov = so.add_parser("overlap", help="window-cone overlap integral")
    p_ov.add_argument("--a", type=float, required=True)
    p_ov.add_argument("--b", type=float, required=True)
    p_ov.add_argument("--R", type=float, required=True)

    p_var = so.add_parser("variance", help="asymptotic variance coefficient")
    p_var.add_argument("--t", type=float, required=True)
    p_var.add_argument("--hurst", type=float, required=True)
    p_var.add_argument("--sigma", choices=("constant", "linear"), default="linear")
    p_var.add_argument("--value", type=float, default=1.0, help="constant sigma level")

    p_cov = so.add_parser("cov", help="asymptotic cross-covariance coefficient")
    p_cov.add_argument("--ti", type=float, required=True)
    p_cov.add_argument("--tj", type=float, required=True)
    p_cov.add_argument("--hurst", type=float, required=True)
    p_cov.add_argument("--sigma", choices=("constant", "linear"), default="linear")
    p_cov.add_argument("--value", type=float, default=1.0)

    p_c1 = so.add_parser("chaos1", help="variance of the first-chaos component")
    p_c1.add_argument("--t", type=float, required=True)
    p_c1.add_argument("--R", type=float, required=True)
    p_c1.add_argument("--hurst", type=float, required=True)

    p_vol = so.add_parser("volterra", help="second moment of the linear-coefficient field")
    p_vol.add_argument("--t", type=float, required=True)
    p_vol.add_argument("--step", type=float, default=1e-3)

    p_sim = sub.add_parser("simulate", help="run the experiment described by a config file")
    p_sim.add_argument("config")
    p_sim.add_argument("--deterministic", action="store_true",
                       help="omit volatile fields (wall time) from the summary JSON")
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--out", default=None, help="summary JSON path (default: stdout)")
    p_sim.add_argument("--raw", default=None, help="raw per-replica CSV path")

    p_rate = sub.add_parser("rate", help="KS distance vs radius with a log-log slope fit")
    p_rate.add_argument("config")
    p_rate.add_argument("--threads", type=int, default=None)
    p_rate.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p_rate.add_argument("--bootstrap", type=int, default=200)

    p_f = sub.add_parser("funcclt", help="empirical vs limit covariance across times")
    p_f.add_argument("config")
    p_f.add_argument("--threads", type=int, default=None)
    p_f.add_argument("--out", default=None, help="JSON path (default: stdout)")

    p_nd = sub.add_parser("noise-dump", help="sample a noise sheet and write the binary format")
    p_nd.add_argument("--hurst", type=float, required=True)
    p_nd.add_argument("--dt", type=float, required=True)
    p_nd.add_argument("--dx", type=float, required=True)
    p_nd.add_argument("--n-time", type=int, required=True)
    p_nd.add_argument("--n-space", type=int, required=True)
    p_nd.add_argument("--seed", type=int, default=0)
    p_nd.add_argument("--replica", type=int, default=0)
    p_nd.add_argument("--out", required=True)
    return p


_COMMANDS = {
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "rate": cmd_rate,
    "funcclt": cmd_funcclt,
    "noise-dump": cmd_noise_dump,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
