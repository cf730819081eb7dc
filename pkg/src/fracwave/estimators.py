"""Monte Carlo estimation of spatial-average statistics, with merge-safe replicas.

A plan fixes the lattice, the coefficient, observation times and window radii,
the replica count and the base seed.  Replicas are pure functions of
(plan, replica id): chunks of replicas can run in any order or in parallel and
merge into the same summary, byte for byte, because all reductions happen in
canonical replica order after the merge.

The summary carries raw per-replica samples of the centered spatial average
and its first-chaos projection, per-pair statistics (variance, normality
distance, chaos decomposition) with delete-group jackknife standard errors,
and empirical moment curves read off the window center.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from . import analytic
from .analytic import MomentCurves
from .noise import NoiseSpec, NoiseSheet, sample_sheet
from .solver import LatticeConfig, SigmaSpec, SolutionField, calibrate_kernel, solve

__all__ = [
    "ExperimentPlan",
    "ChunkResult",
    "ExperimentSummary",
    "PairStats",
    "spatial_average",
    "chaos_projection",
    "first_chaos_weights",
    "ks_normality",
    "ks_critical",
    "run_replica_chunk",
    "merge_chunks",
    "summarize",
    "run_experiment",
    "functional_cov_check",
    "FunctionalCovReport",
    "tightness_moment",
    "plan_to_dict",
    "plan_hash",
    "summary_to_dict",
    "resolve_threads",
]

_CHUNK = 256
_JACK_GROUPS = 100
_KS_MIN_N = 100


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything that determines the law and the estimators of one experiment."""

    hurst: float
    sigma: SigmaSpec
    h: float
    times: tuple[float, ...]
    radii: tuple[float, ...]
    replicas: int
    seed: int
    normalization: str = "self"
    chaos: bool = True
    x_half_width: Optional[float] = None

    def __post_init__(self):
        if not (0.5 <= self.hurst < 1.0):
            raise ValueError(f"hurst must lie in [1/2, 1), got {self.hurst}")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if not self.times or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be a nonempty strictly increasing tuple")
        if not self.radii or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be a nonempty strictly increasing tuple")
        for t in self.times:
            n = t / self.h
            if t <= 0 or abs(n - round(n)) > 1e-9:
                raise ValueError(f"time {t} is not a positive multiple of h={self.h}")
        for r in self.radii:
            n = r / self.h
            if r <= 0 or abs(n - round(n)) > 1e-9:
                raise ValueError(f"radius {r} is not a positive multiple of h={self.h}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.normalization not in ("self", "paper"):
            raise ValueError(f"normalization must be 'self' or 'paper', got {self.normalization!r}")
        needed = max(self.radii) + max(self.times)
        if self.x_half_width is None:
            object.__setattr__(self, "x_half_width", needed)
        elif self.x_half_width < needed - 1e-9:
            raise ValueError(
                f"x_half_width={self.x_half_width} too small: domain of dependence "
                f"needs at least max radius + max time = {needed}"
            )
        n = self.x_half_width / self.h
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"x_half_width {self.x_half_width} is not a multiple of h={self.h}")

    @property
    def window_half_width(self) -> float:
        return self.x_half_width

    def lattice(self) -> LatticeConfig:
        return LatticeConfig(h=self.h, t_max=max(self.times), x_half_width=self.window_half_width)

    def noise_spec(self) -> NoiseSpec:
        cfg = self.lattice()
        return NoiseSpec(
            hurst=self.hurst,
            dt=self.h,
            dx=self.h,
            n_time=cfg.n_steps,
            n_space=cfg.n_cells,
            seed=self.seed,
        )


def plan_to_dict(plan: ExperimentPlan) -> dict:
    return {
        "hurst": plan.hurst,
        "sigma": {"kind": plan.sigma.kind, "params": list(_flatten_params(plan.sigma))},
        "h": plan.h,
        "times": list(plan.times),
        "radii": list(plan.radii),
        "replicas": plan.replicas,
        "seed": plan.seed,
        "normalization": plan.normalization,
        "chaos": plan.chaos,
        "x_half_width": plan.window_half_width,
    }


def _flatten_params(sigma: SigmaSpec):
    if sigma.kind == "tabulated":
        knots, values = sigma.params
        return [list(knots), list(values)]
    return list(sigma.params)


def plan_hash(plan: ExperimentPlan) -> str:
    blob = json.dumps(plan_to_dict(plan), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def spatial_average(fld: SolutionField, t: float, radius: float) -> float:
    """Trapezoid integral of u(t, .) - 1 over [-radius, radius].

    End nodes carry half weight.  Raises if any needed node is outside the
    validity cone at that time level.
    """
    cfg = fld.config
    n = cfg.time_index(t)
    rn = int(round(radius / cfg.h))
    if abs(radius / cfg.h - rn) > 1e-9 or rn < 1:
        raise ValueError(f"radius {radius} is not a positive multiple of h={cfg.h}")
    j0 = cfg.center_index
    lo, hi = j0 - rn, j0 + rn
    vlo, vhi = fld.valid_bounds(n)
    if lo < vlo or hi > vhi:
        raise ValueError(
            f"window radius {radius} at t={t} leaves the validity cone; "
            f"grow x_half_width to at least radius + t"
        )
    row = fld.values[n, lo: hi + 1] - 1.0
    return float(cfg.h * (row.sum() - 0.5 * (row[0] + row[-1])))


def first_chaos_weights(cfg: LatticeConfig, t: float, radius: float, kappa: float) -> np.ndarray:
    """Cell weights of the first-chaos projection of the scheme's spatial average.

    Shape (time_index(t), n_cells).  Row m holds, for each cell, kappa * h *
    (trapezoid measure of the window nodes the cell reaches), the exact linear
    map the scheme applies to the noise when sigma is constant 1.
    """
    n_t = cfg.time_index(t)
    rn = int(round(radius / cfg.h))
    if abs(radius / cfg.h - rn) > 1e-9 or rn < 1:
        raise ValueError(f"radius {radius} is not a positive multiple of h={cfg.h}")
    j0 = cfg.center_index
    left, right = j0 - rn, j0 + rn  # window node-index ends
    if n_t + rn > j0:
        raise ValueError("window plus horizon exceeds the lattice half width")
    c = np.arange(cfg.n_cells)
    weights = np.zeros((n_t, cfg.n_cells))
    for m in range(n_t):
        q = n_t - 1 - m  # propagation depth from row m to the observation level
        a = np.maximum(left, c - q)
        b = np.minimum(right, c + 1 + q)
        count = np.clip(b - a + 1, 0, None).astype(np.float64)
        hit_l = ((c - q <= left) & (left <= c + 1 + q)).astype(np.float64)
        hit_r = ((c - q <= right) & (right <= c + 1 + q)).astype(np.float64)
        g = np.where(count > 0, count - 0.5 * (hit_l + hit_r), 0.0)
        weights[m] = kappa * cfg.h * g
    return weights


def chaos_projection(fld: SolutionField, sheet: NoiseSheet, t: float, radius: float) -> float:
    """Sample of the first-chaos component: sum of weights times cell masses.

    For constant sigma = 1 this reproduces the spatial average of u - 1 up to
    float roundoff; for linear sigma its covariance with the spatial average
    equals its own variance.
    """
    w = first_chaos_weights(fld.config, t, radius, fld.kappa)
    return float(np.vdot(w, sheet.masses[: w.shape[0]]))


def ks_normality(samples: Sequence[float]) -> float:
    """Kolmogorov-Smirnov distance of the sample to the standard normal law.

    sup_i max(i/n - Phi(x_(i)), Phi(x_(i)) - (i-1)/n) over the sorted sample.
    Requires at least 100 samples; the caller normalizes beforehand.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < _KS_MIN_N:
        raise ValueError(f"KS distance needs at least {_KS_MIN_N} samples, got {n}")
    cdf = ndtr(x)
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(np.maximum(i / n - cdf, cdf - (i - 1.0) / n).max())


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Classical large-sample KS critical value sqrt(-ln(alpha/2)/2) / sqrt(n)."""
    if n < 1 or not (0 < alpha < 1):
        raise ValueError("need n >= 1 and 0 < alpha < 1")
    return float(np.sqrt(-0.5 * np.log(alpha / 2.0)) / np.sqrt(n))


@dataclass
class ChunkResult:
    """Raw per-replica output for a set of replica ids (any order)."""

    replica_ids: np.ndarray
    g: np.ndarray  # (n_ids, n_times, n_radii)
    i1: Optional[np.ndarray]  # same shape, or None when chaos is off
    sigma_center: np.ndarray  # (n_ids, n_steps + 1): sigma(u) at the window center


def run_replica_chunk(plan: ExperimentPlan, replica_ids: Sequence[int]) -> ChunkResult:
    """Solve and reduce the given replicas.  Pure in (plan, ids)."""
    ids = np.asarray(list(replica_ids), dtype=np.int64)
    cfg = plan.lattice()
    spec = plan.noise_spec()
    kappa = calibrate_kernel(plan.h, plan.hurst)
    n_t, n_r = len(plan.times), len(plan.radii)
    levels = [cfg.time_index(t) for t in plan.times]
    j0 = cfg.center_index
    rns = [int(round(r / plan.h)) for r in plan.radii]

    weight_stacks = None
    if plan.chaos:
        weight_stacks = []
        for t in plan.times:
            mats = [first_chaos_weights(cfg, t, r, kappa).ravel() for r in plan.radii]
            weight_stacks.append(np.stack(mats))

    g = np.empty((ids.size, n_t, n_r))
    i1 = np.empty((ids.size, n_t, n_r)) if plan.chaos else None
    sig_c = np.empty((ids.size, cfg.n_steps + 1))

    for k, rid in enumerate(ids):
        sheet = sample_sheet(spec, replica=int(rid))
        fld = solve(cfg, sheet, plan.sigma, kappa=kappa)
        for it, lvl in enumerate(levels):
            row = fld.values[lvl] - 1.0
            for ir, rn in enumerate(rns):
                seg = row[j0 - rn: j0 + rn + 1]
                g[k, it, ir] = cfg.h * (seg.sum() - 0.5 * (seg[0] + seg[-1]))
            if plan.chaos:
                flat = sheet.masses[:lvl].ravel()
                i1[k, it, :] = weight_stacks[it][:, : flat.size] @ flat
        sig_c[k] = plan.sigma(fld.values[:, j0])
    return ChunkResult(replica_ids=ids, g=g, i1=i1, sigma_center=sig_c)


def merge_chunks(a: ChunkResult, b: ChunkResult) -> ChunkResult:
    """Associative, commutative merge; summarize() re-sorts to canonical order."""
    both = np.concatenate([a.replica_ids, b.replica_ids])
    if np.unique(both).size != both.size:
        raise ValueError("merge would duplicate replica ids")
    i1 = None
    if (a.i1 is None) != (b.i1 is None):
        raise ValueError("cannot merge chunks with and without chaos samples")
    if a.i1 is not None:
        i1 = np.concatenate([a.i1, b.i1])
    return ChunkResult(
        replica_ids=both,
        g=np.concatenate([a.g, b.g]),
        i1=i1,
        sigma_center=np.concatenate([a.sigma_center, b.sigma_center]),
    )


def _group_bounds(n: int, n_groups: int) -> np.ndarray:
    g = min(n_groups, n)
    return np.linspace(0, n, g + 1).astype(np.int64)


def _sample_variance(x: np.ndarray) -> float:
    # NaN flags the undefined single-replica case rather than faking a zero
    return float(np.var(x, ddof=1)) if x.size > 1 else float("nan")


def _jackknife_se(values: np.ndarray) -> float:
    g = values.size
    if g < 2:
        return 0.0
    return float(np.sqrt((g - 1.0) / g * np.sum((values - values.mean()) ** 2)))


def _variance_jackknife(x: np.ndarray, n_groups: int = _JACK_GROUPS) -> float:
    """Delete-group jackknife SE of the sample variance, via group sums."""
    n = x.size
    bounds = _group_bounds(n, n_groups)
    g = bounds.size - 1
    if g < 2:
        return 0.0
    reps = np.empty(g)
    s1, s2 = x.sum(), np.dot(x, x)
    for i in range(g):
        seg = x[bounds[i]: bounds[i + 1]]
        ns = n - seg.size
        r1, r2 = s1 - seg.sum(), s2 - np.dot(seg, seg)
        reps[i] = (r2 - r1 * r1 / ns) / (ns - 1)
    return _jackknife_se(reps)


def _stat_jackknife(x: np.ndarray, stat, n_groups: int = _JACK_GROUPS) -> float:
    """Delete-group jackknife SE of an arbitrary statistic (used for KS)."""
    n = x.size
    bounds = _group_bounds(n, n_groups)
    g = bounds.size - 1
    if g < 2:
        return 0.0
    reps = np.empty(g)
    for i in range(g):
        reps[i] = stat(np.concatenate([x[: bounds[i]], x[bounds[i + 1]:]]))
    return _jackknife_se(reps)


def _ratio_jackknife(num: np.ndarray, den: np.ndarray, n_groups: int = _JACK_GROUPS) -> float:
    """Delete-group jackknife SE of Var(num)/Var(den), via group sums."""
    n = num.size
    bounds = _group_bounds(n, n_groups)
    g = bounds.size - 1
    if g < 2:
        return 0.0
    reps = np.empty(g)
    a1, a2 = num.sum(), np.dot(num, num)
    b1, b2 = den.sum(), np.dot(den, den)
    for i in range(g):
        sn = num[bounds[i]: bounds[i + 1]]
        sd = den[bounds[i]: bounds[i + 1]]
        ns = n - sn.size
        va = (a2 - np.dot(sn, sn) - (a1 - sn.sum()) ** 2 / ns) / (ns - 1)
        vb = (b2 - np.dot(sd, sd) - (b1 - sd.sum()) ** 2 / ns) / (ns - 1)
        reps[i] = va / vb
    return _jackknife_se(reps)


def _cov_jackknife(x: np.ndarray, y: np.ndarray, n_groups: int = _JACK_GROUPS) -> float:
    """Delete-group jackknife SE of the sample covariance."""
    n = x.size
    bounds = _group_bounds(n, n_groups)
    g = bounds.size - 1
    if g < 2:
        return 0.0
    reps = np.empty(g)
    sx, sy, sxy = x.sum(), y.sum(), np.dot(x, y)
    for i in range(g):
        gx = x[bounds[i]: bounds[i + 1]]
        gy = y[bounds[i]: bounds[i + 1]]
        ns = n - gx.size
        rx, ry, rxy = sx - gx.sum(), sy - gy.sum(), sxy - np.dot(gx, gy)
        reps[i] = (rxy - rx * ry / ns) / (ns - 1)
    return _jackknife_se(reps)


@dataclass
class PairStats:
    """Statistics for one (time, radius) pair."""

    t: float
    radius: float
    n: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    scale: float  # normalization used for the KS samples
    ks: Optional[float]
    ks_se: Optional[float]
    chaos_cov: Optional[float] = None
    chaos_cov_se: Optional[float] = None
    chaos_var: Optional[float] = None
    chaos_ratio: Optional[float] = None
    chaos_ratio_se: Optional[float] = None


@dataclass
class ExperimentSummary:
    plan: ExperimentPlan
    kappa: float
    plan_digest: str
    wall_seconds: float
    replica_ids: np.ndarray = field(repr=False)
    g_samples: np.ndarray = field(repr=False)  # (M, n_times, n_radii), canonical order
    i1_samples: Optional[np.ndarray] = field(repr=False, default=None)
    curve_times: np.ndarray = field(repr=False, default=None)
    curve_mean: np.ndarray = field(repr=False, default=None)
    curve_sq: np.ndarray = field(repr=False, default=None)
    curve_mean_se: np.ndarray = field(repr=False, default=None)
    curve_sq_se: np.ndarray = field(repr=False, default=None)
    stats: dict = field(default_factory=dict)  # (i_time, i_radius) -> PairStats

    def samples(self, i_time: int, i_radius: int) -> np.ndarray:
        return self.g_samples[:, i_time, i_radius]

    def chaos_samples(self, i_time: int, i_radius: int) -> np.ndarray:
        if self.i1_samples is None:
            raise ValueError("plan ran without chaos projections")
        return self.i1_samples[:, i_time, i_radius]

    def empirical_curves(self) -> MomentCurves:
        return MomentCurves.from_samples(
            self.curve_times,
            self.curve_mean,
            self.curve_sq,
            mean_se=self.curve_mean_se,
            sq_se=self.curve_sq_se,
        )

    def oracle_curves(self) -> MomentCurves:
        """Analytic curves when the coefficient admits them, else empirical."""
        sig = self.plan.sigma
        if sig.kind == "constant":
            return MomentCurves.constant(sig.params[0])
        if sig.kind == "linear":
            if self.plan.hurst == 0.5:
                return MomentCurves.linear_white()
            return MomentCurves.linear_mean_only()
        return self.empirical_curves()

    def oracle_scale(self, i_time: int, i_radius: int) -> float:
        """Oracle standard deviation of the spatial average at a pair."""
        t, r = self.plan.times[i_time], self.plan.radii[i_radius]
        curves = self.oracle_curves()
        if self.plan.hurst == 0.5 and r >= 2.0 * t:
            return float(np.sqrt(analytic.prelimit_variance_white(t, r, curves)))
        return float(
            np.sqrt(r ** (2.0 * self.plan.hurst) * analytic.asymptotic_variance(t, self.plan.hurst, curves))
        )


def summarize(plan: ExperimentPlan, merged: ChunkResult, kappa: float, wall_seconds: float) -> ExperimentSummary:
    """Build the summary from merged chunks.  All reductions run in canonical
    (sorted replica id) order, so the result is chunking-independent."""
    order = np.argsort(merged.replica_ids, kind="stable")
    ids = merged.replica_ids[order]
    if ids.size != plan.replicas or not np.array_equal(ids, np.arange(plan.replicas)):
        raise ValueError("merged chunks do not cover replicas 0..M-1 exactly once")
    g = np.ascontiguousarray(merged.g[order])
    i1 = None if merged.i1 is None else np.ascontiguousarray(merged.i1[order])
    sig_c = merged.sigma_center[order]

    m = ids.size
    curve_mean = sig_c.mean(axis=0)
    curve_sq = (sig_c**2).mean(axis=0)
    curve_mean_se = sig_c.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.zeros_like(curve_mean)
    curve_sq_se = (sig_c**2).std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.zeros_like(curve_sq)

    cfg = plan.lattice()
    summary = ExperimentSummary(
        plan=plan,
        kappa=kappa,
        plan_digest=plan_hash(plan),
        wall_seconds=wall_seconds,
        replica_ids=ids,
        g_samples=g,
        i1_samples=i1,
        curve_times=cfg.h * np.arange(cfg.n_steps + 1),
        curve_mean=curve_mean,
        curve_sq=curve_sq,
        curve_mean_se=curve_mean_se,
        curve_sq_se=curve_sq_se,
    )

    for it, t in enumerate(plan.times):
        for ir, r in enumerate(plan.radii):
            x = g[:, it, ir]
            mean = float(x.mean())
            mean_se = float(x.std(ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
            var = _sample_variance(x)
            var_se = _variance_jackknife(x) if m > 1 else float("nan")
            if plan.normalization == "self":
                scale = float(x.std(ddof=1)) if m > 1 else 1.0
            else:
                scale = summary.oracle_scale(it, ir)
            ks = ks_se = None
            if m >= _KS_MIN_N and scale > 0:
                normalized = x / scale
                ks = ks_normality(normalized)
                if plan.normalization == "self":
                    ks_se = _stat_jackknife(x, lambda s: ks_normality(s / s.std(ddof=1)))
                else:
                    ks_se = _stat_jackknife(normalized, ks_normality)
            ps = PairStats(
                t=t, radius=r, n=m, mean=mean, mean_se=mean_se,
                variance=var, variance_se=var_se, scale=scale, ks=ks, ks_se=ks_se,
            )
            if i1 is not None:
                y = i1[:, it, ir]
                ps.chaos_var = _sample_variance(y)
                cov = float(np.cov(x, y, ddof=1)[0, 1]) if m > 1 else float("nan")
                ps.chaos_cov = cov
                ps.chaos_cov_se = _cov_jackknife(x, y)
                if var > 0:
                    ps.chaos_ratio = ps.chaos_var / var
                    ps.chaos_ratio_se = _ratio_jackknife(y, x)
            summary.stats[(it, ir)] = ps
    return summary


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit argument, else FRACWAVE_THREADS, else one per CPU."""
    if threads is not None and threads > 0:
        return threads
    env = os.environ.get("FRACWAVE_THREADS", "").strip()
    if env:
        try:
            val = int(env)
        except ValueError as exc:
            raise ValueError(f"FRACWAVE_THREADS must be an integer, got {env!r}") from exc
        if val > 0:
            return val
    return os.cpu_count() or 1


def _chunk_star(args):
    return run_replica_chunk(*args)


def run_experiment(plan: ExperimentPlan, threads: Optional[int] = None) -> ExperimentSummary:
    """Run all replicas (chunked, optionally in parallel) and summarize.

    The summary is a pure function of the plan: worker count and chunk
    boundaries do not change a single byte of it.
    """
    start = time.perf_counter()
    kappa = calibrate_kernel(plan.h, plan.hurst)
    ids = np.arange(plan.replicas)
    chunks = [ids[i: i + _CHUNK] for i in range(0, plan.replicas, _CHUNK)]
    workers = resolve_threads(threads)
    if workers > 1 and len(chunks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_star, [(plan, c) for c in chunks]))
    else:
        results = [run_replica_chunk(plan, c) for c in chunks]
    merged = results[0]
    for r in results[1:]:
        merged = merge_chunks(merged, r)
    return summarize(plan, merged, kappa, time.perf_counter() - start)


@dataclass
class FunctionalCovReport:
    """Empirical vs limit covariance of the scaled averages on the time grid."""

    times: np.ndarray
    radius: float
    empirical: np.ndarray
    oracle: np.ndarray
    se: np.ndarray

    @property
    def discrepancy(self) -> np.ndarray:
        return self.empirical - self.oracle

    @property
    def max_se_units(self) -> float:
        safe = np.where(self.se > 0, self.se, np.inf)
        return float(np.abs(self.discrepancy / safe).max())


def functional_cov_check(summary: ExperimentSummary, i_radius: Optional[int] = None) -> FunctionalCovReport:
    """Compare the empirical covariance matrix of radius^{-H} G(t_i) against
    the limit matrix, entry by entry, with jackknife SEs."""
    plan = summary.plan
    if len(plan.times) < 2:
        raise ValueError("functional covariance check needs at least two observation times")
    if i_radius is None:
        i_radius = len(plan.radii) - 1
    r = plan.radii[i_radius]
    scaled = summary.g_samples[:, :, i_radius] / r**plan.hurst
    n_t = len(plan.times)
    emp = np.cov(scaled.T, ddof=1)
    emp = np.atleast_2d(emp)
    se = np.zeros((n_t, n_t))
    for i in range(n_t):
        for j in range(i, n_t):
            if i == j:
                se[i, i] = _variance_jackknife(scaled[:, i])
            else:
                se[i, j] = se[j, i] = _cov_jackknife(scaled[:, i], scaled[:, j])
    oracle = analytic.asymptotic_constants(
        plan.hurst, np.asarray(plan.times), summary.oracle_curves()
    ).covariance
    return FunctionalCovReport(
        times=np.asarray(plan.times), radius=r, empirical=emp, oracle=oracle, se=se
    )


def tightness_moment(summary: ExperimentSummary, p: float, s: float, t: float, radius: Optional[float] = None) -> dict:
    """p-th absolute moment of the increment G(t) - G(s), with the scaling
    reference radius^{pH} |t - s|^p.  s and t must be observation times of the
    plan; equal times give a zero moment.  Defaults to the largest radius."""
    if p <= 0:
        raise ValueError("p must be positive")
    plan = summary.plan
    if radius is None:
        radius = plan.radii[-1]
    try:
        i_time = plan.times.index(s)
        j_time = plan.times.index(t)
        i_radius = plan.radii.index(radius)
    except ValueError as exc:
        raise ValueError(f"(s={s}, t={t}, radius={radius}) not on the plan grid") from exc
    inc = summary.g_samples[:, j_time, i_radius] - summary.g_samples[:, i_time, i_radius]
    amp = np.abs(inc) ** p
    moment = float(amp.mean())
    se = float(amp.std(ddof=1) / np.sqrt(amp.size)) if amp.size > 1 else float("nan")
    reference = radius ** (p * plan.hurst) * abs(t - s) ** p
    return {
        "p": p,
        "t_low": s,
        "t_high": t,
        "radius": radius,
        "moment": moment,
        "moment_se": se,
        "reference": reference,
        "ratio": moment / reference if reference > 0 else None,
    }


def summary_to_dict(summary: ExperimentSummary, deterministic: bool = False) -> dict:
    """JSON-ready view of a summary.  Raw samples stay out (CSV export covers
    them); with deterministic=True the volatile fields (wall time) are omitted
    so identical plans produce identical bytes."""
    rows = []
    for (it, ir), ps in sorted(summary.stats.items()):
        rows.append(
            {
                "t_index": it,
                "r_index": ir,
                "t": ps.t,
                "radius": ps.radius,
                "n": ps.n,
                "mean": ps.mean,
                "mean_se": ps.mean_se,
                "variance": ps.variance,
                "variance_se": ps.variance_se,
                "scale": ps.scale,
                "ks": ps.ks,
                "ks_se": ps.ks_se,
                "chaos_cov": ps.chaos_cov,
                "chaos_cov_se": ps.chaos_cov_se,
                "chaos_var": ps.chaos_var,
                "chaos_ratio": ps.chaos_ratio,
                "chaos_ratio_se": ps.chaos_ratio_se,
            }
        )
    time_cov = []
    if len(summary.plan.times) >= 2 and summary.plan.replicas >= 2:
        for ir, r in enumerate(summary.plan.radii):
            mat = np.atleast_2d(np.cov(summary.g_samples[:, :, ir].T, ddof=1))
            time_cov.append({"r_index": ir, "radius": r, "matrix": mat.tolist()})
    out = {
        "schema": "fracwave.summary/1",
        "plan": plan_to_dict(summary.plan),
        "plan_hash": summary.plan_digest,
        "kappa": summary.kappa,
        "pairs": rows,
        "time_covariance": time_cov,
        "curves": {
            "times": summary.curve_times.tolist(),
            "mean_sigma": summary.curve_mean.tolist(),
            "mean_sigma_sq": summary.curve_sq.tolist(),
            "mean_sigma_se": summary.curve_mean_se.tolist(),
            "mean_sigma_sq_se": summary.curve_sq_se.tolist(),
        },
    }
    if not deterministic:
        out["wall_seconds"] = summary.wall_seconds
    return out
