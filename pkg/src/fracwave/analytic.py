"""Closed-form and quadrature reference values for spatial averages of the wave field.

Everything here is deterministic: inner products of cone indicators under the
fractional covariance, overlap integrals of the window-cone profile, limit and
pre-limit variances of the centered spatial average, cross covariances between
observation times, the first-chaos variance, and the second-moment curve of the
linear-coefficient white-noise case.  Estimator output is judged against these
values, so each formula either is elementary or carries a quadrature companion
used by the tests.

Conventions: the field starts at 1 with zero initial velocity, the averaging
window is [-radius, radius], and curves bundle s -> E[sigma(u(s,0))] and
s -> E[sigma(u(s,0))^2].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

__all__ = [
    "fractional_kernel_coefficient",
    "cone_inner_product",
    "cone_overlap_white",
    "cone_window_overlap",
    "cone_window_overlap_integral",
    "MomentCurves",
    "linear_white_second_moment",
    "linear_white_second_moment_volterra",
    "asymptotic_variance",
    "prelimit_variance_white",
    "prelimit_variance_white_lower",
    "prelimit_cross_white",
    "cross_covariance",
    "first_chaos_variance",
    "AsymptoticConstants",
    "asymptotic_constants",
]


def fractional_kernel_coefficient(hurst: float) -> float:
    """Coefficient H(2H-1) multiplying |y-z|^{2H-2} in the spatial covariance."""
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    return hurst * (2.0 * hurst - 1.0)


def cone_inner_product(x: float, xi: float, t: float, s: float, hurst: float) -> float:
    """Inner product of two cone-slice indicators under the fractional covariance.

    Closed form for H > 1/2:

        |x-xi-t-s|^{2H} + |x-xi+t+s|^{2H} - |x-xi+t-s|^{2H} - |x-xi-t+s|^{2H}

    equal to twice H(2H-1) times the double integral of |y-z|^{2H-2} over
    [x-t, x+t] x [xi-s, xi+s].  H = 1/2 is a removable limit but a different
    formula; use cone_overlap_white for it.
    """
    if t < 0 or s < 0:
        raise ValueError("cone half-widths t and s must be nonnegative")
    if hurst == 0.5:
        raise ValueError("hurst = 1/2 has no fractional kernel; use cone_overlap_white")
    if not (0.5 < hurst < 1.0):
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    d = x - xi
    two_h = 2.0 * hurst
    return float(
        abs(d - t - s) ** two_h
        + abs(d + t + s) ** two_h
        - abs(d + t - s) ** two_h
        - abs(d - t + s) ** two_h
    )


def cone_overlap_white(x: float, xi: float, t: float, s: float) -> float:
    """White-noise companion of cone_inner_product: twice the overlap length
    of [x-t, x+t] and [xi-s, xi+s]."""
    if t < 0 or s < 0:
        raise ValueError("cone half-widths t and s must be nonnegative")
    return 2.0 * max(0.0, min(x + t, xi + s) - max(x - t, xi - s))


def cone_window_overlap(s: float, y: float, t: float, radius: float) -> float:
    """Half-length of the overlap between the window [-radius, radius] and the
    cone cross-section [y-(t-s), y+(t-s)].

    Vanishes for |y| >= radius + t - s and never exceeds min(radius, t - s).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    a = t - s
    if a < 0:
        return 0.0
    return 0.5 * max(0.0, min(radius, y + a) - max(-radius, y - a))


def cone_window_overlap_integral(a: float, b: float, radius: float) -> float:
    """Integral over y of the product of two overlap profiles with cone
    half-widths a <= b, divided by the window radius.

    Closed form, valid for radius >= 2b:

        2ab - (a*b^2/2 + a^3/6) / radius
    """
    if not (0.0 <= a <= b):
        raise ValueError(f"need 0 <= a <= b, got a={a}, b={b}")
    if radius < 2.0 * b:
        raise ValueError(f"closed form requires radius >= 2b, got radius={radius}, b={b}")
    return 2.0 * a * b - (0.5 * a * b**2 + a**3 / 6.0) / radius


@dataclass
class MomentCurves:
    """Curves s -> E[sigma(u(s,0))] and s -> E[sigma(u(s,0))^2].

    mean_sigma_sq may be None when unavailable (only the fractional-noise
    limit formulas, which consume the mean curve alone, work then).
    Empirical instances carry knots and standard errors.
    """

    mean_sigma: Callable[[float], float]
    mean_sigma_sq: Optional[Callable[[float], float]]
    provenance: str = "analytic"
    knots: Optional[np.ndarray] = None
    mean_sigma_se: Optional[np.ndarray] = None
    mean_sigma_sq_se: Optional[np.ndarray] = None

    def validate(self, t_max: float, n_checks: int = 33) -> None:
        """Cauchy-Schwarz check: second moment dominates squared mean."""
        if self.mean_sigma_sq is None:
            return
        for s in np.linspace(0.0, t_max, n_checks):
            m1 = self.mean_sigma(s)
            m2 = self.mean_sigma_sq(s)
            if m2 < m1 * m1 - 1e-9 * max(1.0, abs(m2)):
                raise ValueError(
                    f"moment curves violate Cauchy-Schwarz at s={s}: "
                    f"mean^2={m1*m1:.6g} > second moment={m2:.6g}"
                )

    @classmethod
    def constant(cls, value: float) -> "MomentCurves":
        return cls(
            mean_sigma=lambda s, v=value: v,
            mean_sigma_sq=lambda s, v=value: v * v,
            provenance="analytic",
        )

    @classmethod
    def linear_white(cls) -> "MomentCurves":
        """sigma(u) = u under white noise: mean 1, second moment cosh(s/sqrt 2)."""
        return cls(
            mean_sigma=lambda s: 1.0,
            mean_sigma_sq=linear_white_second_moment,
            provenance="analytic",
        )

    @classmethod
    def linear_mean_only(cls) -> "MomentCurves":
        """sigma(u) = u for fractional noise: mean is 1 for every H; the second
        moment has no elementary form there and is left out."""
        return cls(mean_sigma=lambda s: 1.0, mean_sigma_sq=None, provenance="analytic")

    @classmethod
    def from_samples(cls, knots, mean_values, sq_values, mean_se=None, sq_se=None) -> "MomentCurves":
        """Piecewise-linear empirical curves on the given time knots."""
        knots = np.asarray(knots, dtype=np.float64)
        mv = np.asarray(mean_values, dtype=np.float64)
        sv = np.asarray(sq_values, dtype=np.float64)
        if not (knots.shape == mv.shape == sv.shape):
            raise ValueError("knots and curve values must have matching shapes")
        return cls(
            mean_sigma=lambda s: np.interp(s, knots, mv),
            mean_sigma_sq=lambda s: np.interp(s, knots, sv),
            provenance="empirical",
            knots=knots,
            mean_sigma_se=None if mean_se is None else np.asarray(mean_se, dtype=np.float64),
            mean_sigma_sq_se=None if sq_se is None else np.asarray(sq_se, dtype=np.float64),
        )


def linear_white_second_moment(t: float) -> float:
    """Second moment of the field at a point for sigma(u) = u, white noise.

    Solves m(t) = 1 + (1/2) * int_0^t (t-s) m(s) ds, hence m'' = m/2 with
    m(0) = 1, m'(0) = 0: cosh(t / sqrt 2).
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = np.cosh(t / np.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def linear_white_second_moment_volterra(t: float, step: float = 1e-3) -> float:
    """Independent route to linear_white_second_moment: trapezoidal marching
    of the integral equation m(t) = 1 + (1/2) int_0^t (t-s) m(s) ds."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0
    n = max(1, int(np.ceil(t / step)))
    dt = t / n
    grid = dt * np.arange(n + 1)
    m = np.ones(n + 1)
    w = np.ones(n + 1)
    w[0] = 0.5  # trapezoid end weight; the s = t_k endpoint weight multiplies 0
    for k in range(1, n + 1):
        kernel = grid[k] - grid[:k]
        m[k] = 1.0 + 0.5 * dt * float(np.dot(w[:k] * kernel, m[:k]))
    return float(m[n])


def _require_second_moment(curves: MomentCurves) -> Callable[[float], float]:
    if curves.mean_sigma_sq is None:
        raise ValueError("these formulas need the second-moment curve, which is missing")
    return curves.mean_sigma_sq


_QUAD_OPTS = dict(epsabs=1e-11, epsrel=1e-10, limit=200)


def asymptotic_variance(t: float, hurst: float, curves: MomentCurves) -> float:
    """Limit of Var(spatial average) over the window, per unit scale.

    H = 1/2:  2 int_0^t (t-s)^2 * E[sigma(u(s,0))^2] ds   (variance / radius)
    H > 1/2:  2^{2H} int_0^t (t-s)^2 * E[sigma(u(s,0))]^2 ds
              (variance / radius^{2H})
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    if t == 0:
        return 0.0
    if hurst == 0.5:
        sq = _require_second_moment(curves)
        val, _ = integrate.quad(lambda s: (t - s) ** 2 * sq(s), 0.0, t, **_QUAD_OPTS)
        return 2.0 * val
    mean = curves.mean_sigma
    val, _ = integrate.quad(lambda s: (t - s) ** 2 * mean(s) ** 2, 0.0, t, **_QUAD_OPTS)
    return 2.0 ** (2.0 * hurst) * val


def prelimit_variance_white(t: float, radius: float, curves: MomentCurves) -> float:
    """Exact variance of the centered spatial average for white noise, radius >= 2t.

    int_0^t E[sigma^2](s) * 2 radius (t-s)^2 (1 - (t-s)/(3 radius)) ds.
    """
    if radius < 2.0 * t:
        raise ValueError(f"exact white-noise variance requires radius >= 2t, got R={radius}, t={t}")
    sq = _require_second_moment(curves)
    val, _ = integrate.quad(
        lambda s: sq(s) * (2.0 * radius * (t - s) ** 2 - (2.0 / 3.0) * (t - s) ** 3),
        0.0,
        t,
        **_QUAD_OPTS,
    )
    return val


def prelimit_variance_white_lower(t: float, radius: float, curves: MomentCurves) -> float:
    """Lower bound (5/3) radius int_0^t (t-s)^2 E[sigma^2](s) ds, radius >= 2t."""
    if radius < 2.0 * t:
        raise ValueError(f"bound requires radius >= 2t, got R={radius}, t={t}")
    sq = _require_second_moment(curves)
    val, _ = integrate.quad(lambda s: (t - s) ** 2 * sq(s), 0.0, t, **_QUAD_OPTS)
    return (5.0 / 3.0) * radius * val


def prelimit_cross_white(ti: float, tj: float, radius: float, curves: MomentCurves) -> float:
    """Exact covariance of the centered averages at two times, white noise,
    radius >= 2 max(ti, tj)."""
    lo, hi = min(ti, tj), max(ti, tj)
    if radius < 2.0 * hi:
        raise ValueError(f"exact white-noise covariance requires radius >= 2 max(t), got R={radius}")
    sq = _require_second_moment(curves)

    def integrand(s):
        a = lo - s
        b = hi - s
        return sq(s) * (2.0 * radius * a * b - (0.5 * a * b**2 + a**3 / 6.0))

    val, _ = integrate.quad(integrand, 0.0, lo, **_QUAD_OPTS)
    return val


def cross_covariance(ti: float, tj: float, hurst: float, curves: MomentCurves) -> float:
    """Limit covariance of the scaled averages at two observation times.

    H = 1/2:  2 int_0^{ti^tj} (ti-s)(tj-s) E[sigma^2](s) ds
    H > 1/2:  2^{2H} int_0^{ti^tj} (ti-s)(tj-s) E[sigma](s)^2 ds
    """
    if ti < 0 or tj < 0:
        raise ValueError("times must be nonnegative")
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    lo = min(ti, tj)
    if lo == 0:
        return 0.0
    if hurst == 0.5:
        sq = _require_second_moment(curves)
        val, _ = integrate.quad(lambda s: (ti - s) * (tj - s) * sq(s), 0.0, lo, **_QUAD_OPTS)
        return 2.0 * val
    mean = curves.mean_sigma
    val, _ = integrate.quad(lambda s: (ti - s) * (tj - s) * mean(s) ** 2, 0.0, lo, **_QUAD_OPTS)
    return 2.0 ** (2.0 * hurst) * val


def first_chaos_variance(t: float, radius: float, hurst: float) -> float:
    """Variance of the first-chaos part of the centered spatial average when
    the coefficient at the initial state is 1 (linear or constant-1 sigma).

    H = 1/2 (radius >= 2t): closed form (2/3) radius t^3 - t^4 / 6.
    H > 1/2: quadrature.  The overlap profile is half the window integral of
    cone-slice indicators, so the singular double integral collapses, via the
    closed-form cone product, to a single smooth integral over the separation
    of the two window points:

        int_0^t (1/8) int_{-2R}^{2R} (2R - |d|) * q(d; t-s) dd ds,

    q(d; a) = |d-2a|^{2H} + |d+2a|^{2H} - 2|d|^{2H}.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    if hurst == 0.5:
        if radius < 2.0 * t:
            raise ValueError(f"closed form requires radius >= 2t, got R={radius}, t={t}")
        return (2.0 / 3.0) * radius * t**3 - t**4 / 6.0

    two_h = 2.0 * hurst
    scale = radius**two_h

    def inner(a: float) -> float:
        if a == 0.0:
            return 0.0

        def g(d):
            q = (
                abs(d - 2.0 * a) ** two_h
                + abs(d + 2.0 * a) ** two_h
                - 2.0 * abs(d) ** two_h
            )
            return (2.0 * radius - d) * q

        pts = [p for p in (2.0 * a,) if 0.0 < p < 2.0 * radius]
        val, _ = integrate.quad(
            g, 0.0, 2.0 * radius, points=pts, epsabs=1e-10 * scale, epsrel=1e-9, limit=200
        )
        return 0.25 * val  # = (1/8) * symmetric integral over [-2R, 2R]

    val, _ = integrate.quad(
        lambda s: inner(t - s), 0.0, t, epsabs=1e-8 * scale, epsrel=1e-8, limit=200
    )
    return val


@dataclass
class AsymptoticConstants:
    """Limit covariance structure of the scaled averages on a time grid."""

    hurst: float
    kernel_coefficient: float
    times: np.ndarray
    covariance: np.ndarray

    def variance(self, i: int) -> float:
        return float(self.covariance[i, i])


def asymptotic_constants(hurst: float, times, curves: MomentCurves) -> AsymptoticConstants:
    """Build the limit covariance matrix on a time grid and check it is
    symmetric positive semidefinite (eigenvalues >= -1e-10 of the largest)."""
    times = np.asarray(times, dtype=np.float64)
    n = times.size
    cov = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            cov[i, j] = cov[j, i] = cross_covariance(times[i], times[j], hurst, curves)
    eig = np.linalg.eigvalsh(cov)
    floor = -1e-10 * max(1.0, float(eig.max(initial=0.0)))
    if eig.min(initial=0.0) < floor:
        raise ValueError(f"limit covariance matrix is not PSD: min eigenvalue {eig.min():.3e}")
    kernel = 0.0 if hurst == 0.5 else fractional_kernel_coefficient(hurst)
    return AsymptoticConstants(
        hurst=hurst, kernel_coefficient=kernel, times=times, covariance=cov
    )
