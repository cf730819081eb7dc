"""Analytic-layer tests.  Every closed form is checked against an independent
quadrature route computed here, plus frozen literal values where a formula has
a memorable exact evaluation."""

import numpy as np
import pytest
from scipy import integrate

from fracwave.analytic import (
    AsymptoticConstants,
    MomentCurves,
    asymptotic_constants,
    asymptotic_variance,
    cone_inner_product,
    cone_overlap_white,
    cone_window_overlap,
    cone_window_overlap_integral,
    cross_covariance,
    first_chaos_variance,
    fractional_kernel_coefficient,
    linear_white_second_moment,
    linear_white_second_moment_volterra,
    prelimit_cross_white,
    prelimit_variance_white,
    prelimit_variance_white_lower,
)


# ------------------------------------------------- cone inner product


def _cone_product_quadrature(x, xi, t, s, hurst):
    """Independent oracle: 2 H(2H-1) int_{x-t}^{x+t} int_{xi-s}^{xi+s}
    |y-z|^{2H-2} dz dy, inner integral in closed antiderivative form."""
    alpha = hurst * (2.0 * hurst - 1.0)
    p = 2.0 * hurst - 1.0

    def signed_pow(v):
        return np.sign(v) * np.abs(v) ** p

    lo, hi = xi - s, xi + s

    def inner(y):
        return (signed_pow(y - lo) - signed_pow(y - hi)) / p

    pts = [q for q in (lo, hi) if x - t < q < x + t] or None
    val, _ = integrate.quad(inner, x - t, x + t, epsabs=1e-13, epsrel=1e-12, points=pts)
    return 2.0 * alpha * val


def test_cone_inner_product_vs_quadrature_randomized():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 50:
        x, xi = rng.uniform(-3, 3, size=2)
        t, s = rng.uniform(0.05, 2.0, size=2)
        hurst = rng.uniform(0.55, 0.95)
        closed = cone_inner_product(x, xi, t, s, hurst)
        oracle = _cone_product_quadrature(x, xi, t, s, hurst)
        scale = max(1.0, abs(oracle))
        assert abs(closed - oracle) / scale < 1e-6, (x, xi, t, s, hurst)
        checked += 1


def test_cone_inner_product_degenerate_and_symmetry():
    # zero half-width on either side kills the product
    assert cone_inner_product(0.4, -1.0, 0.0, 0.7, 0.75) == pytest.approx(0.0, abs=1e-14)
    assert cone_inner_product(0.4, -1.0, 0.7, 0.0, 0.75) == pytest.approx(0.0, abs=1e-14)
    # symmetric in swapping (x,t) with (xi,s)
    a = cone_inner_product(0.3, -0.6, 1.1, 0.4, 0.8)
    b = cone_inner_product(-0.6, 0.3, 0.4, 1.1, 0.8)
    assert a == pytest.approx(b, rel=1e-14)
    # coincident unit cones at H=3/4: 4^{3/4}+4^{3/4}-0-0 over the formula
    val = cone_inner_product(0.0, 0.0, 1.0, 1.0, 0.75)
    assert val == pytest.approx(2.0 * 4.0**0.75, rel=1e-14)


def test_cone_inner_product_validation():
    with pytest.raises(ValueError, match="cone_overlap_white"):
        cone_inner_product(0.0, 0.0, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        cone_inner_product(0.0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        cone_inner_product(0.0, 0.0, -1.0, 1.0, 0.75)


def test_cone_overlap_white_matches_interval_overlap():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x, xi = rng.uniform(-3, 3, size=2)
        t, s = rng.uniform(0.0, 2.0, size=2)
        direct = 2.0 * max(
            0.0, min(x + t, xi + s) - max(x - t, xi - s)
        )
        assert cone_overlap_white(x, xi, t, s) == pytest.approx(direct, abs=0.0)
    # the fractional closed form tends to the white value as H -> 1/2
    near = cone_inner_product(0.2, -0.1, 1.0, 0.6, 0.5 + 1e-9)
    assert near == pytest.approx(cone_overlap_white(0.2, -0.1, 1.0, 0.6), abs=1e-6)


# ------------------------------------------------- window-cone overlap


def test_cone_window_overlap_pointwise():
    # flat region: profile equals the cone half-width when fully inside
    assert cone_window_overlap(0.25, 0.0, 1.0, 4.0) == pytest.approx(0.75)
    # outside the enlarged window it vanishes
    assert cone_window_overlap(0.25, 6.0, 1.0, 4.0) == 0.0
    # at s > t the cross-section is empty
    assert cone_window_overlap(1.5, 0.0, 1.0, 4.0) == 0.0
    # never exceeds min(radius, t-s)
    ys = np.linspace(-8, 8, 400)
    vals = [cone_window_overlap(0.2, y, 1.0, 0.5) for y in ys]
    assert max(vals) <= min(0.5, 0.8) + 1e-15


def test_cone_window_overlap_integral_vs_quadrature():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 50:
        b = rng.uniform(0.1, 2.0)
        a = rng.uniform(0.0, b)
        radius = rng.uniform(2.0 * b, 8.0 * b)
        t = 3.0  # profiles depend on (a, b) through t - s only
        def product(y):
            return (
                cone_window_overlap(t - a, y, t, radius)
                * cone_window_overlap(t - b, y, t, radius)
            )
        span = radius + b
        kinks = sorted(
            q
            for base in (radius - a, radius + a, radius - b, radius + b)
            for q in (base, -base)
            if -span < q < span
        )
        val, _ = integrate.quad(
            product, -span, span, epsabs=1e-13, epsrel=1e-12, limit=500, points=kinks,
        )
        closed = cone_window_overlap_integral(a, b, radius)
        assert closed == pytest.approx(val / radius, abs=1e-9), (a, b, radius)
        checked += 1


def test_cone_window_overlap_integral_frozen_value():
    # a=1, b=2, R=4: 2*1*2 - (1*4/2 + 1/6)/4 = 83/24
    assert cone_window_overlap_integral(1.0, 2.0, 4.0) == pytest.approx(83.0 / 24.0, rel=1e-15)


def test_cone_window_overlap_integral_validation():
    with pytest.raises(ValueError, match="radius >= 2b"):
        cone_window_overlap_integral(1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        cone_window_overlap_integral(2.0, 1.0, 8.0)
    with pytest.raises(ValueError):
        cone_window_overlap_integral(-0.5, 1.0, 8.0)


# ------------------------------------------------- moment curves


def test_moment_curves_cauchy_schwarz_guard():
    good = MomentCurves.linear_white()
    good.validate(3.0)
    bad = MomentCurves(
        mean_sigma=lambda s: 1.0 + s,
        mean_sigma_sq=lambda s: 1.0,
    )
    with pytest.raises(ValueError, match="Cauchy-Schwarz"):
        bad.validate(2.0)


def test_moment_curves_from_samples_interpolates():
    knots = np.array([0.0, 1.0, 2.0])
    curves = MomentCurves.from_samples(knots, [1.0, 2.0, 3.0], [1.0, 4.0, 9.0])
    assert curves.mean_sigma(0.5) == pytest.approx(1.5)
    assert curves.mean_sigma_sq(1.5) == pytest.approx(6.5)
    assert curves.provenance == "empirical"
    with pytest.raises(ValueError):
        MomentCurves.from_samples(knots, [1.0, 2.0], [1.0, 4.0, 9.0])


def test_volterra_route_matches_closed_form():
    # independent dual route: trapezoid marching vs cosh(t/sqrt 2)
    for t in (0.25, 0.5, 1.0, 2.0):
        stepped = linear_white_second_moment_volterra(t, step=1e-3)
        assert stepped == pytest.approx(linear_white_second_moment(t), abs=1e-6)
    assert linear_white_second_moment(1.0) == pytest.approx(1.260592, abs=5e-7)
    assert linear_white_second_moment_volterra(0.0) == 1.0


def test_volterra_step_refinement_second_order():
    coarse = abs(linear_white_second_moment_volterra(1.0, step=4e-3) - linear_white_second_moment(1.0))
    fine = abs(linear_white_second_moment_volterra(1.0, step=1e-3) - linear_white_second_moment(1.0))
    assert fine < coarse / 8.0  # trapezoid: error drops ~16x for a 4x step cut


# ------------------------------------------------- variances


def test_asymptotic_variance_white_constant_sigma():
    # sigma = c: 2 c^2 t^3 / 3, frozen at t=1, c=1: 2/3
    curves = MomentCurves.constant(1.0)
    assert asymptotic_variance(1.0, 0.5, curves) == pytest.approx(2.0 / 3.0, rel=1e-12)
    curves3 = MomentCurves.constant(3.0)
    assert asymptotic_variance(2.0, 0.5, curves3) == pytest.approx(
        2.0 * 9.0 * 8.0 / 3.0, rel=1e-12
    )


def test_asymptotic_variance_white_linear_sigma_frozen():
    # 2 int_0^1 (1-s)^2 cosh(s/sqrt2) ds = 0.683533130...
    val = asymptotic_variance(1.0, 0.5, MomentCurves.linear_white())
    series, _ = integrate.quad(
        lambda s: (1.0 - s) ** 2 * np.cosh(s / np.sqrt(2.0)), 0.0, 1.0, epsabs=1e-13
    )
    assert val == pytest.approx(2.0 * series, rel=1e-12)
    assert val == pytest.approx(0.683533130180856, abs=1e-12)


def test_asymptotic_variance_fractional():
    # sigma mean 1: 2^{2H} t^3/3; H=3/4, t=1: 4^{3/4}/3 = 0.9428090...
    val = asymptotic_variance(1.0, 0.75, MomentCurves.linear_mean_only())
    assert val == pytest.approx(4.0**0.75 / 3.0, rel=1e-12)
    assert val == pytest.approx(0.942809, abs=5e-7)
    # constant curves work too (mean used, not second moment)
    val2 = asymptotic_variance(1.0, 0.9, MomentCurves.constant(2.0))
    assert val2 == pytest.approx(2.0**1.8 * 4.0 / 3.0, rel=1e-12)


def test_asymptotic_variance_validation():
    with pytest.raises(ValueError, match="second-moment"):
        asymptotic_variance(1.0, 0.5, MomentCurves.linear_mean_only())
    assert asymptotic_variance(0.0, 0.75, MomentCurves.constant(1.0)) == 0.0
    with pytest.raises(ValueError):
        asymptotic_variance(-1.0, 0.75, MomentCurves.constant(1.0))
    with pytest.raises(ValueError):
        asymptotic_variance(1.0, 0.4, MomentCurves.constant(1.0))


def test_prelimit_variance_white_exact_polynomial():
    # sigma = 1: int_0^t [2R(t-s)^2 - (2/3)(t-s)^3] ds = 2Rt^3/3 - t^4/6
    curves = MomentCurves.constant(1.0)
    for t, radius in ((1.0, 2.0), (0.5, 4.0), (1.0, 32.0)):
        val = prelimit_variance_white(t, radius, curves)
        assert val == pytest.approx(
            (2.0 / 3.0) * radius * t**3 - t**4 / 6.0, rel=1e-12
        ), (t, radius)
    # frozen: t=1, R=2 gives 7/6
    assert prelimit_variance_white(1.0, 2.0, curves) == pytest.approx(7.0 / 6.0, rel=1e-12)


def test_prelimit_variance_white_vs_overlap_quadrature():
    # independent route: the overlap profile is the kernel-integrated window
    # weight, so Var = int_0^t E[sigma^2](s) int phi(s,y)^2 dy ds
    curves = MomentCurves.linear_white()
    t, radius = 1.0, 4.0

    def layer(s):
        span = radius + (t - s)
        val, _ = integrate.quad(
            lambda y: cone_window_overlap(s, y, t, radius) ** 2,
            -span, span, epsabs=1e-12, limit=300,
        )
        return val * linear_white_second_moment(s)

    oracle, _ = integrate.quad(layer, 0.0, t, epsabs=1e-10, limit=100)
    assert prelimit_variance_white(t, radius, curves) == pytest.approx(oracle, abs=1e-8)


def test_prelimit_variance_bounds_and_limit():
    curves = MomentCurves.linear_white()
    t = 1.0
    limit = asymptotic_variance(t, 0.5, curves)
    prev_gap = None
    for radius in (2.0, 4.0, 8.0, 16.0, 32.0, 64.0):
        exact = prelimit_variance_white(t, radius, curves)
        lower = prelimit_variance_white_lower(t, radius, curves)
        assert lower <= exact + 1e-12
        gap = abs(exact / radius - limit)
        if prev_gap is not None:
            assert gap < prev_gap  # approach is monotone in R
        prev_gap = gap
    assert gap < 0.005  # at R=64 the gap is O(1/R)
    with pytest.raises(ValueError, match="2t"):
        prelimit_variance_white(1.0, 1.5, curves)
    with pytest.raises(ValueError):
        prelimit_variance_white_lower(1.0, 1.0, curves)


# ------------------------------------------------- cross covariances


def test_prelimit_cross_white_consistency():
    curves = MomentCurves.constant(1.0)
    # ti = tj reduces to the variance
    v = prelimit_cross_white(1.0, 1.0, 8.0, curves)
    assert v == pytest.approx(prelimit_variance_white(1.0, 8.0, curves), rel=1e-12)
    # symmetric
    assert prelimit_cross_white(0.5, 1.0, 8.0, curves) == pytest.approx(
        prelimit_cross_white(1.0, 0.5, 8.0, curves), rel=1e-12
    )
    with pytest.raises(ValueError):
        prelimit_cross_white(0.5, 1.0, 1.5, curves)


def test_prelimit_cross_white_vs_overlap_quadrature():
    curves = MomentCurves.constant(1.0)
    ti, tj, radius = 0.5, 1.0, 4.0

    def layer(s):
        span = radius + (tj - s)
        kinks = sorted(
            q
            for w in (radius - (ti - s), radius + (ti - s), radius - (tj - s), radius + (tj - s))
            for q in (w, -w)
            if -span < q < span
        )
        val, _ = integrate.quad(
            lambda y: cone_window_overlap(s, y, ti, radius)
            * cone_window_overlap(s, y, tj, radius),
            -span, span, epsabs=1e-12, limit=300, points=kinks,
        )
        return val

    oracle, _ = integrate.quad(layer, 0.0, ti, epsabs=1e-10, limit=100)
    assert prelimit_cross_white(ti, tj, radius, curves) == pytest.approx(oracle, abs=1e-8)


def test_cross_covariance_frozen_values():
    curves = MomentCurves.constant(1.0)
    # 2 int_0^{1/2} (1/2 - s)(1 - s) ds = 5/24
    val = cross_covariance(0.5, 1.0, 0.5, curves)
    poly, _ = integrate.quad(lambda s: (0.5 - s) * (1.0 - s), 0.0, 0.5, epsabs=1e-14)
    assert val == pytest.approx(2.0 * poly, rel=1e-12)
    assert val == pytest.approx(5.0 / 24.0, rel=1e-12)
    # fractional analog: 2^{2H} times the same polynomial; H=3/4 -> 2^{1.5}*5/48
    frac = cross_covariance(0.5, 1.0, 0.75, MomentCurves.linear_mean_only())
    assert frac == pytest.approx(2.0**1.5 * 5.0 / 48.0, rel=1e-12)
    assert frac == pytest.approx(0.294628, abs=5e-7)
    # zero time gives zero covariance
    assert cross_covariance(0.0, 1.0, 0.75, curves) == 0.0


def test_cross_covariance_diag_matches_variance():
    curves = MomentCurves.linear_white()
    assert cross_covariance(1.0, 1.0, 0.5, curves) == pytest.approx(
        asymptotic_variance(1.0, 0.5, curves), rel=1e-10
    )
    frac_curves = MomentCurves.linear_mean_only()
    assert cross_covariance(0.7, 0.7, 0.8, frac_curves) == pytest.approx(
        asymptotic_variance(0.7, 0.8, frac_curves), rel=1e-10
    )


def test_asymptotic_constants_psd_and_consistency():
    curves = MomentCurves.linear_white()
    times = [0.25, 0.5, 1.0]
    cons = asymptotic_constants(0.5, times, curves)
    assert isinstance(cons, AsymptoticConstants)
    assert cons.covariance.shape == (3, 3)
    assert np.allclose(cons.covariance, cons.covariance.T)
    assert np.linalg.eigvalsh(cons.covariance).min() > -1e-12
    assert cons.variance(2) == pytest.approx(asymptotic_variance(1.0, 0.5, curves), rel=1e-10)
    assert cons.kernel_coefficient == 0.0
    frac = asymptotic_constants(0.75, times, MomentCurves.linear_mean_only())
    assert frac.kernel_coefficient == pytest.approx(0.75 * 0.5)


# ------------------------------------------------- first chaos


def test_first_chaos_white_closed_form():
    # (2/3) R t^3 - t^4/6; frozen t=1, R=2: 7/6
    assert first_chaos_variance(1.0, 2.0, 0.5) == pytest.approx(7.0 / 6.0, rel=1e-15)
    assert first_chaos_variance(0.5, 1.0, 0.5) == pytest.approx(
        (2.0 / 3.0) * 1.0 * 0.125 - 0.0625 / 6.0, rel=1e-15
    )
    with pytest.raises(ValueError, match="2t"):
        first_chaos_variance(1.0, 1.0, 0.5)


def test_first_chaos_white_equals_constant_sigma_variance():
    # for sigma = 1 the average is purely first-chaos, so the variance routes agree
    curves = MomentCurves.constant(1.0)
    for t, radius in ((1.0, 2.0), (0.5, 8.0)):
        assert first_chaos_variance(t, radius, 0.5) == pytest.approx(
            prelimit_variance_white(t, radius, curves), rel=1e-12
        )


def test_first_chaos_fractional_vs_brute_quadrature():
    # small case, brute double integral over the window of the cone product
    t, radius, hurst = 0.5, 1.0, 0.75

    def layer(s):
        a = t - s

        def outer(y1):
            val, _ = integrate.quad(
                lambda y2: cone_inner_product(y1, y2, a, a, hurst),
                -radius, radius, epsabs=1e-11, epsrel=1e-10, limit=200,
                points=[p for p in (y1 - 2 * a, y1 + 2 * a) if -radius < p < radius] or None,
            )
            return val

        val, _ = integrate.quad(outer, -radius, radius, epsabs=1e-9, limit=100)
        return val

    brute, _ = integrate.quad(layer, 0.0, t, epsabs=1e-7, limit=60)
    # 1/4 from the squared wave kernel, 1/2 because the cone product function
    # is twice the kernel-pair integral
    brute *= 0.125
    fast = first_chaos_variance(t, radius, hurst)
    assert fast == pytest.approx(brute, rel=1e-5)


def test_first_chaos_fractional_scaling_trend():
    # v/R^{2H} increases toward 4^H t^3/3 as R grows
    hurst, t = 0.75, 1.0
    limit = 4.0**hurst / 3.0
    scaled = [
        first_chaos_variance(t, radius, hurst) / radius ** (2 * hurst)
        for radius in (8.0, 16.0, 32.0, 64.0)
    ]
    assert all(b > a for a, b in zip(scaled, scaled[1:]))
    assert all(s < limit for s in scaled)
    assert scaled[-1] == pytest.approx(limit, rel=2e-3)
    # frozen mid-grid value, R=32
    assert scaled[2] == pytest.approx(0.942050, abs=5e-6)


def test_first_chaos_hurst_continuity_at_half():
    # H -> 1/2 limit of the fractional quadrature recovers the white closed form
    val = first_chaos_variance(1.0, 4.0, 0.5 + 1e-7)
    assert val == pytest.approx(first_chaos_variance(1.0, 4.0, 0.5), rel=1e-4)


def test_fractional_kernel_coefficient():
    assert fractional_kernel_coefficient(0.5) == 0.0
    assert fractional_kernel_coefficient(0.75) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        fractional_kernel_coefficient(0.4)
