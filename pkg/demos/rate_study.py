"""
How fast the averages become Gaussian
=====================================

The self-normalized windowed averages approach the unit Gaussian as the
window grows.  Measuring the speed is subtle: the KS statistic computed
from M replicas has a sampling floor near 0.87/sqrt(M) even for exactly
Gaussian data, and distances below that floor cannot be resolved.  This
script measures the ladder of KS distances for a gently nonlinear
coefficient, compares it against the floor, and shows the analytic
finite-window scale deficit, which decays like 1/R and is computable
without any sampling at all.

The command line front end (fracwave rate demos/configs/rate_sine.cfg)
emits the same ladder as CSV with a bootstrap interval on the fitted
log-log slope.

Run:  python3 demos/rate_study.py
"""

import numpy as np

from fracwave import (
    ExperimentPlan,
    MomentCurves,
    SigmaSpec,
    asymptotic_variance,
    ks_normality,
    prelimit_variance_white,
    run_experiment,
)

plan = ExperimentPlan(
    hurst=0.5,
    sigma=SigmaSpec.affine_sine(1.0, 0.5),
    h=1.0 / 32.0,
    times=(1.0,),
    radii=(4.0, 8.0, 16.0, 32.0),
    replicas=8000,
    seed=31,
    chaos=False,
)
summary = run_experiment(plan, threads=1)

print("sigma(u) = 1 + sin(u)/2, H = 1/2, self-normalized averages:")
for ir, radius in enumerate(plan.radii):
    st = summary.stats[(0, ir)]
    print(f"  R = {radius:4.1f}: KS {st.ks:.4f} +- {st.ks_se:.4f}")

# the floor: KS of genuinely Gaussian samples of the same size
rng = np.random.default_rng(5)
floor = [ks_normality(x / x.std(ddof=1))
         for x in rng.standard_normal((6, plan.replicas))]
print(f"  floor for perfectly Gaussian samples at M = {plan.replicas}: "
      f"{min(floor):.4f} to {max(floor):.4f}")
print("  every measured distance sits at the floor: with this mildly")
print("  state-dependent coefficient the averages are Gaussian to within")
print("  measurement resolution already at R = 4.")

# a decay one CAN compute exactly: the finite-window variance still
# differs from its large-window linear growth, and that deficit shrinks
# like 1/R.  Shown for sigma(u) = u, where both sides are closed forms.
curves = MomentCurves.linear_white()
limit = asymptotic_variance(1.0, 0.5, curves)
print("finite-window scale deficit for sigma(u) = u (exact, no sampling):")
for radius in plan.radii:
    ratio = prelimit_variance_white(1.0, radius, curves) / (radius * limit)
    print(f"  R = {radius:4.1f}: Var(G)/(R * limit) = {ratio:.4f}   "
          f"deficit * R = {(1.0 - ratio) * radius:.3f}")
