"""Characteristic-lattice scheme for the wave equation with multiplicative noise.

The lattice has equal time and space steps h (unit propagation speed), so the
deterministic part of the update is the exact two-step recursion

    u[n+1, j] = u[n, j+1] + u[n, j-1] - u[n-1, j] + kappa * sigma(u[n, j]) * dW[n, j]

with the half-sum starting step carrying the zero initial velocity.  A unit
impulse propagates with weight exactly 1 on the parity checkerboard of this
recursion, and each node is fed the noise mass of its 2h-wide dual cell (the
two lattice cells it touches), so the active nodes of any backward cone tile
its rows exactly.  Matching the resulting variance against one quarter of the
discrete cone-mass variance fixes kappa = 1/2 for every step size and Hurst
index; calibrate_kernel performs that count.

Values outside the shrinking interior cone of the spatial window are never
defined; they are stored as NaN and never read by the recursion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .noise import NoiseSheet, fgn_cell_covariance

__all__ = [
    "SigmaSpec",
    "LatticeConfig",
    "SolutionField",
    "calibrate_kernel",
    "solve",
    "picard_reference",
]

_LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class SigmaSpec:
    """Multiplicative coefficient sigma, one of four kinds.

    constant: sigma(u) = c            params = (c,)
    linear: sigma(u) = u              params = ()
    affine_sine: sigma(u) = a+b sin u params = (a, b)
    tabulated: piecewise linear       params = (knots, values), clamped outside

    lipschitz is the exact Lipschitz constant of the evaluated function,
    sigma_at_one = sigma(1) decides degeneracy: sigma(1) = 0 forces the field
    to stay at its initial state exactly.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind == "constant":
            if len(self.params) != 1:
                raise ValueError("constant sigma needs params (c,)")
        elif self.kind == "linear":
            if self.params != ():
                raise ValueError("linear sigma takes no params")
        elif self.kind == "affine_sine":
            if len(self.params) != 2:
                raise ValueError("affine_sine sigma needs params (offset, amplitude)")
        elif self.kind == "tabulated":
            if len(self.params) != 2:
                raise ValueError("tabulated sigma needs params (knots, values)")
            knots, values = self.params
            if len(knots) != len(values) or len(knots) < 2:
                raise ValueError("tabulated sigma needs >= 2 knot/value pairs")
            if not all(b > a for a, b in zip(knots, knots[1:])):
                raise ValueError("tabulated knots must be strictly increasing")
        else:
            raise ValueError(f"unknown sigma kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "SigmaSpec":
        return cls(kind="constant", params=(float(c),))

    @classmethod
    def linear(cls) -> "SigmaSpec":
        return cls(kind="linear")

    @classmethod
    def affine_sine(cls, offset: float, amplitude: float) -> "SigmaSpec":
        return cls(kind="affine_sine", params=(float(offset), float(amplitude)))

    @classmethod
    def tabulated(cls, knots, values) -> "SigmaSpec":
        return cls(
            kind="tabulated",
            params=(tuple(float(k) for k in knots), tuple(float(v) for v in values)),
        )

    def __call__(self, u):
        if self.kind == "constant":
            c = self.params[0]
            if np.isscalar(u):
                return c
            return np.full_like(np.asarray(u, dtype=np.float64), c)
        if self.kind == "linear":
            return u
        if self.kind == "affine_sine":
            a, b = self.params
            return a + b * np.sin(u)
        knots, values = self.params
        return np.interp(u, knots, values)

    @property
    def lipschitz(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "linear":
            return 1.0
        if self.kind == "affine_sine":
            return abs(self.params[1])
        knots, values = self.params
        slopes = [
            abs((v1 - v0) / (k1 - k0))
            for (k0, k1, v0, v1) in zip(knots, knots[1:], values, values[1:])
        ]
        return max(slopes)

    @property
    def sigma_at_one(self) -> float:
        return float(self(1.0))

    @property
    def is_degenerate(self) -> bool:
        return self.sigma_at_one == 0.0


def _snap_to_grid(value: float, h: float, name: str) -> int:
    ratio = value / h
    n = int(round(ratio))
    if abs(ratio - n) > _LATTICE_TOL:
        raise ValueError(f"{name}={value} is not a multiple of the lattice step h={h}")
    return n


@dataclass(frozen=True)
class LatticeConfig:
    """Uniform lattice: step h in both directions, times [0, t_max], window
    [-x_half_width, x_half_width].  Both extents must be lattice multiples."""

    h: float
    t_max: float
    x_half_width: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        _snap_to_grid(self.t_max, self.h, "t_max")
        half = _snap_to_grid(self.x_half_width, self.h, "x_half_width")
        if half < self.n_steps:
            raise ValueError(
                "x_half_width must be at least t_max: the interior cone would be empty"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.h))

    @property
    def n_nodes(self) -> int:
        return 2 * int(round(self.x_half_width / self.h)) + 1

    @property
    def n_cells(self) -> int:
        return self.n_nodes - 1

    @property
    def center_index(self) -> int:
        return int(round(self.x_half_width / self.h))

    def time_index(self, t: float) -> int:
        n = _snap_to_grid(t, self.h, "t")
        if not (0 <= n <= self.n_steps):
            raise ValueError(f"t={t} outside [0, {self.t_max}]")
        return n

    def node_index(self, x: float) -> int:
        j = self.center_index + _snap_to_grid(x, self.h, "x")
        if not (0 <= j < self.n_nodes):
            raise ValueError(f"x={x} outside the window")
        return j


@dataclass
class SolutionField:
    """Solved field on the lattice: values[n, j] = u(n*h, -x_half_width + j*h).

    NaN marks nodes outside the interior validity cone (the window shrinks by
    one node per side per step)."""

    config: LatticeConfig
    sigma: SigmaSpec
    kappa: float
    values: np.ndarray = field(repr=False)
    noise_ref: str = "external"

    def valid_bounds(self, level: int) -> tuple[int, int]:
        """Inclusive node-index range valid at a time level."""
        if not (0 <= level <= self.config.n_steps):
            raise ValueError(f"level {level} outside [0, {self.config.n_steps}]")
        return level, self.config.n_nodes - 1 - level

    def value(self, t: float, x: float) -> float:
        n = self.config.time_index(t)
        j = self.config.node_index(x)
        lo, hi = self.valid_bounds(n)
        if not (lo <= j <= hi):
            raise ValueError(f"(t={t}, x={x}) is outside the validity cone")
        return float(self.values[n, j])


def calibrate_kernel(h: float, hurst: float, reference_steps: int = 8) -> float:
    """Kernel constant kappa by closed-form counting of lattice weights.

    For constant sigma the scheme's value at a node is 1 + kappa * (sum of the
    cone's cell masses), because impulses carry weight 1 on the checkerboard
    and the dual-cell windows of the active nodes tile each row of the cone
    (row at depth p holds one fractional increment of width 2(p+1)h).  The
    target variance is one quarter of the discrete cone-mass variance; both
    sides are assembled here from fgn_cell_covariance and the ratio returns
    kappa = 1/2 exactly, for every (h, hurst) and reference horizon.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    if reference_steps < 1:
        raise ValueError("reference_steps must be >= 1")
    scheme_weight_var = 0.0
    for depth in range(1, reference_steps + 1):
        width = 2 * depth  # cells in the tiled row
        lags = np.arange(width)
        cov = fgn_cell_covariance(np.abs(lags[:, None] - lags[None, :]), hurst, h)
        scheme_weight_var += h * float(cov.sum())  # rows are independent in time
    target = 0.25 * scheme_weight_var  # quarter of the discrete cone-mass variance
    return float(np.sqrt(target / scheme_weight_var))


def _check_sheet(config: LatticeConfig, sheet: NoiseSheet) -> None:
    spec = sheet.spec
    if abs(spec.dt - config.h) > _LATTICE_TOL * config.h or abs(spec.dx - config.h) > _LATTICE_TOL * config.h:
        raise ValueError(
            f"sheet cells ({spec.dt} x {spec.dx}) do not match the lattice step {config.h}"
        )
    if spec.n_time < config.n_steps:
        raise ValueError(f"sheet has {spec.n_time} rows, lattice needs {config.n_steps}")
    if spec.n_space != config.n_cells:
        raise ValueError(
            f"sheet has {spec.n_space} cells per row, the window needs exactly {config.n_cells}"
        )


def solve(
    config: LatticeConfig,
    sheet: NoiseSheet,
    sigma: SigmaSpec,
    kappa: Optional[float] = None,
) -> SolutionField:
    """Run the scheme over the whole lattice.

    The noise attached to node j at level n is the mass of the two cells
    [x_j - h, x_j + h) in time row n.  sigma is evaluated on the previous
    level (the update stays adapted).
    """
    _check_sheet(config, sheet)
    if kappa is None:
        kappa = calibrate_kernel(config.h, sheet.spec.hurst)
    n_steps, n_nodes = config.n_steps, config.n_nodes
    w = sheet.masses
    pair = w[:, :-1] + w[:, 1:]  # pair[n, i] = window mass of node i+1 at row n

    u = np.full((n_steps + 1, n_nodes), np.nan)
    u[0, :] = 1.0

    lo, hi = 1, n_nodes - 1  # valid slice [lo, hi) at level 1
    u[1, lo:hi] = (
        0.5 * (u[0, lo + 1: hi + 1] + u[0, lo - 1: hi - 1])
        + kappa * sigma(u[0, lo:hi]) * pair[0, lo - 1: hi - 1]
    )
    for n in range(1, n_steps):
        lo, hi = n + 1, n_nodes - 1 - n
        u[n + 1, lo:hi] = (
            u[n, lo + 1: hi + 1]
            + u[n, lo - 1: hi - 1]
            - u[n - 1, lo:hi]
            + kappa * sigma(u[n, lo:hi]) * pair[n, lo - 1: hi - 1]
        )
    return SolutionField(config=config, sigma=sigma, kappa=kappa, values=u,
                         noise_ref=sheet.ref)


def picard_reference(
    config: LatticeConfig,
    sheet: NoiseSheet,
    sigma: SigmaSpec,
    iterations: int,
    return_diffs: bool = False,
):
    """Fixed-point reference solver: direct quadrature of the integral form.

    Starting from the constant initial state, each sweep evaluates

        u_{k+1}(t_n, x_j) = 1 + (1/2) * sum_{cells in the cone of (t_n, x_j)}
                                 sigma(u_k at the cell) * cell mass,

    with the cone condition |x_j - y_cell| <= t_n - s_cell taken at cell
    centers and u_k at a cell read as the mean of its two bounding nodes at
    the cell's base level.  Meant for small lattices; cost is
    O(iterations * n_steps^2 * n_nodes).

    Returns the final iterate as a SolutionField; with return_diffs, also the
    list of successive sup-norm differences over the validity cone.
    """
    _check_sheet(config, sheet)
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    n_steps, n_nodes = config.n_steps, config.n_nodes
    w = sheet.masses

    valid = np.zeros((n_steps + 1, n_nodes), dtype=bool)
    for n in range(n_steps + 1):
        valid[n, n: n_nodes - n] = True

    u = np.where(valid, 1.0, np.nan)
    diffs = []
    for _ in range(iterations):
        # sigma at cells, per row: mean of the bounding nodes at the base level
        cell_vals = 0.5 * (u[:n_steps, :-1] + u[:n_steps, 1:])
        weighted = np.where(np.isnan(cell_vals), 0.0, sigma(np.where(np.isnan(cell_vals), 1.0, cell_vals))) * w[:n_steps]
        prefix = np.zeros((n_steps, n_nodes))
        prefix[:, 1:] = np.cumsum(weighted, axis=1)

        nxt = np.where(valid, 1.0, np.nan)
        for n in range(1, n_steps + 1):
            j = np.arange(n, n_nodes - n)
            acc = np.zeros(j.size)
            for m in range(n):
                # cells c with |(c + 1/2) - j| <= n - m - 1/2  =>  c in [j-(n-m), j+(n-m)-1]
                reach = n - m
                acc += prefix[m, j + reach] - prefix[m, j - reach]
            nxt[n, j] = 1.0 + 0.5 * acc
        diffs.append(float(np.nanmax(np.abs(nxt - u))))
        u = nxt

    fld = SolutionField(config=config, sigma=sigma, kappa=0.5, values=u,
                        noise_ref=sheet.ref)
    if return_diffs:
        return fld, diffs
    return fld
