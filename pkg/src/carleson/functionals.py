"""Solution functionals: vertical slope, local energy, non-affine energy.

All functionals are plain averages over the cells of a region, computed from
the cached cell-centered gradient of a discrete solution.  Because the slope
is the mean vertical derivative over the same cell set, the orthogonality
identity mean|grad(u - c t)|^2 = (c - slope)^2 + nonaffine holds exactly in
floating point up to rounding.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientField, gamma
from .geometry import DyadicNet, Region, cell_mask, cells_in
from .norms import BETA_LABEL, CellDensity, MultiscaleSample
from .solver import DiscreteSolution, _corner_offsets

BETA_TOL = 1e-12


class DegenerateSolutionError(ValueError):
    """Zero-energy region: the solution is constant there."""


class PositivityViolationError(ValueError):
    """A nonpositive interior value where positivity is required."""


def _region_gradient(u: DiscreteSolution, reg: Region) -> np.ndarray:
    mask = cell_mask(reg, u.grid)
    if not mask.any():
        cells_in(reg, u.grid)  # raises with context
    return u.gradient[mask]


def lambda_slope(u: DiscreteSolution, reg: Region) -> float:
    """Mean vertical derivative over the region (best affine slope)."""
    return float(_region_gradient(u, reg)[:, -1].mean())


def energy(u: DiscreteSolution, reg: Region) -> float:
    """Mean of |grad u|^2 over the region."""
    g = _region_gradient(u, reg)
    return float(np.mean(np.sum(g * g, axis=1)))


def nonaffine(u: DiscreteSolution, reg: Region) -> float:
    """Mean of |grad u - slope * e_t|^2 over the region."""
    g = _region_gradient(u, reg)
    lam = g[:, -1].mean()
    dev = g.copy()
    dev[:, -1] -= lam
    return float(np.mean(np.sum(dev * dev, axis=1)))


def beta(u: DiscreteSolution, reg: Region) -> float:
    """Normalized non-affine energy J/E; always in [0, 1]."""
    g = _region_gradient(u, reg)
    e = float(np.mean(np.sum(g * g, axis=1)))
    if e <= 0.0:
        raise DegenerateSolutionError(
            f"zero energy on {reg.kind} region at {reg.center}, r={reg.radius:g}"
        )
    lam = g[:, -1].mean()
    dev = g.copy()
    dev[:, -1] -= lam
    j = float(np.mean(np.sum(dev * dev, axis=1)))
    b = j / e
    if b > 1.0 + BETA_TOL:
        raise AssertionError(f"beta = {b} exceeds 1")
    return min(b, 1.0)


def beta_field(
    u: DiscreteSolution,
    net: DyadicNet,
    region_kind: str = "pencil",
    threads: int = 1,
) -> MultiscaleSample:
    """beta at every net sample, as a multiscale density."""

    def one_level(level):
        return np.array([
            beta(u, Region(region_kind, tuple(c), level.radius)) for c in level.centers
        ])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = tuple(pool.map(one_level, net.levels))
    else:
        values = tuple(one_level(lv) for lv in net.levels)
    return MultiscaleSample(net=net, values=values, label=BETA_LABEL)


def orthogonality_gap(u: DiscreteSolution, reg: Region, lam: float) -> float:
    """Relative defect of the exact slope decomposition for a given slope."""
    g = _region_gradient(u, reg)
    dev = g.copy()
    dev[:, -1] -= lam
    lhs = float(np.mean(np.sum(dev * dev, axis=1)))
    slope = g[:, -1].mean()
    rhs = (lam - slope) ** 2 + nonaffine(u, reg)
    return abs(lhs - rhs) / max(lhs, 1e-300)


def second_deriv_density(u: DiscreteSolution) -> CellDensity:
    """Per-cell |Hess u|^2 t^3 / u^2; zero (and excluded) within 2h of faces.

    Requires u > 0 at every interior node, as for positive solutions
    vanishing only on the bottom boundary.
    """
    g = u.grid
    m = g.d + 1
    hess = u.hessian
    node_mask = u.hessian_mask
    interior = tuple(slice(1, -1) for _ in range(m))
    if u.values[interior].size and u.values[interior].min() <= 0.0:
        bad = float(u.values[interior].min())
        raise PositivityViolationError(
            f"second-derivative density needs u > 0 in the interior (min {bad:.3e})"
        )
    hess_sq = np.sum(hess * hess, axis=(-2, -1))
    cell_val = np.zeros(g.cell_shape)
    cell_ok = np.ones(g.cell_shape, dtype=bool)
    cell_u = np.zeros(g.cell_shape)
    for off in _corner_offsets(m):
        sl = tuple(slice(o, s + o) for o, s in zip(off, g.cell_shape))
        cell_val += hess_sq[sl]
        cell_ok &= node_mask[sl]
        cell_u += u.values[sl]
    n_corners = 2.0**m
    cell_val /= n_corners
    cell_u /= n_corners
    tc = g.vertical_cell_centers().reshape((1,) * g.d + (-1,))
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(cell_ok, cell_val * tc**3 / cell_u**2, 0.0)
    return CellDensity(grid=g, values=density, label="second_deriv")


@dataclass(frozen=True)
class DecayScanResult:
    tau: float
    fitted_c: float
    n_samples: int
    worst_center: tuple[float, ...]
    worst_radius: float


def decay_contraction_scan(
    u: DiscreteSolution,
    field_A: CoefficientField,
    net: DyadicNet,
    taus: tuple[float, ...] = (0.25, 0.125, 0.0625),
    region_kind: str = "pencil",
    gamma_floor: float = 1e-14,
) -> list[DecayScanResult]:
    """Fit the constant in the one-step contraction of beta across scales.

    For each retained sample (x, r) the residual beta(x, tau r) - beta(x, r)/2
    is divided by gamma(x, r)^2 (floored, so an exactly constant field shows
    a huge outlier instead of a crash when the residual is positive); the
    fitted constant is the max over samples of the positive part.  Samples
    are retained when the 5x enlarged box fits in the solved grid and the
    contracted radius tau*r stays at or above 8h.
    """
    g = u.grid
    results = []
    for tau in taus:
        worst = 0.0
        worst_center: tuple[float, ...] = ()
        worst_radius = 0.0
        count = 0
        for c, r, _w in net.samples():
            big = Region(region_kind, tuple(c), 5.0 * r)
            if not g.contains_region(big):
                continue
            if tau * r < 8.0 * g.h * (1.0 - 1e-12):
                continue
            count += 1
            b_r = beta(u, Region(region_kind, tuple(c), r))
            b_tau = beta(u, Region(region_kind, tuple(c), tau * r))
            residual = b_tau - 0.5 * b_r
            gam2 = max(gamma(field_A, c, r, g, region_kind=region_kind) ** 2, gamma_floor)
            fitted = max(0.0, residual) / gam2
            if fitted >= worst:
                worst = fitted
                worst_center = tuple(c)
                worst_radius = r
        if count == 0:
            raise ValueError(f"no admissible samples for tau={tau}")
        results.append(DecayScanResult(tau=tau, fitted_c=worst, n_samples=count,
                                       worst_center=worst_center, worst_radius=worst_radius))
    return results
