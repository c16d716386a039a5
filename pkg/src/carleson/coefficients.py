"""Coefficient fields A(x, t) and their multiscale oscillation numbers.

Oscillation is always measured against the best constant matrix in the
Frobenius norm, whose unconstrained L^2 minimizer is the plain average; the
average inherits the (convex) ellipticity constraints, so no constrained
optimization is needed.  The gradient magnitude used by the classical
oscillation number is |grad A| = sqrt(sum_i ||d_i A||_op^2), which reduces to
|a'(t)| for scalar-diagonal fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import norms
from .geometry import (
    HalfSpaceGrid,
    Region,
    cell_mask,
    cells_in,
    dyadic_net,
    surface_ball,
    whitney,
)
from .norms import MultiscaleSample
from .profiles import Profile1D

OSC_ALPHA2_SQ = "alpha2_sq"
OSC_TILDE_ALPHA_SQ = "tilde_alpha_sq"
OSC_GAMMA_SQ = "gamma_sq"


class GradientUnavailableError(ValueError):
    """The field has no analytic gradient (grid-sampled data)."""


def check_elliptic(matrix: np.ndarray, mu0: float, tol: float = 1e-9) -> bool:
    """Pointwise ellipticity: ||A||_op <= mu0 and lambda_min(sym A) >= 1/mu0."""
    m = np.asarray(matrix, dtype=float)
    op = np.linalg.norm(m, 2)
    lam = np.linalg.eigvalsh(0.5 * (m + m.T)).min()
    return op <= mu0 * (1.0 + tol) and lam >= (1.0 / mu0) * (1.0 - tol)


@dataclass(frozen=True)
class ConstantMatrix:
    """A constant (d+1)x(d+1) coefficient matrix, not assumed symmetric."""

    entries: np.ndarray
    mu0: float

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"entries must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        if not check_elliptic(m, self.mu0):
            raise ValueError(f"matrix violates ellipticity with mu0={self.mu0}")


class CoefficientField:
    """Base class: matrix-valued map on the half-space with ellipticity mu0."""

    variant = "abstract"

    def __init__(self, d: int, mu0: float):
        self.d = d
        self.mu0 = float(mu0)
        self._cell_cache: dict[HalfSpaceGrid, np.ndarray] = {}

    @property
    def k(self) -> int:
        return self.d + 1

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Matrix values at points of shape (m, d+1); returns (m, d+1, d+1)."""
        raise NotImplementedError

    def grad_norm(self, points: np.ndarray) -> np.ndarray:
        """|grad A| at the given points; raises if no analytic gradient."""
        raise GradientUnavailableError(
            f"{self.variant} field does not provide an analytic gradient"
        )

    @property
    def has_gradient(self) -> bool:
        return False

    @property
    def has_mixed_terms(self) -> bool:
        return True

    @property
    def is_symmetric(self) -> bool:
        return False

    def cell_values(self, grid: HalfSpaceGrid) -> np.ndarray:
        """Per-cell matrices (shape cell_shape + (d+1, d+1)), cached per grid."""
        cached = self._cell_cache.get(grid)
        if cached is None:
            pts = grid.cell_centers_flat()
            cached = self.evaluate(pts).reshape(grid.cell_shape + (self.k, self.k))
            self._cell_cache[grid] = cached
        return cached

    def validate_on_grid(self, grid: HalfSpaceGrid) -> None:
        """Sample-based ellipticity validation over all grid cell centers."""
        vals = self.cell_values(grid).reshape(-1, self.k, self.k)
        sym = 0.5 * (vals + np.swapaxes(vals, -1, -2))
        lam_min = np.linalg.eigvalsh(sym)[:, 0].min()
        op_max = np.linalg.norm(vals, ord=2, axis=(-2, -1)).max()
        if lam_min < (1.0 / self.mu0) * (1.0 - 1e-9) or op_max > self.mu0 * (1.0 + 1e-9):
            raise ValueError(
                f"{self.variant} field violates ellipticity with mu0={self.mu0}: "
                f"lambda_min={lam_min:.6g}, op_max={op_max:.6g}"
            )


class ConstantField(CoefficientField):
    variant = "constant"

    def __init__(self, matrix, mu0: float, d: int | None = None):
        m = np.asarray(matrix, dtype=float)
        if d is None:
            d = m.shape[0] - 1
        super().__init__(d, mu0)
        self.matrix = ConstantMatrix(m, mu0).entries

    def evaluate(self, points):
        points = np.atleast_2d(points)
        return np.broadcast_to(self.matrix, (points.shape[0], self.k, self.k)).copy()

    def grad_norm(self, points):
        points = np.atleast_2d(points)
        return np.zeros(points.shape[0])

    @property
    def has_gradient(self):
        return True

    @property
    def has_mixed_terms(self):
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.any(off != 0.0))

    @property
    def is_symmetric(self):
        return bool(np.allclose(self.matrix, self.matrix.T, rtol=0.0, atol=1e-14))


def identity_field(d: int) -> ConstantField:
    return ConstantField(np.eye(d + 1), mu0=1.0, d=d)


class DiagonalProfileField(CoefficientField):
    """A(x, t) = a(t) * Id for a piecewise-polynomial profile a."""

    variant = "diagonal_profile"

    def __init__(self, profile: Profile1D, d: int, mu0: float | None = None):
        super().__init__(d, mu0 if mu0 is not None else profile.mu0)
        self.profile = profile

    def evaluate(self, points):
        points = np.atleast_2d(points)
        vals = self.profile(points[:, -1])
        eye = np.eye(self.k)
        return vals[:, None, None] * eye[None, :, :]

    def grad_norm(self, points):
        # d_t A = a'(t) Id has operator norm |a'|; lateral derivatives vanish.
        points = np.atleast_2d(points)
        return np.abs(self.profile.derivative(points[:, -1]))

    def sup_grad_norm(self, t0: float, t1: float) -> float:
        return self.profile.max_abs_derivative(t0, t1)

    @property
    def has_gradient(self):
        return True

    @property
    def has_mixed_terms(self):
        return False

    @property
    def is_symmetric(self):
        return True


class GridSampledField(CoefficientField):
    """One matrix per grid cell; evaluation snaps points to their cell."""

    variant = "grid_sampled"

    def __init__(self, grid: HalfSpaceGrid, values: np.ndarray, mu0: float):
        super().__init__(grid.d, mu0)
        values = np.asarray(values, dtype=float)
        expect = grid.cell_shape + (grid.d + 1, grid.d + 1)
        if values.shape != expect:
            raise ValueError(f"values shape {values.shape} != {expect}")
        self.grid = grid
        self.values = values

    def evaluate(self, points):
        points = np.atleast_2d(points)
        g = self.grid
        idx = []
        for axis in range(g.d):
            i = np.floor((points[:, axis] + g.R) / g.h).astype(int)
            idx.append(np.clip(i, 0, 2 * g.n - 1))
        j = np.clip(np.floor(points[:, -1] / g.h).astype(int), 0, g.n - 1)
        idx.append(j)
        return self.values[tuple(idx)]

    @property
    def is_symmetric(self):
        return bool(np.allclose(self.values, np.swapaxes(self.values, -1, -2),
                                rtol=0.0, atol=1e-14))

    @property
    def has_mixed_terms(self):
        off = self.values - self.values * np.eye(self.k)
        return bool(np.any(off != 0.0))


def _smooth_bump(s: np.ndarray) -> np.ndarray:
    """C^2 bump on [0, 1], peak value 1 at s = 1/2, zero outside."""
    v = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    v[inside] = 64.0 * (si * (1.0 - si)) ** 3
    return v


def _smooth_bump_deriv(s: np.ndarray) -> np.ndarray:
    v = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    v[inside] = 192.0 * (si * (1.0 - si)) ** 2 * (1.0 - 2.0 * si)
    return v


class SmoothDKPField(CoefficientField):
    """Seeded smooth field A0 + sum_k c_k phi_k(x) psi_k(t) D_k.

    Each scale k lives on the disjoint vertical band (l_k/2, l_k] with
    l_k = (R/4) 2^-k, so at any point exactly one scale is active; this
    keeps |grad A| * t uniformly bounded and makes the ellipticity budget
    additive in max_k |c_k|.  The bands coincide with the Whitney bands of
    the calibration net on Delta(0, R/2), so every scale is visible to the
    calibration norm; amplitudes are rescaled after construction so the
    square-oscillation Carleson norm hits the requested target exactly
    (oscillation is linear in the deviation amplitude).
    """

    variant = "smooth_dkp"

    def __init__(
        self,
        seed: int,
        grid: HalfSpaceGrid,
        mu0: float = 4.0,
        target_n2: float = 0.1,
        n_scales: int | None = None,
        symmetric: bool = True,
    ):
        super().__init__(grid.d, mu0)
        self.seed = int(seed)
        self.grid = grid
        self.target_n2 = float(target_n2)
        self.symmetric = bool(symmetric)
        R = grid.R
        # smallest band (l/2, l] must be >= 8h wide so gradients resolve
        max_scales = int(math.floor(math.log2(R / (64.0 * grid.h)))) + 1
        if max_scales < 1:
            raise ValueError(f"grid too coarse for a multiscale field: h={grid.h:g}")
        if n_scales is None:
            n_scales = max_scales
        elif n_scales > max_scales:
            raise ValueError(f"n_scales={n_scales} unresolvable: max {max_scales}")
        self.n_scales = n_scales
        rng = np.random.default_rng(self.seed)
        k = self.k
        base_val = 0.5 * (mu0 + 1.0 / mu0)
        self.base = base_val * np.eye(k)
        self.lengths = 0.25 * R * 2.0 ** -np.arange(n_scales)
        self.freqs = rng.integers(1, 4, size=(n_scales, self.d)).astype(float)
        self.phases = rng.uniform(0.0, 2.0 * math.pi, size=n_scales)
        dirs = rng.normal(size=(n_scales, k, k))
        if symmetric:
            dirs = 0.5 * (dirs + np.swapaxes(dirs, -1, -2))
        dirs /= np.linalg.norm(dirs, axis=(-2, -1))[:, None, None]
        self.dirs = dirs
        rel = rng.uniform(0.5, 1.0, size=n_scales)
        self.amps = 0.1 * (mu0 - 1.0 / mu0) * rel
        self._calibrate()
        self.validate_on_grid(grid)

    # separable factors -----------------------------------------------------

    def _phi(self, x_lat: np.ndarray, j: int) -> np.ndarray:
        arg = self.phases[j]
        for axis in range(self.d):
            arg = arg + 2.0 * math.pi * self.freqs[j, axis] * x_lat[:, axis] / self.lengths[j]
        return np.cos(arg)

    def _psi(self, t: np.ndarray, j: int) -> np.ndarray:
        lk = self.lengths[j]
        return _smooth_bump((t - 0.5 * lk) / (0.5 * lk))

    def evaluate(self, points):
        points = np.atleast_2d(points)
        out = np.broadcast_to(self.base, (points.shape[0], self.k, self.k)).copy()
        t = points[:, -1]
        for j in range(self.n_scales):
            psi = self._psi(t, j)
            active = psi != 0.0
            if not active.any():
                continue
            phi = self._phi(points[active, :-1], j)
            out[active] += (self.amps[j] * phi * psi[active])[:, None, None] * self.dirs[j]
        return out

    def grad_norm(self, points):
        points = np.atleast_2d(points)
        t = points[:, -1]
        out = np.zeros(points.shape[0])
        for j in range(self.n_scales):
            lk = self.lengths[j]
            s = (t - 0.5 * lk) / (0.5 * lk)
            active = (s > 0.0) & (s < 1.0)
            if not active.any():
                continue
            psi = _smooth_bump(s[active])
            dpsi = _smooth_bump_deriv(s[active]) / (0.5 * lk)
            arg = self.phases[j]
            for axis in range(self.d):
                arg = arg + 2.0 * math.pi * self.freqs[j, axis] * points[active, axis] / lk
            cos_a, sin_a = np.cos(arg), np.sin(arg)
            lat2 = np.zeros_like(cos_a)
            for axis in range(self.d):
                wave = 2.0 * math.pi * self.freqs[j, axis] / lk
                lat2 += (wave * sin_a * psi) ** 2
            vert2 = (cos_a * dpsi) ** 2
            op = np.linalg.norm(self.dirs[j], 2)
            out[active] += abs(self.amps[j]) * op * np.sqrt(lat2 + vert2)
        return out

    @property
    def has_gradient(self):
        return True

    @property
    def has_mixed_terms(self):
        return True

    @property
    def is_symmetric(self):
        return self.symmetric

    def dkp_sup_bound(self) -> float:
        """Numerical sup of |grad A(X)| * t over a fine sample of the box."""
        ts = np.concatenate([
            lk * np.linspace(0.5, 1.0, 65) for lk in self.lengths
        ])
        xs = np.linspace(-self.grid.R, self.grid.R, 129)
        best = 0.0
        for t in ts:
            pts = np.zeros((xs.size, self.d + 1))
            pts[:, 0] = xs
            pts[:, -1] = t
            best = max(best, float(self.grad_norm(pts).max()) * t)
        return best

    def _calibrate(self):
        net = dyadic_net(
            surface_ball((0.0,) * self.d, 0.5 * self.grid.R),
            max(8.0 * self.grid.h, float(self.lengths[-1])),
            self.grid,
        )
        profile = oscillation_profile(self, net, OSC_ALPHA2_SQ, self.grid)
        raw, _ = norms.carleson_norm(profile)
        if raw <= 0.0:
            raise ValueError("degenerate random field: zero oscillation norm")
        scale = math.sqrt(self.target_n2 / raw)
        self.amps = self.amps * scale
        margin = 0.5 * (self.mu0 - 1.0 / self.mu0)
        if np.max(np.abs(self.amps)) > margin:
            raise ValueError(
                f"target N2={self.target_n2} needs amplitude "
                f"{np.max(np.abs(self.amps)):.3g} > ellipticity margin {margin:.3g}"
            )
        self._cell_cache.clear()


def field_from_config(spec: dict, grid: HalfSpaceGrid) -> CoefficientField:
    """Build a field from a flat key-value spec (variant + parameters)."""
    variant = spec.get("variant", "constant")
    mu0 = float(spec.get("mu0", 4.0))
    if variant == "constant":
        scale = float(spec.get("scale", 1.0))
        return ConstantField(scale * np.eye(grid.d + 1), mu0=max(mu0, scale, 1.0 / scale))
    if variant == "identity":
        return identity_field(grid.d)
    if variant == "diagonal_profile":
        profile_kind = spec.get("profile", "smooth_bump")
        if profile_kind == "smooth_bump":
            from .profiles import smooth_bump_profile

            prof = smooth_bump_profile(
                base=float(spec.get("base", 1.0)),
                top=float(spec.get("top", 1.5)),
                t_up=(
                    float(spec.get("t_up_start", 0.25 * grid.R)),
                    float(spec.get("t_up_end", 0.5 * grid.R)),
                ),
            )
        elif profile_kind == "counterexample":
            from .oracles import CounterexampleFamily

            fam = CounterexampleFamily(
                n=int(spec.get("n", 2)), c0=float(spec.get("c0", 0.0))
            )
            prof = fam.profile
        else:
            raise ValueError(f"unknown profile kind {profile_kind!r}")
        return DiagonalProfileField(prof, d=grid.d)
    if variant == "smooth_dkp":
        return SmoothDKPField(
            seed=int(spec.get("seed", 0)),
            grid=grid,
            mu0=mu0,
            target_n2=float(spec.get("target_n2", 0.1)),
            n_scales=int(spec["n_scales"]) if "n_scales" in spec else None,
            symmetric=bool(int(spec.get("symmetric", 1))),
        )
    raise ValueError(f"unknown field variant {variant!r}")


# ---------------------------------------------------------------------------
# Oscillation numbers
# ---------------------------------------------------------------------------


def mean_matrix(field: CoefficientField, reg: Region, grid: HalfSpaceGrid) -> np.ndarray:
    """Entrywise average of A over the region's cells.

    This is the L^2-best constant fit; it satisfies the same ellipticity
    bounds as the field by convexity.
    """
    mask = cell_mask(reg, grid)
    if not mask.any():
        cells_in(reg, grid)  # raises UnresolvedRegionError with context
    vals = field.cell_values(grid)
    return vals[mask].mean(axis=0)


def _mean_sq_dev(field: CoefficientField, reg: Region, grid: HalfSpaceGrid) -> float:
    mask = cell_mask(reg, grid)
    if not mask.any():
        cells_in(reg, grid)
    vals = field.cell_values(grid)[mask]
    dev = vals - vals.mean(axis=0)
    return float(np.mean(np.sum(dev * dev, axis=(-2, -1))))


def alpha2(field: CoefficientField, x, r: float, grid: HalfSpaceGrid) -> float:
    """L^2-mean oscillation of A over the Whitney region W(x, r)."""
    return math.sqrt(_mean_sq_dev(field, whitney(x, r), grid))


def gamma(
    field: CoefficientField,
    x,
    r: float,
    grid: HalfSpaceGrid,
    region_kind: str = "halfball",
) -> float:
    """Same oscillation as alpha2 but over the full box above Delta(x, r)."""
    reg = Region(region_kind, tuple(np.atleast_1d(x)), float(r))
    return math.sqrt(_mean_sq_dev(field, reg, grid))


def tilde_alpha(
    field: CoefficientField,
    x,
    r: float,
    grid: HalfSpaceGrid | None = None,
    refine: int = 4,
) -> float:
    """Classical oscillation number r * sup_{W(x,r)} |grad A|.

    Exact for diagonal-profile fields; estimated on a refine-times-finer
    lattice than the grid for other smooth fields.
    """
    if not field.has_gradient:
        raise GradientUnavailableError(
            f"{field.variant} field does not support the classical oscillation number"
        )
    if isinstance(field, DiagonalProfileField):
        return r * field.sup_grad_norm(0.5 * r, r)
    if isinstance(field, ConstantField):
        return 0.0
    if grid is None:
        raise ValueError("a grid is required to sample the gradient of this field")
    step = grid.h / refine
    x = np.atleast_1d(np.asarray(x, dtype=float))
    axes = [
        np.arange(xc - r + 0.5 * step, xc + r, step) for xc in x
    ] + [np.arange(0.5 * r + 0.5 * step, r, step)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    lat = pts[:, :-1] - x
    keep = np.sum(lat * lat, axis=1) < r * r
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise ValueError(f"Whitney region at radius {r:g} too small to sample")
    return r * float(field.grad_norm(pts).max())


def alpha_inf(field: CoefficientField, x, r: float, grid: HalfSpaceGrid) -> float:
    """Upper bound for the sup-norm oscillation over W(x, r).

    Minimizes sup_W |A - A0| over candidate constants drawn from the field's
    own values on W plus the mean; every candidate is admissible, so the
    result dominates alpha2 and is itself dominated by the classical bound.
    """
    reg = whitney(x, r)
    mask = cell_mask(reg, grid)
    if not mask.any():
        cells_in(reg, grid)
    vals = field.cell_values(grid)[mask]
    cands = np.concatenate([vals, vals.mean(axis=0)[None]], axis=0)
    diffs = vals[None, :] - cands[:, None]
    sups = np.sqrt(np.sum(diffs * diffs, axis=(-2, -1))).max(axis=1)
    return float(sups.min())


def oscillation_profile(
    field: CoefficientField,
    net,
    which: str,
    grid: HalfSpaceGrid,
    region_kind: str = "halfball",
) -> MultiscaleSample:
    """Sample one of the squared oscillation numbers on a dyadic net."""
    values = []
    cap = (2.0 * field.mu0) ** 2
    for lv in net.levels:
        row = np.empty(lv.centers.shape[0])
        for i, c in enumerate(lv.centers):
            if which == OSC_ALPHA2_SQ:
                row[i] = alpha2(field, c, lv.radius, grid) ** 2
            elif which == OSC_GAMMA_SQ:
                row[i] = gamma(field, c, lv.radius, grid, region_kind=region_kind) ** 2
            elif which == OSC_TILDE_ALPHA_SQ:
                row[i] = tilde_alpha(field, c, lv.radius, grid) ** 2
            else:
                raise ValueError(f"unknown oscillation kind {which!r}")
        if which != OSC_TILDE_ALPHA_SQ and row.size and row.max() > cap:
            raise ValueError(f"oscillation value {row.max():.3g} exceeds (2 mu0)^2")
        values.append(row)
    return MultiscaleSample(net=net, values=tuple(values), label=which)


def oscillation_carleson_norm(
    field: CoefficientField,
    delta0: Region,
    which: str,
    r_min: float,
    grid: HalfSpaceGrid,
    region_kind: str = "halfball",
) -> tuple[float, Region]:
    """Carleson norm of a squared oscillation number restricted to delta0."""
    net = dyadic_net(delta0, r_min, grid)
    profile = oscillation_profile(field, net, which, grid, region_kind=region_kind)
    return norms.carleson_norm(profile)
