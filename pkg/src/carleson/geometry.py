"""Half-space discretization: grids, regions, and dyadic sampling nets.

The domain is the upper half-space {(x, t): x in R^d, t > 0} truncated to the
box [-R, R]^d x [0, R].  Boundary dimension d is 1 or 2 (2-D or 3-D problem).
All quantities downstream are averages over regions, which are realized as
sets of uniform grid cells selected by center-in-region membership.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)

# Region kinds
SURFACE_BALL = "surface_ball"
HALFBALL = "halfball"          # B((x,0), r) intersected with {t > 0}
WHITNEY = "whitney"            # Delta(x, r) x (r/2, r]
PENCIL = "pencil"              # Delta(x, r) x (0, r]

_VOLUME_KINDS = (HALFBALL, WHITNEY, PENCIL)


class UnresolvedRegionError(ValueError):
    """Region contains no grid cell centers (below grid resolution)."""


class InvalidNetError(ValueError):
    """Dyadic net parameters admit no sampling level."""


def surface_ball_measure(d: int, r: float) -> float:
    """Lebesgue measure of a radius-r ball in the boundary R^d."""
    if d == 1:
        return 2.0 * r
    if d == 2:
        return math.pi * r * r
    raise ValueError(f"boundary dimension must be 1 or 2, got {d}")


@dataclass(frozen=True)
class Region:
    """A located region: surface ball, half-ball, Whitney region, or pencil box.

    center is a boundary point (length d); radius > 0.
    """

    kind: str
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.kind not in (SURFACE_BALL,) + _VOLUME_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not self.radius > 0.0:
            raise ValueError(f"region radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def d(self) -> int:
        return len(self.center)

    def ball_measure(self) -> float:
        """Measure of the underlying surface ball Delta(center, radius)."""
        return surface_ball_measure(self.d, self.radius)

    def t_range(self) -> tuple[float, float]:
        """Vertical extent (t0, t1] of the volume region."""
        if self.kind == WHITNEY:
            return 0.5 * self.radius, self.radius
        if self.kind in (PENCIL, HALFBALL):
            return 0.0, self.radius
        raise ValueError(f"{self.kind} region has no vertical extent")

    def contains_boundary_points(self, x: np.ndarray) -> np.ndarray:
        """Membership mask for boundary points x of shape (m, d)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dist2 = np.sum((x - np.asarray(self.center)) ** 2, axis=1)
        return dist2 < self.radius**2


def surface_ball(center, radius: float) -> Region:
    return Region(SURFACE_BALL, tuple(np.atleast_1d(center)), float(radius))


def halfball(center, radius: float) -> Region:
    return Region(HALFBALL, tuple(np.atleast_1d(center)), float(radius))


def whitney(center, radius: float) -> Region:
    return Region(WHITNEY, tuple(np.atleast_1d(center)), float(radius))


def pencil(center, radius: float) -> Region:
    return Region(PENCIL, tuple(np.atleast_1d(center)), float(radius))


def region(kind: str, center, radius: float) -> Region:
    return Region(kind, tuple(np.atleast_1d(center)), float(radius))


@dataclass(frozen=True)
class HalfSpaceGrid:
    """Uniform tensor grid on [-R, R]^d x [0, R] with spacing h.

    Nodes sit at (x_i, t_j) with x_i = -R + i*h and t_j = j*h, so the bottom
    boundary {t = 0} is part of the grid.  R/h must be an integer >= 8 so
    that dyadic radii align with node layers.
    """

    d: int
    R: float
    h: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"boundary dimension must be 1 or 2, got {self.d}")
        ratio = self.R / self.h
        n = round(ratio)
        if abs(ratio - n) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"R/h must be an integer, got {ratio}")
        if n < 8:
            raise ValueError(f"R/h must be at least 8, got {n}")

    @property
    def n(self) -> int:
        """Number of vertical cells (= R/h)."""
        return round(self.R / self.h)

    @property
    def node_shape(self) -> tuple[int, ...]:
        return (2 * self.n + 1,) * self.d + (self.n + 1,)

    @property
    def cell_shape(self) -> tuple[int, ...]:
        return (2 * self.n,) * self.d + (self.n,)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cell_shape))

    def lateral_nodes(self) -> np.ndarray:
        return -self.R + self.h * np.arange(2 * self.n + 1)

    def vertical_nodes(self) -> np.ndarray:
        return self.h * np.arange(self.n + 1)

    def lateral_cell_centers(self) -> np.ndarray:
        return -self.R + self.h * (np.arange(2 * self.n) + 0.5)

    def vertical_cell_centers(self) -> np.ndarray:
        return self.h * (np.arange(self.n) + 0.5)

    def cell_center_mesh(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays, each of shape cell_shape."""
        axes = [self.lateral_cell_centers()] * self.d + [self.vertical_cell_centers()]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def cell_centers_flat(self) -> np.ndarray:
        """(n_cells, d+1) array of cell centers in C (lexicographic) order."""
        mesh = self.cell_center_mesh()
        return np.stack([m.ravel() for m in mesh], axis=1)

    def node_mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.lateral_nodes()] * self.d + [self.vertical_nodes()]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def contains_region(self, reg: Region) -> bool:
        """Whether the closed volume region fits in the grid box."""
        c = np.asarray(reg.center)
        if reg.kind in (PENCIL, WHITNEY, HALFBALL, SURFACE_BALL):
            lateral_ok = np.all(np.abs(c) + reg.radius <= self.R + 1e-12)
            vertical_ok = reg.radius <= self.R + 1e-12
            return bool(lateral_ok and vertical_ok)
        return False


def cell_mask(reg: Region, grid: HalfSpaceGrid) -> np.ndarray:
    """Boolean mask over grid cells whose centers lie in the region."""
    if reg.kind not in _VOLUME_KINDS:
        raise ValueError(f"cells_in is defined for volume regions, not {reg.kind}")
    if reg.d != grid.d:
        raise ValueError(f"region dimension {reg.d} != grid dimension {grid.d}")
    xc = grid.lateral_cell_centers()
    tc = grid.vertical_cell_centers()
    c = reg.center
    if grid.d == 1:
        lat2 = (xc - c[0]) ** 2
    else:
        lat2 = (xc[:, None] - c[0]) ** 2 + (xc[None, :] - c[1]) ** 2
    if reg.kind == HALFBALL:
        t_sq = tc.reshape((1,) * grid.d + (-1,)) ** 2
        return lat2[..., None] + t_sq < reg.radius**2
    t0, t1 = reg.t_range()
    tmask = (tc > t0) & (tc <= t1 + 1e-12 * reg.radius)
    latmask = lat2 < reg.radius**2
    if grid.d == 1:
        return latmask[:, None] & tmask[None, :]
    return latmask[:, :, None] & tmask[None, None, :]


def cells_in(reg: Region, grid: HalfSpaceGrid) -> np.ndarray:
    """Indices (m, d+1) of grid cells with centers in the region, lex order.

    Raises UnresolvedRegionError when the region captures no cell center,
    which signals a region below grid resolution rather than an empty set.
    """
    mask = cell_mask(reg, grid)
    idx = np.argwhere(mask)
    if idx.shape[0] == 0:
        raise UnresolvedRegionError(
            f"{reg.kind} region at {reg.center} with radius {reg.radius:g} "
            f"contains no cell centers on grid with h={grid.h:g}"
        )
    return idx


@dataclass(frozen=True)
class NetLevel:
    """One dyadic level of a sampling net: common radius, centers, weight."""

    radius: float
    centers: np.ndarray          # (m, d)
    weight: float                # quadrature weight per sample for dx dr / r

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, float)))


@dataclass(frozen=True)
class DyadicNet:
    """Dyadic net of (center, radius) samples for measures beta(x,r) dx dr/r.

    Level j = 1..J carries radius r0 * 2^-j; centers form a lattice of
    spacing r/2 tiling the base ball; the per-sample weight (r/2)^d * ln 2
    is the product of the lattice cell measure and the dr/r mass of the
    dyadic band (r, 2r].
    """

    base: Region
    r_min: float
    levels: tuple[NetLevel, ...] = field(default=())

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def n_samples(self) -> int:
        return sum(lv.centers.shape[0] for lv in self.levels)

    def radii(self) -> list[float]:
        return [lv.radius for lv in self.levels]

    def samples(self):
        """Yield (center array, radius, weight) per sample, level-major order."""
        for lv in self.levels:
            for c in lv.centers:
                yield c, lv.radius, lv.weight


def _level_centers(base: Region, radius: float) -> np.ndarray:
    """Cell-centered lattice of spacing radius/2 restricted to the base ball."""
    s = 0.5 * radius
    r0 = base.radius
    kmax = int(math.ceil(r0 / s))
    offsets = (np.arange(-kmax, kmax) + 0.5) * s
    if base.d == 1:
        centers = base.center[0] + offsets[:, None]
    else:
        gx, gy = np.meshgrid(offsets, offsets, indexing="ij")
        centers = np.stack([base.center[0] + gx.ravel(), base.center[1] + gy.ravel()], axis=1)
    keep = base.contains_boundary_points(centers)
    return centers[keep]


def dyadic_net(base: Region, r_min: float, grid: HalfSpaceGrid | None = None) -> DyadicNet:
    """Build the dyadic net over a base surface ball down to radius ~ r_min.

    The number of levels is ceil(log2(r0 / r_min)), so halving r_min always
    adds exactly one level.  When a grid is supplied, r_min must be >= 8h:
    multiscale densities are meaningless below grid resolution.
    """
    r0 = base.radius
    if not 0.0 < r_min < r0:
        raise InvalidNetError(f"need 0 < r_min < base radius, got r_min={r_min}, r0={r0}")
    if grid is not None and r_min < 8.0 * grid.h * (1.0 - 1e-12):
        raise InvalidNetError(f"r_min={r_min:g} is below 8h={8 * grid.h:g} on the attached grid")
    n_levels = int(math.ceil(round(math.log2(r0 / r_min), 9)))
    n_levels = max(n_levels, 1)
    levels = []
    for j in range(1, n_levels + 1):
        r = r0 * 2.0**-j
        centers = _level_centers(base, r)
        weight = (0.5 * r) ** base.d * LN2
        levels.append(NetLevel(radius=r, centers=centers, weight=weight))
    return DyadicNet(base=base, r_min=r_min, levels=tuple(levels))
