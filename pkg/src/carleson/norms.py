"""Carleson-norm estimation for multiscale samples and cell densities.

The norm of a density mu over a base ball Delta_0 is the sup, over
net-aligned surface balls Delta inside Delta_0, of mu(T_Delta) / |Delta|.
The sup is taken over a finite candidate family (centers on the coarsest
lattice at each dyadic radius, plus Delta_0 itself), so the value is a lower
bound for the continuum sup with alignment error absorbed into the
comparison constants such estimates always carry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DyadicNet,
    HalfSpaceGrid,
    Region,
    UnresolvedRegionError,
    cell_mask,
    dyadic_net,
    surface_ball,
)

BETA_LABEL = "beta"


@dataclass(frozen=True)
class MultiscaleSample:
    """Values of a density of (x, r) on a dyadic net, with quadrature weights."""

    net: DyadicNet
    values: tuple[np.ndarray, ...]  # one array per net level
    label: str = ""

    def __post_init__(self):
        if len(self.values) != len(self.net.levels):
            raise ValueError("one value array per net level required")
        vals = tuple(np.asarray(v, dtype=float) for v in self.values)
        object.__setattr__(self, "values", vals)
        for lv, v in zip(self.net.levels, vals):
            if v.shape != (lv.centers.shape[0],):
                raise ValueError("value array shape does not match level centers")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"non-finite {self.label or 'sample'} values")
            if self.label == BETA_LABEL:
                if v.size and (v.min() < -1e-12 or v.max() > 1.0 + 1e-12):
                    raise ValueError(f"beta values outside [0, 1]: range "
                                     f"[{v.min():.3e}, {v.max():.3e}]")

    @property
    def n_samples(self) -> int:
        return sum(v.size for v in self.values)

    def scaled(self, c: float) -> "MultiscaleSample":
        return MultiscaleSample(self.net, tuple(c * v for v in self.values), self.label)

    def rows(self):
        """Yield (center, radius, value, weight) over all samples."""
        for lv, vals in zip(self.net.levels, self.values):
            for c, v in zip(lv.centers, vals):
                yield c, lv.radius, float(v), lv.weight


@dataclass(frozen=True)
class CellDensity:
    """A nonnegative volume density sampled on grid cells (value per cell)."""

    grid: HalfSpaceGrid
    values: np.ndarray          # shape grid.cell_shape
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.cell_shape:
            raise ValueError(f"values shape {v.shape} != cell shape {self.grid.cell_shape}")
        object.__setattr__(self, "values", v)


def box_integral(sample: MultiscaleSample, delta: Region) -> float:
    """Integral of the sampled density over the box above delta.

    Counts samples (x, r) whose center lies in delta and whose radius is at
    most radius(delta); the base ball must contain delta.
    """
    base = sample.net.base
    sep = math.dist(delta.center, base.center)
    if sep + delta.radius > base.radius * (1.0 + 1e-9):
        raise ValueError("query ball is not inside the sample's base ball")
    total = 0.0
    for lv, vals in zip(sample.net.levels, sample.values):
        if lv.radius > delta.radius * (1.0 + 1e-12):
            continue
        if sample.net.d == 1:
            # interval comparisons, bitwise-consistent with the fast 1-D path
            xs = lv.centers[:, 0]
            c = delta.center[0]
            inside = (xs > c - delta.radius) & (xs < c + delta.radius)
        else:
            inside = delta.contains_boundary_points(lv.centers)
        total += lv.weight * float(vals[inside].sum())
    return total


def cell_box_integral(density: CellDensity, delta: Region, kind: str = "pencil") -> float:
    """Integral of a cell density over the pencil box or half-ball above delta."""
    reg = Region(kind, delta.center, delta.radius)
    try:
        mask = cell_mask(reg, density.grid)
    except UnresolvedRegionError:
        return 0.0
    return float(density.values[mask].sum()) * density.grid.h ** (density.grid.d + 1)


def candidate_balls(base: Region, r_min: float) -> list[Region]:
    """Net-aligned candidate balls inside the base ball, base ball included."""
    cands = [surface_ball(base.center, base.radius)]
    net = dyadic_net(base, r_min)
    for lv in net.levels:
        sep = np.linalg.norm(lv.centers - np.asarray(base.center), axis=1)
        ok = sep + lv.radius <= base.radius * (1.0 + 1e-9)
        for c in lv.centers[ok]:
            cands.append(surface_ball(c, lv.radius))
    return cands


def _argmax_ball(scores: list[float], balls: list[Region]) -> tuple[float, Region]:
    best = max(scores)
    tied = [b for s, b in zip(scores, balls) if s >= best * (1.0 - 1e-12) or s == best]
    tied.sort(key=lambda b: (tuple(b.center), -b.radius))
    return best, tied[0]


def carleson_norm(sample: MultiscaleSample, delta0: Region | None = None) -> tuple[float, Region]:
    """Carleson norm of a multiscale sample restricted to delta0.

    Returns (norm, argmax ball); ties break to the lexicographically
    smallest center, then the largest radius.
    """
    if sample.n_samples == 0:
        raise ValueError("empty multiscale sample")
    base = delta0 if delta0 is not None else sample.net.base
    finest = min(lv.radius for lv in sample.net.levels)
    if finest >= base.radius:
        balls = [surface_ball(base.center, base.radius)]
    else:
        balls = candidate_balls(base, finest)
    if sample.net.d == 1:
        scores = _scores_fast_1d(sample, balls)
    else:
        scores = [box_integral(sample, b) / b.ball_measure() for b in balls]
    return _argmax_ball(scores, balls)


def _scores_fast_1d(sample: MultiscaleSample, balls: list[Region]) -> list[float]:
    """Vectorized per-ball integrals via prefix sums over sorted level centers."""
    levels = []
    for lv, vals in zip(sample.net.levels, sample.values):
        order = np.argsort(lv.centers[:, 0], kind="stable")
        xs = lv.centers[order, 0]
        prefix = np.concatenate([[0.0], np.cumsum(vals[order] * lv.weight)])
        levels.append((lv.radius, xs, prefix))
    centers = np.array([b.center[0] for b in balls])
    radii = np.array([b.radius for b in balls])
    scores = np.zeros(len(balls))
    for r, xs, prefix in levels:
        act = r <= radii * (1.0 + 1e-12)
        if not act.any():
            continue
        lo = np.searchsorted(xs, centers[act] - radii[act], side="right")
        hi = np.searchsorted(xs, centers[act] + radii[act], side="left")
        # strict interior on both sides (membership is |x - c| < rho)
        scores[act] += prefix[hi] - prefix[lo]
    return list(scores / (2.0 * radii))


def cell_carleson_norm(
    density: CellDensity,
    delta0: Region,
    r_min: float | None = None,
    kind: str = "pencil",
) -> tuple[float, Region]:
    """Carleson norm of a cell density over net-aligned balls inside delta0."""
    grid = density.grid
    if r_min is None:
        r_min = max(8.0 * grid.h, delta0.radius / 64.0)
    if r_min >= delta0.radius:
        balls = [surface_ball(delta0.center, delta0.radius)]
    else:
        balls = candidate_balls(delta0, r_min)
    scores = [cell_box_integral(density, b, kind=kind) / b.ball_measure() for b in balls]
    return _argmax_ball(scores, balls)


def hardy_check(a, q: float) -> tuple[float, float]:
    """Both sides of the discrete Hardy inequality for a nonnegative sequence.

    lhs = sum_m ((1/(m+1)) sum_{j<=m} a_j)^q, rhs = (q/(q-1))^q sum a_m^q.
    The classical sharp constant (q/(q-1))^q is used on the right.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("sequence must be one-dimensional")
    if np.any(a < 0.0):
        raise ValueError("Hardy inequality requires nonnegative entries")
    if not q > 1.0:
        raise ValueError(f"need q > 1, got {q}")
    if a.size == 0:
        return 0.0, 0.0
    cesaro = np.cumsum(a) / (np.arange(a.size) + 1.0)
    lhs = float(np.sum(cesaro**q))
    rhs = (q / (q - 1.0)) ** q * float(np.sum(a**q))
    return lhs, rhs
