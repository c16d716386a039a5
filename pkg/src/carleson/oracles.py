"""Closed-form ground truth: dyadic counterexample family, vertical Green
profiles, and separable harmonic test solutions.

The counterexample coefficient is a(t) * Id where a alternates between 1 and
2 on dyadic blocks ([4^k, 2*4^k) -> 1, [2*4^k, 4^{k+1}) -> 2 for k <= 49),
equals 3/2 above 2^100, and is truncated to 3/2 below 2^{-2n}.  Transitions
can be smoothed over strips of relative width c0 with monotone cubic ramps
that hold the value 3/2 on a small plateau around each 2^k.  All derived
quantities (block averages, the normalized non-affine energy of the vertical
Green profile, classical-oscillation sums) come from the package's own exact
piecewise quadrature, never from transcribed formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import HalfSpaceGrid, surface_ball_measure
from .profiles import Profile1D, Segment, smoothstep_coeffs
from .solver import DiscreteSolution

K_TOP = 100          # a is constant 3/2 above 2^K_TOP
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _block_value(k: int) -> float:
    """Value of the unsmoothed profile on [2^k, 2^{k+1}) for k < K_TOP."""
    return 1.0 if k % 2 == 0 else 2.0


def counterexample_profile(n: int, c0: float) -> Profile1D:
    """The truncated oscillating profile a_n with smoothing width c0.

    Breakpoints sit at 2^k +/- c0 2^{k-1} for k in [-2n, K_TOP]; c0 = 0 gives
    jumps.  Each smoothing strip is ramp / plateau(3/2) / ramp with cubic
    monotone ramps of zero endpoint slope, so |a'| <= 6/(c0 2^k) on the strip
    at 2^k.
    """
    if n < 1:
        raise ValueError(f"cutoff index must be >= 1, got {n}")
    if not 0.0 <= c0 <= 0.125:
        raise ValueError(f"smoothing width must be in [0, 1/8], got {c0}")
    segs: list[Segment] = []
    lo_k = -2 * n
    if c0 == 0.0:
        segs.append(Segment(0.0, 2.0**lo_k, (1.5,)))
        for k in range(lo_k, K_TOP):
            segs.append(Segment(2.0**k, 2.0**(k + 1), (_block_value(k),)))
        segs.append(Segment(2.0**K_TOP, math.inf, (1.5,)))
        return Profile1D(segs)

    def left_value(k: int) -> float:
        return 1.5 if k == lo_k else _block_value(k - 1)

    def right_value(k: int) -> float:
        return 1.5 if k == K_TOP else _block_value(k)

    t = 0.0
    for k in range(lo_k, K_TOP + 1):
        p = 2.0**k
        strip_lo = p - c0 * p / 2.0
        plateau_lo = p - c0 * p / 4.0
        plateau_hi = p + c0 * p / 4.0
        strip_hi = p + c0 * p / 2.0
        vl, vr = left_value(k), right_value(k)
        segs.append(Segment(t, strip_lo, (vl,)))
        if vl == 1.5:
            segs.append(Segment(strip_lo, plateau_lo, (1.5,)))
        else:
            segs.append(Segment(strip_lo, plateau_lo,
                                smoothstep_coeffs(vl, 1.5, plateau_lo - strip_lo)))
        segs.append(Segment(plateau_lo, plateau_hi, (1.5,)))
        if vr == 1.5:
            segs.append(Segment(plateau_hi, strip_hi, (1.5,)))
        else:
            segs.append(Segment(plateau_hi, strip_hi,
                                smoothstep_coeffs(1.5, vr, strip_hi - plateau_hi)))
        t = strip_hi
    segs.append(Segment(t, math.inf, (1.5,)))
    return Profile1D(segs)


@dataclass(frozen=True)
class CounterexampleFamily:
    """Truncation index n >= 1 and smoothing width c0 in [0, 1/8]."""

    n: int
    c0: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"cutoff index must be >= 1, got {self.n}")
        if not 0.0 <= self.c0 <= 0.125:
            raise ValueError(f"smoothing width must be in [0, 1/8], got {self.c0}")

    @cached_property
    def profile(self) -> Profile1D:
        return counterexample_profile(self.n, self.c0)

    @property
    def r_flat(self) -> float:
        """Below this radius the truncated profile is constant (beta = 0)."""
        return 2.0 ** (-2 * self.n)

    def avg_b(self, r: float) -> float:
        """Mean of b = 1/a over (0, r), by exact piecewise quadrature."""
        if not 0.0 < r <= 2.0**K_TOP:
            raise ValueError(f"radius must be in (0, 2^{K_TOP}], got {r}")
        return self.profile.integrate_inv(0.0, r) / r

    def avg_b_displayed(self, r: float) -> float:
        """The block-average formula as displayed in the source construction.

        Kept only as a cross-check: it carries an extra 2^{-2n}/(2r) term
        relative to direct integration of the stated block pattern.
        """
        k0 = math.floor(math.log2(r))
        corr = 2.0 ** (-2 * self.n) / (2.0 * r)
        if k0 % 2 == 0:
            return 1.0 + corr - 2.0**k0 / (3.0 * r)
        return 0.5 + corr + 2.0**k0 / (3.0 * r)

    def beta_closed(self, r: float) -> float:
        """Normalized non-affine energy of the vertical Green profile at scale r.

        Equals int_0^r (b - mean b)^2 / int_0^r b^2 with b = 1/a; independent
        of the lateral center by construction.
        """
        if not r > 0.0:
            raise ValueError(f"radius must be positive, got {r}")
        prof = self.profile
        ib = prof.integrate_inv(0.0, r)
        ib2 = prof.integrate_inv_sq(0.0, r)
        mean = ib / r
        num = ib2 - r * mean * mean
        if ib2 <= 0.0:
            return 0.0
        val = num / ib2
        return min(max(val, 0.0), 1.0)

    def beta_floor(self) -> float:
        """The guaranteed lower bound (3/4 - 4 c0)/1000 for mid-range radii."""
        return (0.75 - 4.0 * self.c0) / 1000.0

    def carleson_lower_witness(self, R0: float, r_min: float, d: int = 1) -> float:
        """Scale-integral of beta over the witness ball Delta(0, R0).

        Evaluates (|Delta_{R0}| / R0^d) * int beta(r) dr/r over
        [max(r_min, 4 r_flat), R0] by per-panel Gauss quadrature between
        profile breakpoints.
        """
        if not 1.0 <= R0 < 2.0**K_TOP:
            raise ValueError(f"witness radius must be in [1, 2^{K_TOP}), got {R0}")
        lo = max(r_min, 4.0 * self.r_flat)
        if lo >= R0:
            raise ValueError(f"truncation {lo:g} leaves an empty radius range")
        edges = [lo] + self.profile.breakpoints_in(lo, R0) + [R0]
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            rs = mid + half * _GL_NODES
            vals = np.array([self.beta_closed(r) / r for r in rs])
            total += half * float(np.dot(_GL_WEIGHTS, vals))
        return surface_ball_measure(d, R0) / R0**d * total

    def dkp_constant(self) -> float:
        """Classical-oscillation Carleson sup sum_k int_{S_k} a'(t)^2 t dt.

        The 1-D reduction of the norm of |grad A|^2 t: the sup over surface
        balls of the column integral, which is monotone in the column height
        and so equals the full vertical integral.  Infinite when c0 = 0.
        """
        if self.c0 == 0.0:
            return math.inf
        prof = self.profile
        return prof.integrate_dsq_t(0.0, 2.0**K_TOP * (1.0 + self.c0))

    def smoothing_shape_constant(self) -> float:
        """kappa: c0 * (one full strip's a'^2 t integral) at unit scale.

        The strip at 2^k contributes ~ kappa / c0, so the classical constant
        of the truncated family is ~ (2n + K_TOP) * kappa / c0.
        """
        if self.c0 == 0.0:
            raise ValueError("shape constant requires a positive smoothing width")
        w = self.c0 / 4.0
        ramp = Profile1D([
            Segment(0.0, 1.0, (1.0,)),
            Segment(1.0, 1.0 + w, smoothstep_coeffs(1.0, 1.5, w)),
            Segment(1.0 + w, math.inf, (1.5,)),
        ])
        one_ramp_at_unit_t = ramp.integrate_dsq_t(1.0, 1.0 + w) / (1.0 + 0.5 * w)
        return 2.0 * self.c0 * one_ramp_at_unit_t


def green_profile_solution(profile: Profile1D, grid: HalfSpaceGrid,
                           normalize: bool = False) -> DiscreteSolution:
    """Sample the vertical Green profile g(t) = int_0^t 1/a on grid nodes.

    g is the unique (up to scale) positive solution for a(t) * Id that
    vanishes on the whole bottom boundary; x-independent by construction.
    With normalize=True the top value is scaled to 1.
    """
    tn = grid.vertical_nodes()
    gvals = np.empty_like(tn)
    gvals[0] = 0.0
    for j in range(1, tn.size):
        gvals[j] = gvals[j - 1] + profile.integrate_inv(tn[j - 1], tn[j])
    if normalize:
        gvals = gvals / gvals[-1]
    shape = grid.node_shape
    values = np.broadcast_to(gvals.reshape((1,) * grid.d + (-1,)), shape).copy()
    return DiscreteSolution(grid, values)


def green_boundary_data(profile: Profile1D, normalize_R: float | None = None):
    """Dirichlet data matching the vertical Green profile on all faces."""
    from .solver import BoundaryData

    scale = 1.0 / profile.g(normalize_R) if normalize_R else 1.0

    def data(points):
        return np.array([scale * profile.g(t) for t in points[:, -1]])

    return BoundaryData(bottom=None, lateral_top=data,
                        positive_contract=normalize_R is not None)


@dataclass(frozen=True)
class SinhTestSolution:
    """u = t + eps sin(k x1) sinh(k t): harmonic, vanishing on the bottom.

    Positivity on the box [-R, R]^d x [0, R] requires eps sinh(kR) < R,
    checked at construction.
    """

    eps: float
    k: float
    R: float

    def __post_init__(self):
        if self.eps < 0.0 or self.k <= 0.0:
            raise ValueError("need eps >= 0 and k > 0")
        if self.eps * math.sinh(self.k * self.R) >= self.R:
            raise ValueError(
                f"positivity fails: eps*sinh(kR) = "
                f"{self.eps * math.sinh(self.k * self.R):.3g} >= R = {self.R}"
            )

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        x1, t = points[:, 0], points[:, -1]
        return t + self.eps * np.sin(self.k * x1) * np.sinh(self.k * t)

    def sample(self, grid: HalfSpaceGrid) -> DiscreteSolution:
        if grid.R > self.R:
            raise ValueError("grid box exceeds the validated positivity box")
        mesh = grid.node_mesh()
        pts = np.stack([ax.ravel() for ax in mesh], axis=1)
        values = self(pts).reshape(grid.node_shape)
        return DiscreteSolution(grid, values)

    def boundary_data(self):
        from .solver import BoundaryData

        return BoundaryData(bottom=None, lateral_top=lambda p: self(p),
                            positive_contract=True)

    def functionals(self, x0: float, r: float) -> dict:
        """Exact (slope, energy, nonaffine, beta) on Delta(x0, r) x (0, r], d=1.

        Separable closed forms: lateral averages of sin/cos pair with
        vertical averages of sinh/cosh.
        """
        k, eps = self.k, self.eps
        kr = k * r
        sx = math.sin(k * x0) * math.sin(kr) / kr
        cos2 = 0.5 + math.cos(2.0 * k * x0) * math.sin(2.0 * kr) / (4.0 * kr)
        sin2 = 1.0 - cos2
        ct = math.sinh(kr) / kr
        sh2 = 0.5 * (math.sinh(2.0 * kr) / (2.0 * kr) - 1.0)
        ch2 = 0.5 * (math.sinh(2.0 * kr) / (2.0 * kr) + 1.0)
        lam = 1.0 + eps * k * sx * ct
        e = 1.0 + 2.0 * eps * k * sx * ct + (eps * k) ** 2 * (cos2 * sh2 + sin2 * ch2)
        j = e - lam * lam
        return {"lambda": lam, "energy": e, "nonaffine": j, "beta": j / e}
