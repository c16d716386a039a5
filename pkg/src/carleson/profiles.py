"""Piecewise-polynomial scalar profiles a(t) on (0, oo) with exact integration.

A Profile1D is a sorted list of breakpoints and one polynomial per interval,
stored in local coordinates (t - t_left) so that segments living at very
large t (the dyadic counterexample reaches t = 2^100) stay well conditioned.
Polynomial integrands are integrated exactly by Gauss-Legendre; integrands
involving 1/a(t) are integrated with a high-order rule per segment, which is
exact on constant segments and accurate to machine precision on the smooth
polynomial segments used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 24-point Gauss-Legendre: exact for polynomials of degree <= 47.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class Segment:
    """Polynomial piece on [t0, t1): value = poly(t - t0), ascending coeffs."""

    t0: float
    t1: float
    coeffs: tuple[float, ...]

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t) - self.t0, self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative_coeffs(self) -> tuple[float, ...]:
        c = self.coeffs
        if len(c) == 1:
            return (0.0,)
        return tuple(k * c[k] for k in range(1, len(c)))


class Profile1D:
    """Piecewise-polynomial a(t), bounded between 1/mu0 and mu0.

    The final segment extends to +infinity with its polynomial frozen (all
    profiles used here end in a constant tail).
    """

    def __init__(self, segments: list[Segment]):
        if not segments:
            raise ValueError("profile needs at least one segment")
        for left, right in zip(segments, segments[1:]):
            if not math.isclose(left.t1, right.t0, rel_tol=1e-12, abs_tol=1e-300):
                raise ValueError(f"segments not contiguous at t={left.t1!r}")
        if segments[0].t0 != 0.0:
            raise ValueError("profile must start at t = 0")
        self.segments = list(segments)
        self._starts = np.array([s.t0 for s in segments])
        lo, hi = self.value_range()
        if lo <= 0.0:
            raise ValueError(f"profile must be positive, min value {lo}")
        self.mu0 = max(hi, 1.0 / lo)

    # -- evaluation -------------------------------------------------------

    def _segment_index(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._starts, t, side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.empty_like(tt)
        idx = self._segment_index(tt)
        for k in np.unique(idx):
            sel = idx == k
            out[sel] = self.segments[k](tt[sel])
        return float(out[0]) if scalar else out

    def derivative(self, t):
        """Pointwise a'(t) (one-sided at breakpoints, from the right)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.zeros_like(tt)
        idx = self._segment_index(tt)
        for k in np.unique(idx):
            sel = idx == k
            seg = self.segments[k]
            out[sel] = np.polynomial.polynomial.polyval(
                tt[sel] - seg.t0, seg.derivative_coeffs()
            )
        return float(out[0]) if scalar else out

    def value_range(self) -> tuple[float, float]:
        """Exact (min, max) of a over all segments."""
        lo, hi = math.inf, -math.inf
        for seg in self.segments:
            width = seg.t1 - seg.t0
            if not math.isfinite(width):
                width = 1.0
            ts = seg.t0 + width * np.linspace(0.0, 1.0, 8)
            vals = [seg(x) for x in ts[:-1]] + [seg(seg.t0 + width * (1 - 1e-12))]
            crit = _poly_critical_points(seg)
            vals.extend(seg(x) for x in crit)
            lo = min(lo, min(vals))
            hi = max(hi, max(vals))
        return float(lo), float(hi)

    # -- exact integration -------------------------------------------------

    def _panels(self, t0: float, t1: float):
        """Yield (segment, a, b) covering [t0, t1] split at breakpoints."""
        if t1 <= t0:
            return
        for seg in self.segments:
            a = max(t0, seg.t0)
            b = min(t1, seg.t1)
            if b > a:
                yield seg, a, b
            if seg.t1 >= t1:
                break

    def _integrate(self, func, t0: float, t1: float) -> float:
        """Gauss-Legendre of func(a(t)) per panel; exact for polynomial integrands."""
        total = 0.0
        for seg, a, b in self._panels(t0, t1):
            if seg.degree == 0:
                total += (b - a) * float(func(np.array(seg.coeffs[0])))
                continue
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            ts = mid + half * _GL_NODES
            vals = seg(ts)
            total += half * float(np.dot(_GL_WEIGHTS, func(vals)))
        return total

    def integrate_a(self, t0: float, t1: float) -> float:
        """Integral of a(t) over [t0, t1], exact per polynomial piece."""
        return self._integrate(lambda v: v, t0, t1)

    def integrate_inv(self, t0: float, t1: float) -> float:
        """Integral of 1/a(t); exact on constant pieces."""
        return self._integrate(lambda v: 1.0 / v, t0, t1)

    def integrate_inv_sq(self, t0: float, t1: float) -> float:
        """Integral of 1/a(t)^2."""
        return self._integrate(lambda v: v**-2.0, t0, t1)

    def integrate_sq_dev(self, t0: float, t1: float, c: float) -> float:
        """Integral of (a(t) - c)^2 over [t0, t1]."""
        return self._integrate(lambda v: (v - c) ** 2, t0, t1)

    def integrate_dsq_t(self, t0: float, t1: float) -> float:
        """Integral of a'(t)^2 * t (the classical-oscillation density)."""
        total = 0.0
        for seg, a, b in self._panels(t0, t1):
            if seg.degree == 0:
                continue
            dc = seg.derivative_coeffs()
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            ts = mid + half * _GL_NODES
            dv = np.polynomial.polynomial.polyval(ts - seg.t0, dc)
            total += half * float(np.dot(_GL_WEIGHTS, dv**2 * ts))
        return total

    def g(self, t: float) -> float:
        """Antiderivative g(t) = int_0^t 1/a(s) ds (vertical Green profile)."""
        return self.integrate_inv(0.0, float(t))

    def max_abs_derivative(self, t0: float, t1: float) -> float:
        """Exact sup of |a'| over [t0, t1] (checks endpoints and criticals)."""
        best = 0.0
        for seg, a, b in self._panels(t0, t1):
            if seg.degree == 0:
                continue
            dc = seg.derivative_coeffs()
            cand = [a, b]
            # critical points of a' are roots of a''
            if len(dc) > 1:
                ddc = tuple(k * dc[k] for k in range(1, len(dc)))
                roots = np.polynomial.polynomial.polyroots(ddc) + seg.t0
                cand.extend(r.real for r in roots if abs(r.imag) < 1e-12 and a <= r.real <= b)
            vals = np.abs(np.polynomial.polynomial.polyval(np.asarray(cand) - seg.t0, dc))
            best = max(best, float(vals.max()))
        return best

    def breakpoints_in(self, t0: float, t1: float) -> list[float]:
        return [s.t0 for s in self.segments if t0 < s.t0 < t1]


def _poly_critical_points(seg: Segment) -> list[float]:
    dc = seg.derivative_coeffs()
    if len(dc) == 1 and dc[0] == 0.0:
        return []
    roots = np.polynomial.polynomial.polyroots(dc)
    width = seg.t1 - seg.t0
    if not math.isfinite(width):
        width = 0.0
    out = []
    for r in roots:
        if abs(r.imag) < 1e-12 and 0.0 <= r.real <= width:
            out.append(seg.t0 + r.real)
    return out


def constant_profile(value: float, t_end: float = math.inf) -> Profile1D:
    return Profile1D([Segment(0.0, t_end, (float(value),))])


def step_profile(values: list[float], breakpoints: list[float]) -> Profile1D:
    """Piecewise-constant profile: values[k] on [b_{k-1}, b_k), b_{-1} = 0."""
    if len(values) != len(breakpoints) + 1:
        raise ValueError("need one more value than breakpoints")
    edges = [0.0] + [float(b) for b in breakpoints] + [math.inf]
    segs = [Segment(edges[k], edges[k + 1], (float(values[k]),)) for k in range(len(values))]
    return Profile1D(segs)


def smoothstep_coeffs(v0: float, v1: float, width: float, quintic: bool = False) -> tuple[float, ...]:
    """Local coefficients of a monotone ramp from v0 to v1 over [0, width].

    Cubic ramps have zero endpoint slopes; quintic ramps additionally have
    zero endpoint curvature (used for C^2 test profiles).
    """
    dv = v1 - v0
    w = width
    if quintic:
        return (v0, 0.0, 0.0, 10.0 * dv / w**3, -15.0 * dv / w**4, 6.0 * dv / w**5)
    return (v0, 0.0, 3.0 * dv / w**2, -2.0 * dv / w**3)


def smooth_bump_profile(
    base: float = 1.0,
    top: float = 1.5,
    t_up: tuple[float, float] = (0.25, 0.5),
    quintic: bool = True,
) -> Profile1D:
    """Smooth profile rising from `base` to `top` across one ramp; C^2 default."""
    a, b = t_up
    segs = [
        Segment(0.0, a, (base,)),
        Segment(a, b, smoothstep_coeffs(base, top, b - a, quintic=quintic)),
        Segment(b, math.inf, (top,)),
    ]
    return Profile1D(segs)
