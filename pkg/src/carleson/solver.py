"""Finite-difference solver for -div(A grad u) = 0 on the truncated box.

The operator is assembled from a per-cell energy: straight-gradient terms use
the two-point differences along each of the cell's edges, mixed terms couple
the cell-centered average gradients.  For symmetric A this makes the
eliminated system symmetric positive definite by construction (each cell's
quadratic form is bounded below by the pointwise ellipticity constant), while
for A = Id the scheme collapses to the standard 5-point (2-D) / 7-point (3-D)
Laplacian.  Mixed derivatives widen the stencil to the full cell neighborhood
(9 points in 2-D, 27 in 3-D).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .coefficients import CoefficientField, DiagonalProfileField
from .geometry import HalfSpaceGrid, Region, cell_mask


class SolverFailure(RuntimeError):
    """Iteration failed to converge; carries the residual history."""

    def __init__(self, message: str, residual_history: list[float]):
        super().__init__(message)
        self.residual_history = residual_history


@dataclass
class BoundaryData:
    """Dirichlet data: `bottom` on {t=0}, `lateral_top` on the other faces.

    Both are callables taking an (m, d+1) array of points.  For the
    positive-solution scenarios bottom must vanish identically and the
    lateral/top data must be positive away from the bottom edge.
    """

    bottom: object = None
    lateral_top: object = None
    positive_contract: bool = False

    def values(self, points: np.ndarray, on_bottom: np.ndarray) -> np.ndarray:
        out = np.zeros(points.shape[0])
        if self.bottom is not None:
            out[on_bottom] = np.asarray(self.bottom(points[on_bottom]), dtype=float)
        side = ~on_bottom
        if self.lateral_top is not None:
            out[side] = np.asarray(self.lateral_top(points[side]), dtype=float)
        if self.positive_contract:
            if self.bottom is not None and np.any(out[on_bottom] != 0.0):
                raise ValueError("positive-solution contract requires zero bottom data")
            interior_side = side & (points[:, -1] > 0.0)
            if np.any(out[interior_side] <= 0.0):
                raise ValueError("positive-solution contract requires positive side data")
        return out


def linear_boundary_data(grid: HalfSpaceGrid) -> BoundaryData:
    """Default positive-scenario data: 0 on the bottom, t/R on the sides/top."""
    return BoundaryData(
        bottom=None,
        lateral_top=lambda pts: pts[:, -1] / grid.R,
        positive_contract=True,
    )


def boundary_data_from(func) -> BoundaryData:
    """Dirichlet data given by one function of the point on all faces."""
    return BoundaryData(bottom=lambda p: func(p), lateral_top=lambda p: func(p))


def _corner_offsets(m: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=m))


def _cell_form_matrices(d: int, h: float):
    """Per-cell quadratic-form building blocks.

    Returns (corners, blocks): blocks map coefficient labels to (2^m x 2^m)
    matrices (already divided by the node volume h^{d+1} so assembled rows
    approximate -div(A grad u)).  Mixed pairs are split into a symmetric and
    an antisymmetric block so that symmetric coefficient fields assemble into
    a bitwise-symmetric matrix.
    """
    m = d + 1
    corners = _corner_offsets(m)
    n_c = len(corners)
    # edge-difference weight vectors per direction
    edge_vecs: dict[int, list[np.ndarray]] = {i: [] for i in range(m)}
    for i in range(m):
        for base in corners:
            if base[i] == 1:
                continue
            partner = tuple(base[k] + (1 if k == i else 0) for k in range(m))
            w = np.zeros(n_c)
            w[corners.index(partner)] = 1.0 / h
            w[corners.index(base)] = -1.0 / h
            edge_vecs[i].append(w)
    avg_vecs = {i: sum(edge_vecs[i]) / len(edge_vecs[i]) for i in range(m)}
    blocks = {}
    for i in range(m):
        acc = np.zeros((n_c, n_c))
        for w in edge_vecs[i]:
            acc += np.outer(w, w)
        blocks[("diag", i)] = acc / len(edge_vecs[i])
        for j in range(i + 1, m):
            # a_ij d_j u d_i v + a_ji d_i u d_j v, regrouped as
            # (a_ij + a_ji)/2 * (B + B^T) + (a_ij - a_ji)/2 * (B - B^T)
            b = np.outer(avg_vecs[i], avg_vecs[j])
            blocks[("sym", i, j)] = b + b.T
            blocks[("skw", i, j)] = b - b.T
    # cell volume h^{d+1} cancels the node volume in the row normalization
    return corners, blocks


@dataclass
class AssembledSystem:
    """Eliminated Dirichlet system together with the data to rebuild fields."""

    grid: HalfSpaceGrid
    matrix: sp.csr_matrix            # interior-interior block
    rhs: np.ndarray
    interior_flat: np.ndarray        # flat node indices of the unknowns
    boundary_values: np.ndarray      # full node array with boundary data set
    symmetric: bool
    has_mixed: bool
    full_matrix: sp.csr_matrix | None = None

    @property
    def n_unknowns(self) -> int:
        return self.rhs.size


def assemble(
    field_A: CoefficientField,
    grid: HalfSpaceGrid,
    bc: BoundaryData,
    face_average: str = "arithmetic",
    keep_full: bool = False,
) -> AssembledSystem:
    """Assemble the conservative discretization with Dirichlet elimination.

    face_average selects how the vertical-flux coefficient is averaged over
    each cell for scalar-profile fields: "arithmetic" uses the interval mean
    of a(t), "harmonic" the interval harmonic mean (exact fluxes for the
    piecewise Green profiles).  Other fields are sampled at cell centers.
    """
    field_A.validate_on_grid(grid)
    d, h = grid.d, grid.h
    m = d + 1
    corners, blocks = _cell_form_matrices(d, h)
    n_c = len(corners)

    acell = np.array(field_A.cell_values(grid), copy=True)  # cell_shape + (m, m)
    if isinstance(field_A, DiagonalProfileField):
        _override_profile_averages(acell, field_A, grid, face_average)
    elif face_average != "arithmetic":
        raise ValueError("harmonic averaging is only defined for diagonal profiles")

    node_shape = grid.node_shape
    strides = np.array([int(np.prod(node_shape[k + 1:])) for k in range(m)])

    cell_axes = [np.arange(s) for s in grid.cell_shape]
    cell_idx = np.meshgrid(*cell_axes, indexing="ij")
    base_flat = sum(cell_idx[k].ravel() * strides[k] for k in range(m))
    corner_flat = [base_flat + int(np.dot(off, strides)) for off in corners]

    coeff = {}
    for key in blocks:
        if key[0] == "diag":
            coeff[key] = acell[..., key[1], key[1]].ravel()
        elif key[0] == "sym":
            coeff[key] = 0.5 * (acell[..., key[1], key[2]] + acell[..., key[2], key[1]]).ravel()
        else:
            coeff[key] = 0.5 * (acell[..., key[1], key[2]] - acell[..., key[2], key[1]]).ravel()

    n_cells = base_flat.size
    rows = np.empty(n_cells * n_c * n_c, dtype=np.int64)
    cols = np.empty_like(rows)
    vals = np.zeros(n_cells * n_c * n_c)
    pos = 0
    for p in range(n_c):
        for q in range(n_c):
            w_pq = np.zeros(n_cells)
            for key, block in blocks.items():
                bpq = block[p, q]
                if bpq != 0.0:
                    w_pq += bpq * coeff[key]
            sl = slice(pos, pos + n_cells)
            rows[sl] = corner_flat[p]
            cols[sl] = corner_flat[q]
            vals[sl] = w_pq
            pos += n_cells

    n_nodes = int(np.prod(node_shape))
    full = sp.coo_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    if field_A.is_symmetric:
        # the cell energy is symmetric; drop duplicate-summation rounding noise
        full = (0.5 * (full + full.T)).tocsr()

    interior_mask = np.ones(node_shape, dtype=bool)
    for axis in range(m):
        sl = [slice(None)] * m
        sl[axis] = 0
        interior_mask[tuple(sl)] = False
        sl[axis] = -1
        interior_mask[tuple(sl)] = False
    interior_flat = np.flatnonzero(interior_mask.ravel())
    boundary_flat = np.flatnonzero(~interior_mask.ravel())

    mesh = grid.node_mesh()
    pts = np.stack([ax.ravel()[boundary_flat] for ax in mesh], axis=1)
    on_bottom = pts[:, -1] == 0.0
    bvals = bc.values(pts, on_bottom)

    u_b = np.zeros(n_nodes)
    u_b[boundary_flat] = bvals

    a_ii = full[interior_flat][:, interior_flat].tocsr()
    a_ib = full[interior_flat][:, boundary_flat].tocsr()
    rhs = -a_ib @ bvals

    symmetric = field_A.is_symmetric
    return AssembledSystem(
        grid=grid,
        matrix=a_ii,
        rhs=rhs,
        interior_flat=interior_flat,
        boundary_values=u_b,
        symmetric=symmetric,
        has_mixed=field_A.has_mixed_terms,
        full_matrix=full if keep_full else None,
    )


def _override_profile_averages(acell, field_A, grid, face_average):
    """Replace sampled diagonal values with exact vertical-interval averages."""
    prof = field_A.profile
    tn = grid.vertical_nodes()
    n = grid.n
    arith = np.array([prof.integrate_a(tn[j], tn[j + 1]) / grid.h for j in range(n)])
    if face_average == "harmonic":
        vert = np.array([grid.h / prof.integrate_inv(tn[j], tn[j + 1]) for j in range(n)])
    elif face_average == "arithmetic":
        vert = arith
    else:
        raise ValueError(f"unknown face averaging {face_average!r}")
    m = grid.d + 1
    for i in range(m):
        vals = vert if i == m - 1 else arith
        shape = (1,) * grid.d + (n,)
        acell[..., i, i] = vals.reshape(shape)


@dataclass
class DiscreteSolution:
    """Nodal solution values with cached difference fields."""

    grid: HalfSpaceGrid
    values: np.ndarray                   # node_shape
    iterations: int = 0
    residual: float = 0.0
    _gradient: np.ndarray | None = field(default=None, repr=False)
    _hessian: np.ndarray | None = field(default=None, repr=False)
    _hessian_mask: np.ndarray | None = field(default=None, repr=False)

    @property
    def gradient(self) -> np.ndarray:
        """Cell-centered gradient, shape cell_shape + (d+1,)."""
        if self._gradient is None:
            self._gradient = _cell_gradient(self.values, self.grid)
        return self._gradient

    @property
    def hessian(self) -> np.ndarray:
        """Node-centered second differences, shape node_shape + (d+1, d+1)."""
        if self._hessian is None:
            self._hessian, self._hessian_mask = _node_hessian(self.values, self.grid)
        return self._hessian

    @property
    def hessian_mask(self) -> np.ndarray:
        if self._hessian_mask is None:
            _ = self.hessian
        return self._hessian_mask

    def value_at(self, x, t: float) -> float:
        """Nodal value at a point that must sit on (or round to) a node."""
        g = self.grid
        idx = []
        for xc in np.atleast_1d(x):
            idx.append(int(round((xc + g.R) / g.h)))
        idx.append(int(round(t / g.h)))
        for k, i in enumerate(idx):
            if not 0 <= i < self.values.shape[k]:
                raise ValueError(f"point ({x}, {t}) outside the grid box")
        return float(self.values[tuple(idx)])

    def scaled(self, c: float) -> "DiscreteSolution":
        return DiscreteSolution(self.grid, c * self.values,
                                iterations=self.iterations, residual=self.residual)


def differentiate(u: DiscreteSolution):
    """Return (gradient, hessian) difference fields, computing caches."""
    return u.gradient, u.hessian


def _cell_gradient(values: np.ndarray, grid: HalfSpaceGrid) -> np.ndarray:
    m = grid.d + 1
    corners = _corner_offsets(m)
    grad = np.zeros(grid.cell_shape + (m,))
    cs = grid.cell_shape
    for axis in range(m):
        acc = np.zeros(cs)
        count = 0
        for off in corners:
            if off[axis] == 1:
                continue
            hi = tuple(slice(o + (1 if k == axis else 0), s + o + (1 if k == axis else 0))
                       for k, (o, s) in enumerate(zip(off, cs)))
            lo = tuple(slice(o, s + o) for o, s in zip(off, cs))
            acc += values[hi] - values[lo]
            count += 1
        grad[..., axis] = acc / (count * grid.h)
    return grad


def _node_hessian(values: np.ndarray, grid: HalfSpaceGrid):
    """Second central differences; valid only >= 2h from every face."""
    m = grid.d + 1
    h2 = grid.h**2
    shape = values.shape
    hess = np.zeros(shape + (m, m))
    inner = tuple(slice(1, s - 1) for s in shape)
    for i in range(m):
        up = tuple(slice(2, s) if k == i else slice(1, s - 1) for k, s in enumerate(shape))
        dn = tuple(slice(0, s - 2) if k == i else slice(1, s - 1) for k, s in enumerate(shape))
        hess[inner + (i, i)] = (values[up] - 2.0 * values[inner] + values[dn]) / h2
    for i in range(m):
        for j in range(i + 1, m):
            def _shift(di, dj):
                return tuple(
                    slice(1 + (di if k == i else dj if k == j else 0),
                          s - 1 + (di if k == i else dj if k == j else 0))
                    for k, s in enumerate(shape)
                )
            mixed = (values[_shift(1, 1)] - values[_shift(1, -1)]
                     - values[_shift(-1, 1)] + values[_shift(-1, -1)]) / (4.0 * h2)
            hess[inner + (i, j)] = mixed
            hess[inner + (j, i)] = mixed
    mask = np.zeros(shape, dtype=bool)
    core = tuple(slice(2, s - 2) for s in shape)
    mask[core] = True
    return hess, mask


# ---------------------------------------------------------------------------
# Krylov solvers
# ---------------------------------------------------------------------------


def _pcg(a: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int):
    """Jacobi-preconditioned CG; returns (x, iterations, residual history)."""
    diag = a.diagonal()
    if np.any(diag <= 0.0):
        raise SolverFailure("non-positive diagonal in SPD solve", [])
    inv_d = 1.0 / diag
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_d * r
    p = z.copy()
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b)) or 1.0
    history = [float(np.linalg.norm(r)) / bnorm]
    if history[-1] <= tol:
        return x, 0, history
    for it in range(1, max_iter + 1):
        ap = a @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if rel <= tol:
            return x, it, history
        z = inv_d * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverFailure(
        f"CG did not reach tol={tol:g} in {max_iter} iterations "
        f"(final residual {history[-1]:.3e})",
        history,
    )


def _cgnr(a: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int):
    """CG on the normal equations for mildly nonsymmetric systems."""
    at = a.T.tocsr()
    x = np.zeros_like(b)
    r = b.copy()
    z = at @ r
    p = z.copy()
    zz = float(z @ z)
    bnorm = float(np.linalg.norm(b)) or 1.0
    history = [float(np.linalg.norm(r)) / bnorm]
    if history[-1] <= tol:
        return x, 0, history
    for it in range(1, max_iter + 1):
        ap = a @ p
        alpha = zz / float(ap @ ap)
        x += alpha * p
        r -= alpha * ap
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if rel <= tol:
            return x, it, history
        z = at @ r
        zz_new = float(z @ z)
        p = z + (zz_new / zz) * p
        zz = zz_new
    raise SolverFailure(
        f"CGNR did not reach tol={tol:g} in {max_iter} iterations "
        f"(final residual {history[-1]:.3e})",
        history,
    )


def solve(
    system: AssembledSystem,
    tol: float = 1e-10,
    max_iter: int | None = None,
    method: str = "auto",
    check_positive: bool = False,
) -> DiscreteSolution:
    """Solve the eliminated system to a relative residual <= tol.

    method "auto" uses conjugate gradients for symmetric fields and CG on the
    normal equations otherwise; "direct" uses a sparse LU factorization.
    """
    n = system.n_unknowns
    if max_iter is None:
        max_iter = max(2000, 30 * int(math.isqrt(n)))
    if method == "auto":
        method = "cg" if system.symmetric else "cgnr"
    if method == "cg":
        x, iters, history = _pcg(system.matrix, system.rhs, tol, max_iter)
    elif method == "cgnr":
        x, iters, history = _cgnr(system.matrix, system.rhs, tol, max_iter)
    elif method == "direct":
        from scipy.sparse.linalg import splu

        x = splu(system.matrix.tocsc()).solve(system.rhs)
        iters, history = 1, [0.0]
    else:
        raise ValueError(f"unknown solver method {method!r}")

    values = system.boundary_values.copy()
    values[system.interior_flat] = x
    values = values.reshape(system.grid.node_shape)
    sol = DiscreteSolution(system.grid, values, iterations=iters,
                           residual=history[-1] if history else 0.0)
    if check_positive:
        interior = sol.values[tuple(slice(1, -1) for _ in system.grid.node_shape)]
        if interior.size and interior.min() <= 0.0:
            msg = (f"solution is not positive in the interior "
                   f"(min {interior.min():.3e})")
            if system.has_mixed:
                warnings.warn(msg + "; mixed terms can break discrete monotonicity")
            else:
                raise SolverFailure(msg, [])
    return sol


def solve_dirichlet(
    field_A: CoefficientField,
    grid: HalfSpaceGrid,
    bc: BoundaryData,
    tol: float = 1e-10,
    max_iter: int | None = None,
    method: str = "auto",
    face_average: str = "arithmetic",
    check_positive: bool = False,
) -> DiscreteSolution:
    """Assemble and solve in one step."""
    system = assemble(field_A, grid, bc, face_average=face_average)
    return solve(system, tol=tol, max_iter=max_iter, method=method,
                 check_positive=check_positive)


def subbox_grid_and_data(u: DiscreteSolution, center, radius: float):
    """Extract the pencil sub-box Delta(center, radius) x (0, radius] of u.

    Returns (subgrid, boundary data interpolating u on the sub-box faces,
    node slice tuple).  The sub-box must be node-aligned.
    """
    g = u.grid
    c = np.atleast_1d(np.asarray(center, dtype=float))
    nr = radius / g.h
    if abs(nr - round(nr)) > 1e-9:
        raise ValueError("sub-box radius must be a multiple of h")
    slices = []
    for axis in range(g.d):
        i0 = (c[axis] - radius + g.R) / g.h
        if abs(i0 - round(i0)) > 1e-9:
            raise ValueError("sub-box must be node-aligned")
        i0 = int(round(i0))
        slices.append(slice(i0, i0 + 2 * int(round(nr)) + 1))
    slices.append(slice(0, int(round(nr)) + 1))
    sub_values = u.values[tuple(slices)]
    subgrid = HalfSpaceGrid(d=g.d, R=radius, h=g.h)
    offsets = np.array([c[axis] for axis in range(g.d)] + [0.0])

    def data(points):
        pts = points + offsets  # sub-box coordinates -> parent coordinates
        idx = []
        for axis in range(g.d):
            idx.append(np.round((pts[:, axis] + g.R) / g.h).astype(int))
        idx.append(np.round(pts[:, -1] / g.h).astype(int))
        return u.values[tuple(idx)]

    bc = BoundaryData(bottom=data, lateral_top=data)
    return subgrid, bc, tuple(slices)


def energy_identity_gap(system: AssembledSystem, sol: DiscreteSolution) -> float:
    """|u^T M u - boundary flux pairing| for the full (uneliminated) form.

    Zero up to the solver tolerance: the interior rows of the full matrix
    annihilate the solution, so the bilinear form reduces to the boundary
    pairing.
    """
    if system.full_matrix is None:
        raise ValueError("assemble with keep_full=True to check the energy identity")
    u_flat = sol.values.ravel()
    mu = system.full_matrix @ u_flat
    total = float(u_flat @ mu)
    boundary = np.setdiff1d(np.arange(u_flat.size), system.interior_flat)
    pairing = float(u_flat[boundary] @ mu[boundary])
    return abs(total - pairing)


def diagnostics(
    u: DiscreteSolution,
    field_A: CoefficientField,
    x,
    r: float,
    region_kind: str = "pencil",
) -> dict:
    """Dimensionless boundary-behavior ratios on the box above Delta(x, r).

    Reports the corkscrew ratio E r^2 / u(X)^2, the boundary-Harnack ratio
    sup_T u / u(X), and the Caccioppoli ratio r^2 mean|grad u|^2(T_r) /
    mean u^2(T_2r); each should sit in an ellipticity-dependent band.
    """
    from .functionals import energy  # local import to avoid a cycle

    g = u.grid
    reg = Region(region_kind, tuple(np.atleast_1d(x)), float(r))
    reg2 = Region(region_kind, reg.center, 2.0 * r)
    corkscrew_value = u.value_at(reg.center, r)
    e_r = energy(u, reg)
    mask1 = cell_mask(reg, g)
    mask2 = cell_mask(reg2, g)
    # cell-centered values by corner averaging
    m = g.d + 1
    cvals = np.zeros(g.cell_shape)
    for off in _corner_offsets(m):
        sl = tuple(slice(o, s + o) for o, s in zip(off, g.cell_shape))
        cvals += u.values[sl]
    cvals /= 2.0**m
    sup_u = float(np.abs(cvals[mask1]).max())
    mean_u2_2r = float((cvals[mask2] ** 2).mean())
    return {
        "corkscrew": e_r * r**2 / corkscrew_value**2,
        "harnack": sup_u / corkscrew_value,
        "caccioppoli": r**2 * e_r / mean_u2_2r,
        "corkscrew_point_value": corkscrew_value,
    }
