"""Projected nonlinear Gauss-Seidel solvers for F(D^2 u) = f and the
discrete obstacle problem.

Sweeps alternate lexicographic and reverse-lexicographic order and are
bit-deterministic.  Convergence is declared on the complementarity (or PDE)
residual; the sweep update size only gates when the residual is checked.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels, operators
from .grid import Grid, GridFunction
from .operators import ObstacleSide, OperatorSpec

DEFAULT_MAX_SWEEPS = 10 ** 6
_SWEEP_CHUNK = 100


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    sup_update: float
    converged: bool

    def to_json_dict(self) -> dict:
        return asdict(self)


def default_tol(f: GridFunction, grid: Grid) -> float:
    return 1e-8 * (1.0 + f.max_abs()) * grid.diameter() ** 2


def _op_args(spec: OperatorSpec, dim: int):
    """(kind_code, cmin, cmax, a11, a12, a22) for the kernels."""
    kind = operators.KIND_CODES[spec.kind]
    empty = np.zeros(0)
    if spec.kind in (operators.BELLMAN_MIN, operators.BELLMAN_MAX):
        if dim == 1:
            coefs = np.array([A[0, 0] for A in spec.matrices])
            return kind, coefs.min(), coefs.max(), empty, empty, empty
        a11 = np.ascontiguousarray([A[0, 0] for A in spec.matrices])
        a12 = np.ascontiguousarray([A[0, 1] for A in spec.matrices])
        a22 = np.ascontiguousarray([A[1, 1] for A in spec.matrices])
        return kind, 0.0, 0.0, a11, a12, a22
    return kind, spec.lam, spec.Lam, empty, empty, empty


def _run_sweeps(grid, v, f_vals, obst_vals, obs_mode, spec, pen, tol, max_iter,
                residual_fn):
    """Shared solver loop; mutates v in place, returns SolveReport."""
    kind, cmin, cmax, a11, a12, a22 = _op_args(spec, grid.dim)
    pen_kind, eps, cap_n, phi_pen = pen
    h2 = grid.h * grid.h
    upd_gate = tol * h2
    sweeps = 0
    upd = np.inf
    residual = np.inf
    converged = False
    while sweeps < max_iter:
        chunk = min(_SWEEP_CHUNK, max_iter - sweeps)
        if grid.dim == 1:
            upd = _kernels.gauss_seidel_1d(
                v, f_vals, obst_vals, obs_mode, kind, spec.lam, spec.Lam,
                cmin, cmax, h2, pen_kind, eps, cap_n, phi_pen, chunk, sweeps % 2)
        else:
            upd = _kernels.gauss_seidel_2d(
                v, f_vals, obst_vals, obs_mode, kind, spec.lam, spec.Lam,
                a11, a12, a22, h2, pen_kind, eps, cap_n, phi_pen, chunk, sweeps % 2)
        sweeps += chunk
        if upd < upd_gate:
            residual = residual_fn(v)
            if residual <= tol:
                converged = True
                break
            if upd == 0.0:
                break  # stalled at machine precision
            upd_gate *= 0.25
    if not converged and not np.isfinite(residual):
        residual = residual_fn(v)
        converged = residual <= tol
    return SolveReport(iterations=sweeps, final_residual=float(residual),
                       sup_update=float(upd), converged=converged)


def _init_values(grid, boundary_data, u0):
    v = np.array((u0 if u0 is not None else boundary_data).values, dtype=np.float64)
    v[grid.boundary_mask] = boundary_data.values[grid.boundary_mask]
    return v


def solve_unconstrained(spec: OperatorSpec, f: GridFunction,
                        boundary_data: GridFunction, tol: float | None = None,
                        max_iter: int | None = None,
                        u0: GridFunction | None = None):
    """Solve F(D^2 u) = f with Dirichlet data by nonlinear Gauss-Seidel."""
    grid = f.grid
    if boundary_data.grid != grid:
        raise ValueError("grid mismatch")
    if tol is None:
        tol = default_tol(f, grid)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = DEFAULT_MAX_SWEEPS
    v = _init_values(grid, boundary_data, u0)
    interior = grid.interior_mask

    def residual_fn(vals):
        Fv = operators.apply_operator(spec, GridFunction(grid, vals)).values
        return float(np.max(np.abs((Fv - f.values)[interior])))

    pen = (-1, 0.0, -1.0, np.zeros_like(v))
    report = _run_sweeps(grid, v, f.values, np.zeros_like(v), 0, spec, pen,
                         tol, max_iter, residual_fn)
    return GridFunction(grid, v), report


@dataclass(frozen=True)
class ObstacleProblem:
    """Data of one obstacle problem; boundary_data is used on boundary nodes
    only.  The constraint is enforced at interior nodes.

    Admissibility (lower: obstacle <= boundary_data on the boundary; upper:
    obstacle >= boundary_data) is checked unless check_admissible=False —
    the QVI outer loop disables it because the implicit obstacle Mu may dip
    below the boundary data while the constraint itself lives on the open
    interior.
    """

    spec: OperatorSpec
    side: ObstacleSide
    obstacle: GridFunction
    f: GridFunction
    boundary_data: GridFunction
    check_admissible: bool = True

    def __post_init__(self):
        g = self.obstacle.grid
        if self.f.grid != g or self.boundary_data.grid != g:
            raise ValueError("grid mismatch")
        if self.check_admissible:
            bm = g.boundary_mask
            gap = self.obstacle.values[bm] - self.boundary_data.values[bm]
            tol = 1e-12 * (1.0 + self.obstacle.max_abs())
            if self.side == ObstacleSide.LOWER and gap.max() > tol:
                raise ValueError("inadmissible: obstacle exceeds boundary data")
            if self.side == ObstacleSide.UPPER and gap.min() < -tol:
                raise ValueError("inadmissible: obstacle below boundary data")


def solve_obstacle(p: ObstacleProblem, tol: float | None = None,
                   max_iter: int | None = None, u0: GridFunction | None = None):
    """Projected nonlinear Gauss-Seidel: scalar node solve, then clip to the
    obstacle.  Converged when max |complementarity residual| <= tol."""
    grid = p.f.grid
    if tol is None:
        tol = default_tol(p.f, grid)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = DEFAULT_MAX_SWEEPS
    v = _init_values(grid, p.boundary_data, u0)
    interior = grid.interior_mask
    obs_mode = 1 if p.side == ObstacleSide.LOWER else 2
    clip = np.maximum if p.side == ObstacleSide.LOWER else np.minimum
    v[interior] = clip(v, p.obstacle.values)[interior]

    def residual_fn(vals):
        r = operators.complementarity_residual(
            p.spec, GridFunction(grid, vals), p.obstacle, p.f, p.side).values
        return float(np.max(np.abs(r[interior])))

    pen = (-1, 0.0, -1.0, np.zeros_like(v))
    report = _run_sweeps(grid, v, p.f.values, np.asarray(p.obstacle.values),
                         obs_mode, p.spec, pen, tol, max_iter, residual_fn)
    return GridFunction(grid, v), report
