"""Impulse-control quasi-variational inequality: F(D^2 u) >= f, u <= Mu,
solved by the outer fixed-point iteration over frozen-obstacle problems.

Each outer step freezes the implicit obstacle Mu(u^k) and solves one
upper-side obstacle problem; the map is monotone, so iterates decrease
pointwise (after the first) and no damping is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from . import operators
from .grid import GridFunction
from .intervention import CostFunction, intervention_operator
from .operators import ObstacleSide, OperatorSpec
from .solve import ObstacleProblem, default_tol, solve_obstacle, solve_unconstrained

DEFAULT_MAX_OUTER = 200


@dataclass(frozen=True)
class QVIProblem:
    spec: OperatorSpec
    cost: CostFunction
    f: GridFunction
    boundary_data: GridFunction

    def __post_init__(self):
        g = self.cost.phi.grid
        if self.f.grid != g or self.boundary_data.grid != g:
            raise ValueError("grid mismatch")

    @property
    def grid(self):
        return self.f.grid


@dataclass
class QVIReport:
    outer_iterations: int
    sup_diffs: list = field(default_factory=list)
    final_residual: float = np.inf
    monotone: bool = True
    converged: bool = False
    inner_sweeps: int = 0

    def to_json_dict(self) -> dict:
        return asdict(self)


def qvi_residual(u: GridFunction, p: QVIProblem) -> float:
    """max |min(F(D^2 u) - f, Mu - u)| over interior nodes, with Mu
    recomputed from u itself (self-consistency)."""
    mu = intervention_operator(u, p.cost)
    r = operators.complementarity_residual(p.spec, u, mu, p.f, ObstacleSide.UPPER)
    return float(np.max(np.abs(r.values[p.grid.interior_mask])))


def solve_qvi(p: QVIProblem, outer_tol: float | None = None,
              inner_tol: float | None = None,
              max_outer: int = DEFAULT_MAX_OUTER):
    """Bensoussan-Lions iteration: u0 unconstrained, then
    u^{k+1} = obstacle solve with obstacle Mu(u^k), until the sup-difference
    of iterates drops below outer_tol."""
    if outer_tol is None:
        outer_tol = 1e-6 * p.cost.phi.max_abs()
    if inner_tol is None:
        inner_tol = default_tol(p.f, p.grid)
    if outer_tol <= 0 or inner_tol <= 0:
        raise ValueError("tolerances must be positive")

    report = QVIReport(outer_iterations=0)
    u, rep0 = solve_unconstrained(p.spec, p.f, p.boundary_data, tol=inner_tol)
    report.inner_sweeps += rep0.iterations
    if not rep0.converged:
        report.final_residual = qvi_residual(u, p)
        return u, report

    for k in range(max_outer):
        obstacle = intervention_operator(u, p.cost)
        prob = ObstacleProblem(p.spec, ObstacleSide.UPPER, obstacle, p.f,
                               p.boundary_data, check_admissible=False)
        u_next, rep = solve_obstacle(prob, tol=inner_tol, u0=u)
        report.inner_sweeps += rep.iterations
        report.outer_iterations = k + 1
        d = float(np.max(np.abs(u_next.values - u.values)))
        report.sup_diffs.append(d)
        if k >= 1:
            excess = float(np.max(u_next.values - u.values))
            if excess > inner_tol:
                report.monotone = False
        if not rep.converged:
            u = u_next
            break
        u = u_next
        if d <= outer_tol:
            break

    report.final_residual = qvi_residual(u, p)
    report.converged = (report.sup_diffs[-1] <= outer_tol
                        if report.sup_diffs else False)
    return u, report


@dataclass
class QVICheck:
    pde_violation: float
    constraint_violation: float
    complementarity: float
    boundary_violation: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.pde_violation, self.constraint_violation,
                   self.complementarity, self.boundary_violation) <= self.tol

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def check_qvi(u: GridFunction, p: QVIProblem, tol: float) -> QVICheck:
    """Report the maximal violation of each QVI constraint separately."""
    grid = p.grid
    interior = grid.interior_mask
    Fv = operators.apply_operator(p.spec, u).values
    mu = intervention_operator(u, p.cost).values
    pde = float(np.max(np.clip(p.f.values - Fv, 0, None)[interior]))
    constr = float(np.max(np.clip(u.values - mu, 0, None)[interior]))
    comp = float(np.max(np.abs(np.minimum(Fv - p.f.values,
                                          mu - u.values))[interior]))
    bdry = float(np.max(np.abs(u.values - p.boundary_data.values)
                        [grid.boundary_mask]))
    return QVICheck(pde_violation=pde, constraint_violation=constr,
                    complementarity=comp, boundary_violation=bdry, tol=tol)
