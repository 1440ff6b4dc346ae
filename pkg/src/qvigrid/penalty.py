"""Penalization families beta_eps, obstacle mollification, the penalized
solver F(D^2 u) = beta_eps(u - phi), and epsilon-sweeps for the Hoelder-norm
decay law.

Two families are provided.  piecewise_linear is beta(t) = t/eps^2 for t < 0
and 0 otherwise: monotone (non-strict), concave, bounded above by 0, and the
family used for the decay study.  smooth_exp is beta(t) = -exp(-t/eps):
smooth, strictly increasing, concave, bounded above by 0, blowing up
pointwise for t < 0 as eps -> 0.  An optional cap clamps either family to
[-N, N].  Neither family satisfies every structural condition at once
(piecewise_linear is not smooth or strictly monotone); conditions_satisfied
reports which hold for a given family.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import ndimage

from . import operators
from ._kernels import gauss_seidel_1d, gauss_seidel_2d
from .grid import Grid, GridFunction
from .operators import OperatorSpec
from .probe import HessianField, holder_seminorm
from .solve import SolveReport, _op_args, _run_sweeps, _init_values, default_tol, \
    DEFAULT_MAX_SWEEPS

PIECEWISE_LINEAR = "piecewise_linear"
SMOOTH_EXP = "smooth_exp"
PEN_CODES = {PIECEWISE_LINEAR: 0, SMOOTH_EXP: 1}


@dataclass(frozen=True)
class PenaltyFamily:
    kind: str
    epsilon: float
    cap_N: float | None = None

    def __post_init__(self):
        if self.kind not in PEN_CODES:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if not (0 < self.epsilon < 1):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.cap_N is not None and self.cap_N <= 0:
            raise ValueError("cap_N must be positive")

    def conditions_satisfied(self) -> dict:
        smooth = self.kind == SMOOTH_EXP and self.cap_N is None
        return {
            "strictly_monotone": smooth,
            "vanishes_for_positive_t": True,
            "blows_up_for_negative_t": True,
            "bounded_above": True,
            "concave": self.cap_N is None,
            "smooth": smooth,
        }


def beta(fam: PenaltyFamily, t):
    """Family value at t (scalar or array); with cap_N, clamped to [-N, N]."""
    t = np.asarray(t, dtype=np.float64)
    if fam.kind == PIECEWISE_LINEAR:
        b = np.where(t < 0, t / fam.epsilon ** 2, 0.0)
    else:
        b = -np.exp(np.minimum(-t / fam.epsilon, 700.0))
    if fam.cap_N is not None:
        b = np.clip(b, -fam.cap_N, fam.cap_N)
    return float(b) if b.ndim == 0 else b


@dataclass(frozen=True)
class MollifiedObstacle:
    phi_delta: GridFunction
    delta: float
    semiconvexity_constant: float


def _bump_kernel(grid: Grid, delta: float) -> np.ndarray:
    k = int(np.floor(delta / grid.h))
    rng = np.arange(-k, k + 1) * grid.h
    if grid.dim == 1:
        r2 = rng ** 2
    else:
        r2 = rng[:, None] ** 2 + rng[None, :] ** 2
    w = np.clip(1.0 - r2 / delta ** 2, 0.0, None) ** 4
    return w / w.sum()


def mollify_obstacle(phi: GridFunction, delta: float, C: float) -> MollifiedObstacle:
    """Discrete convolution with a normalized polynomial bump of radius delta,
    applied to phi + (C/2)|x|^2, then (C/2)|x|^2 subtracted.  Near-boundary
    nodes renormalize the kernel over the in-domain support (no extension
    outside the box)."""
    grid = phi.grid
    if delta < grid.h:
        raise ValueError(f"delta = {delta} not resolvable on grid with h = {grid.h}")
    w = _bump_kernel(grid, delta)
    x2 = (grid.coords() ** 2).sum(axis=-1)
    aug = phi.values + 0.5 * C * x2
    num = ndimage.convolve(aug, w, mode="constant", cval=0.0)
    den = ndimage.convolve(np.ones(grid.shape), w, mode="constant", cval=0.0)
    vals = num / den - 0.5 * C * x2
    return MollifiedObstacle(phi_delta=GridFunction(grid, vals), delta=delta,
                             semiconvexity_constant=C)


def solve_penalized(spec: OperatorSpec, phi: GridFunction, fam: PenaltyFamily,
                    f: GridFunction, boundary_data: GridFunction,
                    tol: float | None = None, max_iter: int | None = None,
                    u0: GridFunction | None = None):
    """Solve F(D^2 u) = beta_eps(u - phi) + f with Dirichlet data; requires
    phi < 0 on the boundary.  The beta term joins each scalar node solve (it
    is non-decreasing, so the nodal map stays monotone)."""
    grid = phi.grid
    if f.grid != grid or boundary_data.grid != grid:
        raise ValueError("grid mismatch")
    if phi.values[grid.boundary_mask].max() >= 0:
        raise ValueError("obstacle must be strictly negative on the boundary")
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
        b = beta(fam, vals - phi.values)
        return float(np.max(np.abs((Fv - b - f.values)[interior])))

    cap = fam.cap_N if fam.cap_N is not None else -1.0
    pen = (PEN_CODES[fam.kind], fam.epsilon, cap, np.asarray(phi.values))
    report = _run_sweeps(grid, v, f.values, np.zeros_like(v), 0, spec, pen,
                         tol, max_iter, residual_fn)
    return GridFunction(grid, v), report


@dataclass
class DecayPoint:
    epsilon: float
    seminorm: float
    iterations: int
    beta_max: float
    min_second_increment_ratio: float


@dataclass
class DecayReport:
    alpha: float
    points: list
    slope: float
    r2: float
    skipped_epsilons: list = field(default_factory=list)
    solutions: list = field(default_factory=list)  # GridFunctions, not serialized

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "points": [asdict(pt) for pt in self.points],
            "slope": self.slope,
            "r2": self.r2,
            "skipped_epsilons": list(self.skipped_epsilons),
        }


def fit_decay(eps_values, seminorms):
    """Least-squares slope of log(seminorm) vs log(eps), with R^2."""
    x = np.log(np.asarray(eps_values, dtype=np.float64))
    y = np.log(np.asarray(seminorms, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(((y - fit) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def interior_margin_mask(grid: Grid, fraction: float = 0.1) -> np.ndarray:
    """Nodes at distance >= fraction * diam(box) from every boundary face."""
    # small slack so nodes sitting exactly on the margin line survive the
    # rounding in the axis construction
    margin = fraction * grid.diameter() - 1e-12 * grid.diameter()
    mask = np.ones(grid.shape, dtype=bool)
    for d in range(grid.dim):
        x = grid.axes[d]
        ok = (x - grid.lo[d] >= margin) & (grid.hi[d] - x >= margin)
        sl = [None] * grid.dim
        sl[d] = slice(None)
        mask &= ok[tuple(sl)]
    return mask


def epsilon_sweep(spec: OperatorSpec, phi: GridFunction, kind: str,
                  eps_list, alpha: float,
                  f: GridFunction | None = None,
                  boundary_data: GridFunction | None = None,
                  cap_N: float | None = None,
                  tol: float | None = None,
                  sample_budget: int = 5000, seed: int = 0) -> DecayReport:
    """Solve the penalized problem along eps_list and fit the log-log decay
    of the interior C^{2,alpha} seminorm of the discrete Hessian."""
    grid = phi.grid
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ValueError("need at least 4 epsilon values")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    ratios = [e1 / e2 for e1, e2 in zip(eps_list, eps_list[1:])]
    if max(ratios) > 3.0 * min(ratios):
        raise ValueError("eps_list must be (roughly) geometric")
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    if f is None:
        f = GridFunction.zeros(grid)
    if boundary_data is None:
        boundary_data = GridFunction.zeros(grid)

    margin = interior_margin_mask(grid)
    points = []
    skipped = []
    solutions = []
    for e in eps_list:
        if e <= 2 * grid.h:
            skipped.append(e)
            continue
        fam = PenaltyFamily(kind, e, cap_N)
        u, rep = solve_penalized(spec, phi, fam, f, boundary_data, tol=tol)
        Hvalid = margin & grid.interior_mask
        H = HessianField.from_function(u, mask=Hvalid)
        semi = holder_seminorm(H, alpha, sample_budget, seed=seed)
        b = beta(fam, u.values - phi.values)
        beta_max = float(np.max(np.abs(b[grid.interior_mask])))
        ratio = _min_second_increment_ratio(u)
        points.append(DecayPoint(epsilon=e, seminorm=semi,
                                 iterations=rep.iterations, beta_max=beta_max,
                                 min_second_increment_ratio=ratio))
        solutions.append(u)
    if len(points) < 2:
        raise ValueError("fewer than 2 resolvable epsilon values in the sweep")
    slope, r2 = fit_decay([pt.epsilon for pt in points],
                          [pt.seminorm for pt in points])
    return DecayReport(alpha=alpha, points=points, slope=slope, r2=r2,
                       skipped_epsilons=skipped, solutions=solutions)


def _min_second_increment_ratio(u: GridFunction) -> float:
    """min over interior axis directions of the second difference quotient
    delta^2 u / h^2 — the measured semiconvexity floor of a penalized
    solution."""
    comps = operators.hessian_components(u)
    if u.grid.dim == 1:
        vals = comps[0]
    else:
        vals = np.minimum(comps[0], comps[1])
    return float(np.nanmin(vals))
