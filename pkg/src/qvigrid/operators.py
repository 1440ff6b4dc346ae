"""Discrete fully nonlinear operators F(D^2 u) and complementarity residuals.

Pucci extremal values follow the usual convention
    M+(M) = Lam * sum(e_i > 0) e_i + lam * sum(e_i < 0) e_i,
    M-(M) = lam * sum(e_i > 0) e_i + Lam * sum(e_i < 0) e_i,
which makes M- <= Bellman <= M+ and the ellipticity inequality
lam*||P|| <= F(M+P) - F(M) <= Lam*n*||P|| (P >= 0, spectral norm) hold for
every implemented kind.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import Grid, GridFunction

LAPLACE = "laplace"
PUCCI_PLUS = "pucci_plus"
PUCCI_MINUS = "pucci_minus"
BELLMAN_MIN = "bellman_min"
BELLMAN_MAX = "bellman_max"
KINDS = (LAPLACE, PUCCI_PLUS, PUCCI_MINUS, BELLMAN_MIN, BELLMAN_MAX)

# integer codes shared with the numba kernels
KIND_CODES = {k: i for i, k in enumerate(KINDS)}


class ObstacleSide(Enum):
    """Lower: u >= phi with F(D^2 u) <= f.  Upper: u <= psi with F(D^2 u) >= f."""

    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class OperatorSpec:
    """Which discrete F is used, with ellipticity constants 0 < lam <= Lam.

    Bellman kinds take a finite family of symmetric coefficient matrices,
    each with spectrum in [lam, Lam].
    """

    kind: str
    lam: float = 1.0
    Lam: float = 1.0
    matrices: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}; choose from {KINDS}")
        if not (0 < self.lam <= self.Lam):
            raise ValueError(f"need 0 < lam <= Lam, got {self.lam}, {self.Lam}")
        mats = tuple(np.asarray(A, dtype=np.float64) for A in self.matrices)
        if self.kind in (BELLMAN_MIN, BELLMAN_MAX):
            if not mats:
                raise ValueError("Bellman operator needs a nonempty coefficient family")
            for A in mats:
                if A.ndim != 2 or A.shape[0] != A.shape[1]:
                    raise ValueError("coefficient matrices must be square")
                if not np.allclose(A, A.T, atol=1e-12):
                    raise ValueError("coefficient matrices must be symmetric")
                eigs = np.linalg.eigvalsh(A)
                if eigs.min() < self.lam - 1e-10 or eigs.max() > self.Lam + 1e-10:
                    raise ValueError(
                        f"coefficient spectrum {eigs} outside [{self.lam}, {self.Lam}]")
        for A in mats:
            A.flags.writeable = False
        object.__setattr__(self, "matrices", mats)

    @property
    def is_convex(self) -> bool:
        return self.kind in (PUCCI_PLUS, BELLMAN_MAX, LAPLACE)


def dual(spec: OperatorSpec) -> OperatorSpec:
    """The operator F~ with F~(M) = -F(-M); maps the two obstacle sides onto
    each other via v = -u."""
    pairs = {LAPLACE: LAPLACE, PUCCI_PLUS: PUCCI_MINUS, PUCCI_MINUS: PUCCI_PLUS,
             BELLMAN_MIN: BELLMAN_MAX, BELLMAN_MAX: BELLMAN_MIN}
    return OperatorSpec(pairs[spec.kind], spec.lam, spec.Lam, spec.matrices)


def evaluate(spec: OperatorSpec, M) -> float:
    """F applied to one symmetric matrix (1x1 or 2x2)."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if spec.kind == LAPLACE:
        return float(np.trace(M))
    if spec.kind in (PUCCI_PLUS, PUCCI_MINUS):
        if M.shape[0] == 1:
            eigs = np.array([M[0, 0]])
        else:
            mean = 0.5 * (M[0, 0] + M[1, 1])
            r = np.hypot(0.5 * (M[0, 0] - M[1, 1]), M[0, 1])
            eigs = np.array([mean - r, mean + r])
        pos = eigs[eigs > 0].sum()
        neg = eigs[eigs < 0].sum()
        if spec.kind == PUCCI_PLUS:
            return float(spec.Lam * pos + spec.lam * neg)
        return float(spec.lam * pos + spec.Lam * neg)
    traces = [float(np.trace(A @ M)) for A in spec.matrices]
    return min(traces) if spec.kind == BELLMAN_MIN else max(traces)


def discrete_hessian(u: GridFunction, node) -> np.ndarray:
    """Centered second differences at an interior node; exact on quadratics."""
    g = u.grid
    node = tuple(int(i) for i in np.atleast_1d(node))
    if not g.is_interior(node):
        raise ValueError(f"node {node} lacks full stencil support (near boundary)")
    v = u.values
    h2 = g.h * g.h
    if g.dim == 1:
        (i,) = node
        return np.array([[(v[i + 1] + v[i - 1] - 2 * v[i]) / h2]])
    i, j = node
    d11 = (v[i + 1, j] + v[i - 1, j] - 2 * v[i, j]) / h2
    d22 = (v[i, j + 1] + v[i, j - 1] - 2 * v[i, j]) / h2
    d12 = (v[i + 1, j + 1] + v[i - 1, j - 1] - v[i + 1, j - 1] - v[i - 1, j + 1]) / (4 * h2)
    return np.array([[d11, d12], [d12, d22]])


def hessian_components(u: GridFunction):
    """Vectorized interior Hessian entries; NaN on boundary nodes."""
    g = u.grid
    v = u.values
    h2 = g.h * g.h
    if g.dim == 1:
        d11 = np.full(g.shape, np.nan)
        d11[1:-1] = (v[2:] + v[:-2] - 2 * v[1:-1]) / h2
        return (d11,)
    d11 = np.full(g.shape, np.nan)
    d22 = np.full(g.shape, np.nan)
    d12 = np.full(g.shape, np.nan)
    d11[1:-1, 1:-1] = (v[2:, 1:-1] + v[:-2, 1:-1] - 2 * v[1:-1, 1:-1]) / h2
    d22[1:-1, 1:-1] = (v[1:-1, 2:] + v[1:-1, :-2] - 2 * v[1:-1, 1:-1]) / h2
    d12[1:-1, 1:-1] = (v[2:, 2:] + v[:-2, :-2] - v[2:, :-2] - v[:-2, 2:]) / (4 * h2)
    return d11, d22, d12


def hessian_field(u: GridFunction) -> np.ndarray:
    """Hessian at every node, shape (*grid.shape, dim, dim); NaN where undefined."""
    g = u.grid
    comps = hessian_components(u)
    H = np.full(g.shape + (g.dim, g.dim), np.nan)
    if g.dim == 1:
        H[..., 0, 0] = comps[0]
    else:
        d11, d22, d12 = comps
        H[..., 0, 0] = d11
        H[..., 1, 1] = d22
        H[..., 0, 1] = d12
        H[..., 1, 0] = d12
    return H


def _apply_to_components(spec: OperatorSpec, comps) -> np.ndarray:
    if len(comps) == 1:
        (d11,) = comps
        if spec.kind == LAPLACE:
            return d11
        if spec.kind == PUCCI_PLUS:
            return np.where(d11 >= 0, spec.Lam * d11, spec.lam * d11)
        if spec.kind == PUCCI_MINUS:
            return np.where(d11 >= 0, spec.lam * d11, spec.Lam * d11)
        coefs = np.array([A[0, 0] for A in spec.matrices])
        traces = coefs[:, None] * d11.reshape(1, -1)
        red = traces.min(axis=0) if spec.kind == BELLMAN_MIN else traces.max(axis=0)
        return red.reshape(d11.shape)
    d11, d22, d12 = comps
    if spec.kind == LAPLACE:
        return d11 + d22
    if spec.kind in (PUCCI_PLUS, PUCCI_MINUS):
        mean = 0.5 * (d11 + d22)
        r = np.hypot(0.5 * (d11 - d22), d12)
        e1, e2 = mean + r, mean - r
        pos = np.clip(e1, 0, None) + np.clip(e2, 0, None)
        neg = np.clip(e1, None, 0) + np.clip(e2, None, 0)
        if spec.kind == PUCCI_PLUS:
            return spec.Lam * pos + spec.lam * neg
        return spec.lam * pos + spec.Lam * neg
    traces = np.stack([A[0, 0] * d11 + A[1, 1] * d22 + 2 * A[0, 1] * d12
                       for A in spec.matrices])
    return traces.min(axis=0) if spec.kind == BELLMAN_MIN else traces.max(axis=0)


def apply_operator(spec: OperatorSpec, u: GridFunction) -> GridFunction:
    """F on the discrete Hessian at interior nodes; NaN sentinel on the boundary."""
    g = u.grid
    if not g.interior_mask.any():
        raise ValueError("grid has no interior nodes")
    out = _apply_to_components(spec, hessian_components(u))
    return GridFunction(g, out)


def complementarity_residual(spec: OperatorSpec, u: GridFunction,
                             obstacle: GridFunction, f: GridFunction,
                             side: ObstacleSide) -> GridFunction:
    """min of the two constraint slacks; zero exactly at a discrete solution.

    Lower side: r = min(f - F(D^2 u), u - phi).
    Upper side: r = min(F(D^2 u) - f, psi - u).
    NaN sentinel on boundary nodes.
    """
    for other in (obstacle, f):
        if other.grid != u.grid:
            raise ValueError("grid mismatch")
    Fv = apply_operator(spec, u).values
    if side == ObstacleSide.LOWER:
        r = np.minimum(f.values - Fv, u.values - obstacle.values)
    else:
        r = np.minimum(Fv - f.values, obstacle.values - u.values)
    r = np.where(u.grid.boundary_mask, np.nan, r)
    return GridFunction(u.grid, r)
