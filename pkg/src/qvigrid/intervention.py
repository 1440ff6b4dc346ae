"""The nonlocal intervention operator Mu = phi + min over the positive cone,
and its argmin-set diagnostics.

The cone is componentwise >= on node indices (the shift xi = 0 included);
minimization never leaves the closed box.  The cone minimum is a single
reverse-lexicographic dynamic-programming sweep, O(N) total.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, NodeSet, nearest_in_set


@dataclass(frozen=True)
class CostFunction:
    """Switching cost phi: strictly positive and non-increasing along every
    +e_i direction, with a semiconcavity modulus omega(r) = C r^(1+s)."""

    phi: GridFunction
    semiconcavity_constant: float = 0.0
    modulus_exponent: float = 1.0

    def __post_init__(self):
        vals = self.phi.values
        if vals.min() <= 0:
            raise ValueError("switching cost must be strictly positive")
        tol = 1e-12 * (1.0 + float(np.abs(vals).max()))
        for d in range(self.phi.grid.dim):
            if np.diff(vals, axis=d).max() > tol:
                raise ValueError(f"switching cost increases along +e_{d}")
        if self.semiconcavity_constant < 0:
            raise ValueError("semiconcavity constant must be >= 0")
        if not (0 < self.modulus_exponent <= 1):
            raise ValueError("modulus exponent must lie in (0, 1]")


def cone_min(u: GridFunction) -> GridFunction:
    """m(x) = min over nodes y >= x (componentwise, including y = x) of u(y)."""
    v = u.values
    if u.grid.dim == 1:
        m = np.minimum.accumulate(v[::-1])[::-1]
        return GridFunction(u.grid, m)
    m = np.empty_like(v)
    m0 = v.shape[0]
    m[m0 - 1, :] = np.minimum.accumulate(v[m0 - 1, ::-1])[::-1]
    for i in range(m0 - 2, -1, -1):
        row = np.minimum(v[i, :], m[i + 1, :])
        m[i, :] = np.minimum.accumulate(row[::-1])[::-1]
    return GridFunction(u.grid, m)


def intervention_operator(u: GridFunction, cost: CostFunction) -> GridFunction:
    """Mu = phi + cone_min(u), pointwise."""
    if cost.phi.grid != u.grid:
        raise ValueError("grid mismatch")
    return GridFunction(u.grid, cost.phi.values + cone_min(u).values)


def _cone_mask(grid: Grid, x: tuple[int, ...]) -> np.ndarray:
    mask = np.ones(grid.shape, dtype=bool)
    for d, xd in enumerate(x):
        idx = np.arange(grid.m[d])
        sl = [None] * grid.dim
        sl[d] = slice(None)
        mask &= (idx >= xd)[tuple(sl)]
    return mask


def argmin_set(u: GridFunction, x, tol: float) -> NodeSet:
    """All nodes y >= x with u(y) <= cone_min(u)(x) + tol.  Ties kept."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    x = tuple(int(i) for i in np.atleast_1d(x))
    m = cone_min(u).values[x]
    mask = _cone_mask(u.grid, x) & (u.values <= m + tol)
    return NodeSet.from_mask(u.grid, mask)


def default_contact_tol(u: GridFunction) -> float:
    return 10.0 * u.grid.h ** 2 * (1.0 + u.max_abs())


@dataclass(frozen=True)
class SeparationResult:
    """Measured distance between the contact set {u = Mu} and the argmin
    sets; +inf with has_contact=False when the constraint never binds."""

    delta: float
    has_contact: bool
    n_contact: int


def separation_delta(u: GridFunction, cost: CostFunction,
                     contact_tol: float | None = None) -> SeparationResult:
    """Minimum over contact nodes x0 of the distance from argmin_set(u, x0)
    to the contact set; strictly positive for a valid QVI solution."""
    if contact_tol is None:
        contact_tol = default_contact_tol(u)
    grid = u.grid
    mu = intervention_operator(u, cost)
    contact_mask = (mu.values - u.values) <= contact_tol
    n_contact = int(contact_mask.sum())
    if n_contact == 0:
        return SeparationResult(delta=np.inf, has_contact=False, n_contact=0)
    contact = NodeSet.from_mask(grid, contact_mask)
    dist, _ = nearest_in_set(grid, contact)
    cm = cone_min(u).values
    delta = np.inf
    for flat in sorted(contact.indices):
        x0 = np.unravel_index(flat, grid.shape)
        amin_mask = _cone_mask(grid, x0) & (u.values <= cm[x0] + contact_tol)
        delta = min(delta, float(dist.values[amin_mask].min()))
    return SeparationResult(delta=delta, has_contact=True, n_contact=n_contact)
