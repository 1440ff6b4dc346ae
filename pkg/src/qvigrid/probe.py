"""Numerical probes for the regularity quantities the estimates control:
second increments, semiconcavity/semiconvexity constants, contact sets,
growth from the free boundary, and Hoelder seminorms of the Hessian.

All probes are pure read-only analyses, deterministic given their seed, and
scale-covariant: multiplying u by c > 0 multiplies every measured constant
by c.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators
from .grid import Grid, GridFunction, NodeSet, nearest_in_set
from .operators import ObstacleSide


@dataclass(frozen=True)
class ModulusFamily:
    """omega(r) = constant * r^(1+exponent); exponent 1 is the quadratic case."""

    constant: float
    exponent: float = 1.0

    def __post_init__(self):
        if self.constant < 0:
            raise ValueError("modulus constant must be >= 0")
        if not (0 < self.exponent <= 1):
            raise ValueError("modulus exponent must lie in (0, 1]")

    def omega(self, r):
        return self.constant * np.asarray(r, dtype=np.float64) ** (1.0 + self.exponent)


@dataclass
class ProbeReport:
    """Named scalar metrics plus the sample (witness) achieving each extremum."""

    metrics: dict
    witnesses: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "metrics": {k: float(v) for k, v in self.metrics.items()},
            "witnesses": {k: list(np.atleast_1d(v).tolist())
                          for k, v in self.witnesses.items()},
        }


@dataclass(frozen=True)
class ContactSet:
    nodes: NodeSet
    tol: float
    free_boundary: NodeSet


_AXIS_DIRS = {1: ((1,),), 2: ((1, 0), (0, 1))}
_ALL_DIRS = {1: ((1,),), 2: ((1, 0), (0, 1), (1, 1), (1, -1))}


def second_increment(u: GridFunction, x, e, k: int = 1) -> float:
    """Raw second increment u(x + k h e) + u(x - k h e) - 2 u(x)."""
    g = u.grid
    x = tuple(int(i) for i in np.atleast_1d(x))
    e = tuple(int(i) for i in np.atleast_1d(e))
    up = tuple(x[d] + k * e[d] for d in range(g.dim))
    dn = tuple(x[d] - k * e[d] for d in range(g.dim))
    for node in (up, dn):
        if any(not (0 <= node[d] < g.m[d]) for d in range(g.dim)):
            raise ValueError(f"offset node {node} leaves the grid")
    return float(u.values[up] + u.values[dn] - 2.0 * u.values[x])


def extract_contact_set(u: GridFunction, obstacle: GridFunction,
                        side: ObstacleSide, tol: float) -> ContactSet:
    """Contact nodes {|u - obstacle| <= tol}; the free boundary is the set of
    contact nodes with at least one non-contact neighbor."""
    if obstacle.grid != u.grid:
        raise ValueError("grid mismatch")
    g = u.grid
    contact = np.abs(u.values - obstacle.values) <= tol
    fb = np.zeros(g.shape, dtype=bool)
    for d in range(g.dim):
        sl_lo = [slice(None)] * g.dim
        sl_hi = [slice(None)] * g.dim
        sl_lo[d] = slice(None, -1)
        sl_hi[d] = slice(1, None)
        lo, hi = tuple(sl_lo), tuple(sl_hi)
        fb[lo] |= contact[lo] & ~contact[hi]
        fb[hi] |= contact[hi] & ~contact[lo]
    return ContactSet(nodes=NodeSet.from_mask(g, contact), tol=tol,
                      free_boundary=NodeSet.from_mask(g, fb))


def _obstacle_slopes(obstacle: GridFunction, modulus: ModulusFamily) -> np.ndarray:
    """Slope p of the tangent plane at each node: gradient of the mollified
    obstacle (a computable stand-in for a superdifferential element)."""
    from .penalty import mollify_obstacle  # local import: penalty uses probe too

    g = obstacle.grid
    smooth = mollify_obstacle(obstacle, 2 * g.h, modulus.constant).phi_delta
    if g.dim == 1:
        return np.gradient(smooth.values, g.h)[None, :]
    return np.stack(np.gradient(smooth.values, g.h))


def growth_constant(u: GridFunction, obstacle: GridFunction,
                    contact: ContactSet, modulus: ModulusFamily) -> ProbeReport:
    """Growth from the free boundary: for non-contact nodes x1 at distance
    rho >= 2h from the nearest contact node x0, measure
    max |u - L_{x0}|(x1) / omega(2 rho) and the Lipschitz variant
    max |u(x1) - u(x0)| / rho."""
    g = u.grid
    if len(contact.nodes) == 0:
        raise ValueError("empty contact set")
    dist, nearest_idx = nearest_in_set(g, contact.nodes)
    slopes = _obstacle_slopes(obstacle, modulus)
    coords = g.coords()
    rho = dist.values
    eligible = ~contact.nodes.mask & (rho >= 2 * g.h - 1e-12) & g.interior_mask
    n = int(eligible.sum())
    if n == 0:
        return ProbeReport(metrics={"growth_constant": 0.0,
                                    "lipschitz_constant": 0.0, "n_samples": 0.0})
    x1 = np.nonzero(eligible)
    x0 = tuple(nearest_idx[d][eligible] for d in range(g.dim))
    dx = np.stack([coords[..., d][x1] - coords[..., d][x0] for d in range(g.dim)])
    p = np.stack([slopes[d][x0] for d in range(g.dim)])
    L = obstacle.values[x0] + (p * dx).sum(axis=0)
    w = np.abs(u.values[x1] - L)
    rhos = rho[eligible]
    ratios = w / modulus.omega(2 * rhos)
    lip = np.abs(u.values[x1] - u.values[x0]) / rhos
    i_k = int(np.argmax(ratios))
    i_l = int(np.argmax(lip))
    witness_k = tuple(int(ax[i_k]) for ax in x1)
    witness_l = tuple(int(ax[i_l]) for ax in x1)
    return ProbeReport(
        metrics={"growth_constant": float(ratios[i_k]),
                 "lipschitz_constant": float(lip[i_l]), "n_samples": float(n)},
        witnesses={"growth_constant": witness_k, "lipschitz_constant": witness_l})


def contact_oscillation(u: GridFunction, obstacle: GridFunction,
                        contact: ContactSet, modulus: ModulusFamily,
                        max_pairs: int = 2000, seed: int = 0) -> ProbeReport:
    """Oscillation between contact points: max over sampled contact pairs
    (x0, x1) of (u(x1) - L_{x0}(x1)) / omega(|x1 - x0|)."""
    g = u.grid
    nodes = np.array(sorted(contact.nodes.indices))
    if nodes.size < 2:
        raise ValueError("need at least 2 contact nodes")
    if nodes.size > max_pairs:
        rng = np.random.default_rng(seed)
        nodes = np.sort(rng.choice(nodes, size=max_pairs, replace=False))
    idx = np.unravel_index(nodes, g.shape)
    coords = g.coords()
    pts = np.stack([coords[..., d][idx] for d in range(g.dim)], axis=-1)
    slopes = _obstacle_slopes(obstacle, modulus)
    p = np.stack([slopes[d][idx] for d in range(g.dim)], axis=-1)
    uv = u.values[idx]
    ov = obstacle.values[idx]
    # pairwise: rows are x0, columns x1
    dxy = pts[None, :, :] - pts[:, None, :]
    dist = np.sqrt((dxy ** 2).sum(axis=-1))
    L = ov[:, None] + (p[:, None, :] * dxy).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (uv[None, :] - L) / modulus.omega(dist)
    ratios[dist == 0] = -np.inf
    i0, i1 = np.unravel_index(np.argmax(ratios), ratios.shape)
    witness = (tuple(int(ax[i0]) for ax in idx), tuple(int(ax[i1]) for ax in idx))
    return ProbeReport(metrics={"oscillation_constant": float(ratios[i0, i1]),
                                "n_pairs": float(nodes.size * (nodes.size - 1))},
                       witnesses={"oscillation_constant": witness})


def semiconcavity_modulus(u: GridFunction, region: NodeSet, steps,
                          exponent: float = 1.0) -> ProbeReport:
    """Measured semiconcavity constant: max over region nodes, axis and
    diagonal directions, and step multiples k of
    delta^2 u(x; k h e) / (k h |e|)^{1+exponent}.  Per-k values are reported
    so scale-independence is checkable.  Offsets leaving the grid are
    skipped and counted."""
    g = u.grid
    if len(region) == 0:
        raise ValueError("empty region")
    steps = [int(k) for k in steps]
    if any(k < 1 for k in steps):
        raise ValueError("steps must be positive integers")
    mask = region.mask
    v = u.values
    best = -np.inf
    witness = None
    per_k = {}
    skipped = 0
    for k in steps:
        best_k = -np.inf
        for e in _ALL_DIRS[g.dim]:
            off = tuple(k * c for c in e)
            valid = np.ones(g.shape, dtype=bool)
            for d in range(g.dim):
                idxs = np.arange(g.m[d])
                ok = (idxs + off[d] < g.m[d]) & (idxs + off[d] >= 0) \
                    & (idxs - off[d] < g.m[d]) & (idxs - off[d] >= 0)
                sl = [None] * g.dim
                sl[d] = slice(None)
                valid &= ok[tuple(sl)]
            sel = mask & valid
            skipped += int((mask & ~valid).sum())
            if not sel.any():
                continue
            up = np.roll(v, tuple(-o for o in off), axis=tuple(range(g.dim)))
            dn = np.roll(v, off, axis=tuple(range(g.dim)))
            step_len = k * g.h * float(np.hypot.reduce(np.abs(e)))
            d2 = (up + dn - 2 * v) / step_len ** (1.0 + exponent)
            m = float(d2[sel].max())
            if m > best_k:
                best_k = m
            if m > best:
                best = m
                flat = int(np.flatnonzero((sel & (d2 == m)).reshape(-1))[0])
                witness = np.unravel_index(flat, g.shape)
        per_k[k] = best_k
    metrics = {"semiconcavity_constant": best, "skipped": float(skipped)}
    for k, val in per_k.items():
        metrics[f"constant_k{k}"] = val
    witnesses = {"semiconcavity_constant": witness} if witness is not None else {}
    return ProbeReport(metrics=metrics, witnesses=witnesses)


@dataclass(frozen=True)
class HessianField:
    """Discrete-Hessian values on a grid; NaN entries mark nodes excluded
    from the analysis (boundary or outside the requested mask)."""

    grid: Grid
    values: np.ndarray  # (*grid.shape, dim, dim)

    @classmethod
    def from_function(cls, u: GridFunction, mask: np.ndarray | None = None) -> "HessianField":
        H = operators.hessian_field(u)
        if mask is not None:
            H = H.copy()
            H[~np.asarray(mask, dtype=bool)] = np.nan
        return cls(u.grid, H)

    @property
    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.values).all(axis=(-2, -1))


def holder_seminorm(H: HessianField, alpha: float, sample_budget: int = 2000,
                    seed: int = 0) -> float:
    """max over sampled valid node pairs of ||H(x) - H(y)||_inf / |x - y|^alpha.

    Pairs: all pairs within distance 8h, plus deterministically seeded
    uniform long-range pairs up to the budget."""
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    g = H.grid
    valid = H.valid_mask
    n_valid = int(valid.sum())
    if n_valid < 2:
        return 0.0
    vals = H.values
    best = 0.0
    # short-range: every offset with 0 < |offset| <= 8h
    k = 8
    if g.dim == 1:
        offsets = [(o,) for o in range(1, k + 1)]
    else:
        offsets = [(a, b) for a in range(-k, k + 1) for b in range(0, k + 1)
                   if (b > 0 or a > 0) and a * a + b * b <= k * k]
    for off in offsets:
        sl_src = tuple(slice(max(0, -o), (g.m[d] - o) if o > 0 else g.m[d])
                       for d, o in enumerate(off))
        sl_dst = tuple(slice(max(0, o), (g.m[d] + o) if o < 0 else g.m[d])
                       for d, o in enumerate(off))
        ok = valid[sl_src] & valid[sl_dst]
        if not ok.any():
            continue
        diff = np.abs(vals[sl_src] - vals[sl_dst]).max(axis=(-2, -1))
        r = g.h * float(np.hypot.reduce(np.abs(off)))
        m = float(diff[ok].max()) / r ** alpha
        best = max(best, m)
    # long-range: seeded random pairs
    rng = np.random.default_rng(seed)
    flat_valid = np.flatnonzero(valid.reshape(-1))
    n_pairs = min(sample_budget, flat_valid.size * (flat_valid.size - 1) // 2)
    if n_pairs > 0:
        ia = flat_valid[rng.integers(0, flat_valid.size, size=n_pairs)]
        ib = flat_valid[rng.integers(0, flat_valid.size, size=n_pairs)]
        keep = ia != ib
        ia, ib = ia[keep], ib[keep]
        xa = np.stack(np.unravel_index(ia, g.shape), axis=-1) * g.h
        xb = np.stack(np.unravel_index(ib, g.shape), axis=-1) * g.h
        r = np.sqrt(((xa - xb) ** 2).sum(axis=-1))
        va = vals.reshape(-1, g.dim, g.dim)[ia]
        vb = vals.reshape(-1, g.dim, g.dim)[ib]
        diff = np.abs(va - vb).max(axis=(-2, -1))
        ratios = diff / r ** alpha
        if ratios.size:
            best = max(best, float(ratios.max()))
    return best
