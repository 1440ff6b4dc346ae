"""Named analytic problem presets, evaluated onto a grid.

classical   - impulse control with unit switching cost (phi = 1, Laplacian,
              f = 1, zero boundary data).
classical01 - same with switching cost 0.1; the constraint binds.
oracle1d    - 1D obstacle problem with obstacle 1/2 - x^2 on (-1, 1), f = 0:
              has a closed-form solution with contact set [-a, a],
              a = 1 - sqrt(2)/2.
oracle2d    - 2D analogue with obstacle 1/2 - x^2 - y^2 on (-1, 1)^2.
penalty_decay  - the epsilon-sweep setup: oracle1d obstacle, piecewise-linear
              penalty family, alpha = 1/2, eps in {0.2, 0.1, 0.05, 0.025}.
"""
from __future__ import annotations

import numpy as np

from .grid import Grid, GridFunction
from .intervention import CostFunction
from .operators import LAPLACE, ObstacleSide, OperatorSpec


def _oracle1d_obstacle(grid: Grid) -> GridFunction:
    return GridFunction.from_callable(grid, lambda x: 0.5 - x ** 2)


def _oracle2d_obstacle(grid: Grid) -> GridFunction:
    return GridFunction.from_callable(grid, lambda x, y: 0.5 - x ** 2 - y ** 2)


def _classical(grid: Grid, cost_level: float) -> dict:
    return {
        "mode": "qvi",
        "spec": OperatorSpec(LAPLACE),
        "cost": CostFunction(GridFunction.constant(grid, cost_level),
                             semiconcavity_constant=0.0),
        "f": GridFunction.constant(grid, 1.0),
        "boundary_data": GridFunction.zeros(grid),
    }


def _oracle1d(grid: Grid) -> dict:
    return {
        "mode": "obstacle",
        "spec": OperatorSpec(LAPLACE),
        "side": ObstacleSide.LOWER,
        "obstacle": _oracle1d_obstacle(grid),
        "f": GridFunction.zeros(grid),
        "boundary_data": GridFunction.zeros(grid),
    }


def _oracle2d(grid: Grid) -> dict:
    return {
        "mode": "obstacle",
        "spec": OperatorSpec(LAPLACE),
        "side": ObstacleSide.LOWER,
        "obstacle": _oracle2d_obstacle(grid),
        "f": GridFunction.zeros(grid),
        "boundary_data": GridFunction.zeros(grid),
    }


def _penalty_decay(grid: Grid) -> dict:
    return {
        "mode": "sweep",
        "spec": OperatorSpec(LAPLACE),
        "obstacle": _oracle1d_obstacle(grid),
        "f": GridFunction.zeros(grid),
        "boundary_data": GridFunction.zeros(grid),
        "penalty_kind": "piecewise_linear",
        "eps_list": [0.2, 0.1, 0.05, 0.025],
        "alpha": 0.5,
    }


PRESETS = {
    "classical": lambda grid: _classical(grid, 1.0),
    "classical01": lambda grid: _classical(grid, 0.1),
    "oracle1d": _oracle1d,
    "oracle2d": _oracle2d,
    "penalty_decay": _penalty_decay,
}


def preset(name: str, grid: Grid) -> dict:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[name](grid)
