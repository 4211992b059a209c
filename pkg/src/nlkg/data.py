"""Initial data generators (v = 0 in both cases)."""
from __future__ import annotations

import numpy as np

from .spectral import FieldState, Grid


def _radius_sq(grid: Grid) -> np.ndarray:
    return sum(x**2 for x in grid.x)


def _y_profile(grid: Grid) -> np.ndarray:
    # one period of cosine along the first torus direction
    y, length = grid.y[0], grid.spec.torus_lengths[0]
    return 1.0 + 0.3 * np.cos(2 * np.pi * y / length)


def gaussian(grid: Grid, amplitude: float, radius: float) -> FieldState:
    """``A exp(-|x|^2/R^2) (1 + 0.3 cos y_1)``."""
    u = amplitude * np.exp(-_radius_sq(grid) / radius**2) * _y_profile(grid)
    return FieldState(grid, 0.0, np.broadcast_to(u, grid.shape), np.zeros(grid.shape))


def bump_profile(r) -> np.ndarray:
    """``exp(1 - 1/(1 - r^2))`` on ``r < 1``, zero outside; equals 1 at the origin."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def bump(grid: Grid, amplitude: float, radius: float) -> FieldState:
    """Smooth bump supported in ``|x| < R``, with the same y-modulation as :func:`gaussian`."""
    r = np.sqrt(_radius_sq(grid)) / radius
    u = amplitude * bump_profile(r) * _y_profile(grid)
    return FieldState(grid, 0.0, np.broadcast_to(u, grid.shape), np.zeros(grid.shape))


GENERATORS = {"gaussian": gaussian, "bump": bump}
