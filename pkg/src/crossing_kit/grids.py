"""Uniform grids and sampled functions.

A GridFunction is the package's exchange format for solutions and operator
outputs: complex samples on a uniform grid, dense enough to resolve the
fastest oscillation present (the builders enforce a points-per-period
floor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass
class GridFunction:
    """Complex samples ``values[k]`` at ``x0 + k*dx``, k = 0..n-1."""

    values: np.ndarray
    x0: float
    dx: float
    n: int

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.n,):
            raise ValidationError(
                f"values shape {self.values.shape} != (n,) = ({self.n},)"
            )
        if not (self.dx > 0):
            raise ValidationError("dx must be positive")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def x1(self) -> float:
        return self.x0 + self.dx * (self.n - 1)

    def index_of(self, x: float) -> int:
        """Nearest grid index to x (clipped to the grid)."""
        k = int(round((x - self.x0) / self.dx))
        return min(max(k, 0), self.n - 1)

    def window(self, center: float, npoints: int) -> slice:
        """Slice of ``npoints`` indices centered at the node nearest center.

        Raises ValidationError when the window does not fit in the grid.
        """
        k = self.index_of(center)
        half = npoints // 2
        lo, hi = k - half, k - half + npoints
        if lo < 0 or hi > self.n:
            raise ValidationError(
                f"window of {npoints} points at x={center:g} leaves the grid"
            )
        return slice(lo, hi)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(values, self.x0, self.dx, self.n)


def grid_for(
    x_left: float,
    x_right: float,
    max_rate: float,
    h: float,
    points_per_period: int = 96,
    n_min: int = 2001,
    n_max: int = 40_000_000,
) -> tuple[np.ndarray, float, int, int]:
    """Uniform grid on [x_left, x_right'] containing 0 as an exact node.

    ``max_rate`` bounds the local phase rate |F'| = |f|; the mesh resolves
    the local period 2*pi*h/|F'| with at least ``points_per_period`` nodes.
    The right endpoint is extended by less than one cell so that both
    endpoints are integer multiples of dx. Returns (x, dx, n, k0) with
    x[k0] = 0.

    Raises ValidationError when the requested resolution needs more than
    ``n_max`` nodes.
    """
    if not (x_left < 0.0 < x_right):
        raise ValidationError("grid must straddle 0")
    dx_target = (x_right - x_left) / max(n_min - 1, 8)
    if max_rate > 0:
        dx_osc = 2.0 * np.pi * h / (max_rate * points_per_period)
        dx_target = min(dx_target, dx_osc)
    n_left = int(np.ceil(-x_left / dx_target))
    dx = -x_left / n_left
    n_right = int(np.ceil(x_right / dx - 1e-12))
    n = n_left + n_right + 1
    if n > n_max:
        raise ValidationError(
            f"grid would need {n} nodes (> n_max={n_max}); "
            "lower points_per_period or shrink the interval"
        )
    x = (np.arange(n) - n_left) * dx
    return x, dx, n, n_left
