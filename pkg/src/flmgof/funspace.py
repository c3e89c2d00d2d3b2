"""Discretized curves on [0, 1]: grids, quadrature inner products, centering.

Every curve in an analysis lives on one shared grid of strictly increasing
abscissae. Integrals are composite trapezoid sums, so an inner product is a
weighted dot product and all downstream linear algebra stays dense and exact
with respect to that quadrature rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "FunctionalSample",
    "make_grid",
    "uniform_grid",
    "inner_product",
    "curve_norm",
    "center",
]


def _as_float_vector(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Quadrature grid: strictly increasing points in [0, 1], positive weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = _as_float_vector(self.points, "grid points")
        weights = _as_float_vector(self.weights, "grid weights")
        if points.size < 2:
            raise ValueError("a grid needs at least two points")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if points[0] < 0.0 or points[-1] > 1.0:
            raise ValueError("grid points must lie in [0, 1]")
        if weights.shape != points.shape:
            raise ValueError("grid weights must match grid points in length")
        if np.any(weights <= 0):
            raise ValueError("grid weights must be positive")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def size(self) -> int:
        return int(self.points.size)

    def matches(self, other) -> bool:
        """True when both grids share identical abscissae."""
        return self.size == other.size and np.array_equal(self.points, other.points)


def make_grid(points) -> Grid:
    """Build a grid with composite trapezoid weights for the given abscissae."""
    pts = _as_float_vector(points, "grid points")
    if pts.size < 2:
        raise ValueError("a grid needs at least two points")
    w = np.empty_like(pts)
    w[0] = (pts[1] - pts[0]) / 2.0
    w[-1] = (pts[-1] - pts[-2]) / 2.0
    if pts.size > 2:
        w[1:-1] = (pts[2:] - pts[:-2]) / 2.0
    return Grid(points=pts, weights=w)


def uniform_grid(num_points: int = 201) -> Grid:
    """Equidistant trapezoid grid on [0, 1]."""
    if num_points < 2:
        raise ValueError("num_points must be at least 2")
    return make_grid(np.linspace(0.0, 1.0, num_points))


def inner_product(f, g, grid: Grid) -> float:
    """Trapezoid approximation of the L2[0,1] inner product of two curves."""
    fv = _as_float_vector(f, "first curve")
    gv = _as_float_vector(g, "second curve")
    if fv.size != grid.size or gv.size != grid.size:
        raise ValueError("curve length does not match the grid")
    return float(np.sum(grid.weights * fv * gv))


def curve_norm(f, grid: Grid) -> float:
    """Quadrature L2 norm of a curve."""
    return float(np.sqrt(max(inner_product(f, f, grid), 0.0)))


@dataclass(frozen=True)
class FunctionalSample:
    """A sample of n curves stored row-wise on a shared grid.

    Parameters
    ----------
    grid : Grid
        Shared abscissae and quadrature weights.
    data : ndarray, shape (n, grid.size)
        One curve per row; all values finite.
    centered : bool
        Declares that the column means are (numerically) zero. Verified at
        construction so downstream code can rely on the flag.
    """

    grid: Grid
    data: np.ndarray
    centered: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("sample data must be a 2-d array (rows = curves)")
        if data.shape[0] < 1:
            raise ValueError("sample must contain at least one curve")
        if data.shape[1] != self.grid.size:
            raise ValueError("sample width does not match the grid")
        if not np.all(np.isfinite(data)):
            raise ValueError("sample data contains non-finite values")
        if self.centered:
            scale = max(float(np.max(np.abs(data))), 1.0)
            if float(np.max(np.abs(data.mean(axis=0)))) > 1e-10 * scale:
                raise ValueError("sample declared centered but column means are not zero")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def num_points(self) -> int:
        return int(self.data.shape[1])


def center(sample: FunctionalSample):
    """Subtract the pointwise sample mean curve.

    Returns
    -------
    centered : FunctionalSample
        Same grid, rows sum to zero in every column.
    mean_curve : ndarray
        The subtracted mean, one value per grid point. For n = 1 the single
        curve becomes identically zero and the mean equals the input curve.
    """
    mean_curve = sample.data.mean(axis=0)
    centered = FunctionalSample(
        grid=sample.grid, data=sample.data - mean_curve, centered=True
    )
    return centered, mean_curve
