"""Regularization of the small projected problems produced by Krylov processes.

Everything here operates on dense (m+1) x m or m x m matrices with m of the
order of a few dozen, so plain LAPACK calls are always affordable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GcvCurve",
    "gcv_curve_from_matrix",
    "gcv_value",
    "minimize_gcv",
    "tikhonov_solve",
    "lcurve_corner",
    "FlatLCurveWarning",
]


@dataclass(frozen=True)
class GcvCurve:
    """Ingredients of the cross-validation function for a projected problem.

    ``sigma`` holds the singular values of the projected matrix in
    nonincreasing order; ``gtilde`` is the rotated right-hand side
    rhs_scale * U^T e1 (one entry longer than sigma).
    """

    sigma: np.ndarray
    gtilde: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 1 or sigma.size == 0:
            raise ValueError("sigma must be a nonempty vector")
        if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
            raise ValueError("singular values must be nonnegative and nonincreasing")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gtilde", np.asarray(self.gtilde, dtype=float))


def gcv_curve_from_matrix(matrix: np.ndarray, rhs_scale: float) -> GcvCurve:
    """SVD a projected matrix and package the GCV ingredients."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("projected matrix contains non-finite entries")
    u, sigma, _ = np.linalg.svd(matrix, full_matrices=True)
    return GcvCurve(sigma=sigma, gtilde=rhs_scale * u[0, :])


def gcv_value(curve: GcvCurve, lam: float, include_residual_term: bool = False) -> float:
    """Evaluate the cross-validation function at regularization parameter lam.

    The value is
        sum_i (g_i / (sigma_i^2 + lam^2))^2  /  (sum_i 1/(sigma_i^2 + lam^2))^2
    with both sums over the m singular values.  The leftover component of
    the rotated right-hand side, g_{m+1}^2, can be added to the numerator as
    a diagnostic; it is excluded by default.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    sigma = curve.sigma
    m = sigma.size
    denom_terms = sigma**2 + lam**2
    if np.any(denom_terms == 0.0):
        raise ValueError("lambda = 0 with a zero singular value")
    g = curve.gtilde[:m]
    numerator = float(np.sum((g / denom_terms) ** 2))
    if include_residual_term and curve.gtilde.size > m:
        numerator += float(curve.gtilde[m] ** 2)
    return numerator / float(np.sum(1.0 / denom_terms)) ** 2


def _golden_min(f, lo: float, hi: float, reltol: float = 1e-4) -> float:
    """Golden-section minimum of f on [lo, hi] in log coordinates."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = np.log(lo), np.log(hi)
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(np.exp(c)), f(np.exp(d))
    while (b - a) > reltol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(np.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(np.exp(d))
    return float(np.exp(0.5 * (a + b)))


def minimize_gcv(curve: GcvCurve, grid_points: int = 200) -> float:
    """Regularization parameter minimizing the cross-validation function.

    Scans a logarithmic grid on [1e-12 * sigma_1, sigma_1], then refines
    every local basin by golden section and returns the best refined point.
    Refining all basins (not just the global grid winner) keeps near-tied
    minima from flipping to the wrong side of the grid resolution.
    """
    sigma1 = float(curve.sigma[0])
    if sigma1 <= 0:
        raise ValueError("all singular values are zero")
    lo, hi = 1e-12 * sigma1, sigma1
    grid = np.geomspace(lo, hi, grid_points)
    values = np.array([gcv_value(curve, lam) for lam in grid])

    # endpoints first: for lambda << sigma_1 the function is bitwise flat
    # (lambda^2 vanishes against sigma^2), and ties must resolve to the
    # interval edge rather than wherever a line search drifts
    candidates = [lo, hi]
    for i in range(grid_points):
        left = values[i - 1] if i > 0 else np.inf
        right = values[i + 1] if i < grid_points - 1 else np.inf
        if values[i] <= left and values[i] <= right:
            bracket_lo = grid[max(i - 1, 0)]
            bracket_hi = grid[min(i + 1, grid_points - 1)]
            if bracket_lo == bracket_hi:
                candidates.append(float(grid[i]))
            else:
                candidates.append(
                    _golden_min(lambda lam: gcv_value(curve, lam), bracket_lo, bracket_hi)
                )
    best = min(candidates, key=lambda lam: gcv_value(curve, lam))
    return best


def tikhonov_solve(matrix: np.ndarray, rhs_scale: float, lam: float) -> np.ndarray:
    """Solve the projected Tikhonov problem min ||M y - b e1||^2 + lam^2 ||y||^2.

    Solved through the stacked least-squares form [[M], [lam I]] rather than
    the normal equations, which keeps conditioning acceptable as lam -> 0.
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("projected matrix contains non-finite entries")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    rows, m = matrix.shape
    if lam == 0.0 and np.linalg.matrix_rank(matrix) < m:
        raise ValueError("singular projected system with lambda = 0")
    rhs = np.zeros(rows + m)
    rhs[0] = rhs_scale
    stacked = np.vstack([matrix, lam * np.eye(m)])
    y, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
    return y


class FlatLCurveWarning(UserWarning):
    """Raised when the residual/solution-norm curve has no usable corner."""


def lcurve_corner(points) -> int:
    """Index of the corner of an L-shaped (residual, solution norm) curve.

    Uses the triangle method: map the points to log-log coordinates and pick
    the one farthest from the chord joining the first and last points.  On a
    flat (collinear) curve the first interior index is returned and a
    :class:`FlatLCurveWarning` is emitted.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (residual, solution_norm) pairs")
    if pts.shape[0] < 3:
        raise ValueError(f"need at least 3 points, got {pts.shape[0]}")
    if np.any(pts <= 0):
        raise ValueError("all norms must be positive for log-log mapping")
    logs = np.log(pts)
    chord = logs[-1] - logs[0]
    span = np.hypot(*chord)
    if span == 0.0:
        warnings.warn("degenerate curve: endpoints coincide", FlatLCurveWarning)
        return 1
    rel = logs - logs[0]
    # perpendicular distance to the chord (2-D cross product magnitude)
    dist = np.abs(chord[0] * rel[:, 1] - chord[1] * rel[:, 0]) / span
    if np.max(dist) < 1e-12 * max(span, 1.0):
        warnings.warn("collinear log-log curve has no corner", FlatLCurveWarning)
        return 1
    return int(np.argmax(dist))
