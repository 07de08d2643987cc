"""Small numerical utilities shared by the solvers and diagnostics."""

from __future__ import annotations

import numpy as np


def solve_tridiag_batch(dl, d, du, b):
    """Solve a batch of independent tridiagonal systems by the Thomas algorithm.

    All arrays have shape (n, m): column j holds system j.  ``dl[0]`` and
    ``du[-1]`` are ignored.  No pivoting; intended for the diagonally
    dominant matrices produced by the implicit steps here.
    """
    d = np.asarray(d)
    n = d.shape[0]
    cp = np.empty_like(d)
    bp = np.empty_like(b)
    cp[0] = du[0] / d[0]
    bp[0] = b[0] / d[0]
    for i in range(1, n):
        denom = d[i] - dl[i] * cp[i - 1]
        cp[i] = du[i] / denom
        bp[i] = (b[i] - dl[i] * bp[i - 1]) / denom
    x = np.empty_like(b)
    x[-1] = bp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = bp[i] - cp[i] * x[i + 1]
    return x


def parabolic_peak(x: np.ndarray, intensity: np.ndarray) -> float:
    """Sub-grid argmax of a sampled intensity via a 3-point parabola fit.

    Falls back to the grid argmax at the domain edges or for a degenerate
    curvature.
    """
    i = int(np.argmax(intensity))
    if i == 0 or i == len(x) - 1:
        return float(x[i])
    y0, y1, y2 = intensity[i - 1], intensity[i], intensity[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return float(x[i])
    delta = 0.5 * (y0 - y2) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    return float(x[i] + delta * (x[1] - x[0]))


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted median: smallest v with cumulative weight >= half the total."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0 or not np.any(weights > 0):
        raise ValueError("weighted_median needs at least one positive weight")
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = np.cumsum(weights[order])
    idx = int(np.searchsorted(w, 0.5 * w[-1]))
    return float(v[min(idx, len(v) - 1)])


def second_difference_matrix(n: int, h: float) -> np.ndarray:
    """Dense (1, -2, 1)/h^2 matrix with zero-Dirichlet ghosts."""
    d2 = np.zeros((n, n))
    idx = np.arange(n)
    d2[idx, idx] = -2.0
    d2[idx[:-1], idx[:-1] + 1] = 1.0
    d2[idx[1:], idx[1:] - 1] = 1.0
    return d2 / h**2


def laplacian(values: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Five-point Laplacian with zero-Dirichlet ghosts; ny == 1 collapses to 1D."""
    out = -2.0 * values / dx**2
    out[:, 1:] += values[:, :-1] / dx**2
    out[:, :-1] += values[:, 1:] / dx**2
    if values.shape[0] > 1:
        out += -2.0 * values / dy**2
        out[1:, :] += values[:-1, :] / dy**2
        out[:-1, :] += values[1:, :] / dy**2
    return out
