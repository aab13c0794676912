"""Independent reference computations used to cross-check the main code paths."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .geometry import Manifold


def transport_vertex_enumeration(cost: np.ndarray, rows: np.ndarray, cols: np.ndarray, atol: float = 1e-12) -> float:
    """Minimum of ``<cost, plan>`` over the transportation polytope by enumerating its vertices.

    Every vertex is a basic solution supported on ``n + k - 1`` cells, so the
    minimum is found by solving the marginal equations on each such support and
    keeping the nonnegative solutions.  Exponential; meant for tiny instances.
    """
    cost = np.asarray(cost, dtype=float)
    n, k = cost.shape
    A = np.zeros((n + k, n * k))
    for i in range(n):
        A[i, i * k:(i + 1) * k] = 1.0
    for j in range(k):
        A[n + j, j::k] = 1.0
    b = np.concatenate([rows, cols])
    scale = max(1.0, float(np.abs(b).max()))
    best = np.inf
    for support in combinations(range(n * k), n + k - 1):
        sub = A[:, support]
        if np.linalg.matrix_rank(sub) < n + k - 1:
            continue
        x, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if np.abs(sub @ x - b).max() > atol * scale or x.min() < -atol * scale:
            continue
        best = min(best, float(cost.ravel()[list(support)] @ np.clip(x, 0.0, None)))
    return best


def directional_derivative(m: Manifold, phi, x, v, t: float = 1e-3) -> float:
    """``d/dt phi(exp_x(t v))`` at 0 by Richardson-extrapolated central differences along the geodesic."""

    def central(dt):
        return (phi(m.exp(x, dt * v)) - phi(m.exp(x, -dt * v))) / (2.0 * dt)

    return (4.0 * central(t / 2.0) - central(t)) / 3.0
