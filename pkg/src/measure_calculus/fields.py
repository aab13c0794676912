"""Scalar and vector fields on a manifold, plus the smooth profiles used to build them.

A :class:`ScalarField` is a callable ``x -> float`` that may carry an ambient
gradient ``grad``; :meth:`Manifold.gradient` projects that hook onto the
tangent space. A :class:`VectorField` is a callable ``x -> ambient vector``
with a flag recording whether it is compactly supported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def _phi(t):
    return np.exp(-1.0 / t) if t > 0.0 else 0.0


def _dphi(t):
    return np.exp(-1.0 / t) / (t * t) if t > 0.0 else 0.0


def smoothstep(t: float) -> float:
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1, ``1/2`` at ``t = 1/2``."""
    a, b = _phi(t), _phi(1.0 - t)
    return float(a / (a + b))


def smoothstep_prime(t: float) -> float:
    a, b = _phi(t), _phi(1.0 - t)
    da, db = _dphi(t), -_dphi(1.0 - t)
    return float((da * b - a * db) / (a + b) ** 2)


@dataclass(frozen=True)
class ScalarField:
    """Scalar field with an optional ambient-gradient hook."""

    value: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "field"

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class VectorField:
    """Vector field ``x -> v(x)`` in ambient coordinates.

    On the sphere the returned vector is projected to ``T_x M`` by the caller.
    ``compact_support`` marks membership of the smooth compactly supported
    class that intrinsic derivatives are taken along.
    """

    value: Callable[[np.ndarray], np.ndarray]
    compact_support: bool = False
    name: str = "vector field"

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.value(np.asarray(x, dtype=float)), dtype=float)


def coordinate(i: int) -> ScalarField:
    """The ``i``-th ambient coordinate ``x_i`` (zero-based)."""

    def grad(x):
        g = np.zeros_like(x)
        g[i] = 1.0
        return g

    return ScalarField(lambda x: x[i], grad, name=f"x[{i}]")


def constant(c: float) -> ScalarField:
    return ScalarField(lambda x: c, lambda x: np.zeros_like(x), name=f"const({c})")


def distance_power(manifold, k: float) -> ScalarField:
    """``rho_o(x)^k``; smooth for even ``k`` away from the cut locus of ``o``."""
    o = manifold.origin

    def value(x):
        return manifold.distance(o, x) ** k

    def grad(x):
        r = manifold.distance(o, x)
        if r == 0.0:
            return np.zeros_like(x)
        # grad rho_o(x) = -log_x(o) / rho_o(x)
        unit = -manifold.log(x, o) / r
        return k * r ** (k - 1) * unit

    return ScalarField(value, grad, name=f"rho_o^{k}")


def smooth_bump(center, radius: float = 1.0) -> ScalarField:
    """``exp(1 - 1/(1 - |x-c|^2/r^2))`` inside the ball, 0 outside; equals 1 at the center."""
    c = np.asarray(center, dtype=float)

    def value(x):
        q = np.sum((x - c) ** 2) / radius**2
        return float(np.exp(1.0 - 1.0 / (1.0 - q))) if q < 1.0 else 0.0

    def grad(x):
        q = np.sum((x - c) ** 2) / radius**2
        if q >= 1.0:
            return np.zeros_like(x)
        b = np.exp(1.0 - 1.0 / (1.0 - q))
        return -b / (1.0 - q) ** 2 * 2.0 * (x - c) / radius**2

    return ScalarField(value, grad, name=f"bump({c.tolist()},{radius})")


def radial_cutoff(inner: float, outer: float, center=None) -> ScalarField:
    """Equal to 1 on ``|x-c| <= inner``, 0 beyond ``outer``, smooth in between."""
    if not 0.0 <= inner < outer:
        raise ValueError("need 0 <= inner < outer")
    width = outer - inner

    def _c(x):
        return np.zeros_like(x) if center is None else np.asarray(center, dtype=float)

    def value(x):
        r = np.linalg.norm(x - _c(x))
        return smoothstep((outer - r) / width)

    def grad(x):
        d = x - _c(x)
        r = np.linalg.norm(d)
        if r == 0.0:
            return np.zeros_like(x)
        return -smoothstep_prime((outer - r) / width) / width * d / r

    return ScalarField(value, grad, name=f"cutoff({inner},{outer})")


def zero_field() -> VectorField:
    return VectorField(lambda x: np.zeros_like(x), compact_support=True, name="zero")


def linear_field(A, b=None, cutoff: ScalarField | None = None, manifold=None) -> VectorField:
    """``v(x) = chi(x) (A x + b)``, projected to the tangent space when a sphere is given.

    With a cutoff the field is compactly supported; on the sphere it is
    compactly supported because the sphere itself is compact.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
    sphere = manifold is not None and manifold.is_sphere

    def value(x):
        v = A @ x + b
        if cutoff is not None:
            v = cutoff(x) * v
        if sphere:
            v = v - np.dot(x, v) * x
        return v

    compact = cutoff is not None or sphere
    return VectorField(value, compact_support=compact, name="linear")


def constant_field(c, manifold=None, cutoff: ScalarField | None = None) -> VectorField:
    c = np.asarray(c, dtype=float)
    return linear_field(np.zeros((c.size, c.size)), c, cutoff=cutoff, manifold=manifold)
