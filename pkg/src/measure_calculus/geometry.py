"""Riemannian geometry kernel for Euclidean space and the unit sphere.

Points and tangent vectors are plain ``numpy`` arrays in ambient coordinates.
The sphere ``S^{d-1}`` is handled through its embedding in ``R^d``, so the
exponential map, logarithm and parallel transport all have closed forms.

    >>> m = Manifold.sphere(3)
    >>> x, y = np.array([0., 0., 1.]), np.array([1., 0., 0.])
    >>> float(m.distance(x, y)) == np.pi / 2
    True
    >>> np.allclose(m.exp(x, m.log(x, y)), y)
    True
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InputError, NumericError

EUCLIDEAN = "euclidean"
SPHERE = "sphere"

# pairs closer than this to antipodal are treated as lying on the cut locus
ANTIPODAL_MARGIN = 1e-8
UNIT_NORM_TOL = 1e-12
TANGENT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Manifold:
    """Euclidean space ``R^dim`` or the unit sphere embedded in ``R^dim``.

    ``origin`` is the reference point ``o`` used by distance-to-origin moments
    and by the mass-moment term of the Wasserstein metric.
    """

    kind: str
    dim: int
    origin: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, SPHERE):
            raise InputError(f"unknown manifold kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim}")
        if self.kind == SPHERE and self.dim < 2:
            raise InputError("sphere needs ambient dimension >= 2")
        if self.origin is None:
            o = np.zeros(self.dim)
            if self.kind == SPHERE:
                o[-1] = 1.0
        else:
            o = np.array(self.origin, dtype=float).reshape(-1)
        o.setflags(write=False)
        object.__setattr__(self, "origin", o)
        self.check_point(o)

    @classmethod
    def euclidean(cls, dim: int, origin=None) -> "Manifold":
        return cls(EUCLIDEAN, dim, origin)

    @classmethod
    def sphere(cls, dim: int, origin=None) -> "Manifold":
        """Unit sphere in ``R^dim``; the default origin is the north pole ``e_dim``."""
        return cls(SPHERE, dim, origin)

    @classmethod
    def from_string(cls, spec: str) -> "Manifold":
        """Parse ``"euclidean:2"`` or ``"sphere:3"``."""
        try:
            kind, dim = spec.strip().lower().split(":")
            dim = int(dim)
        except ValueError:
            raise InputError(f"manifold spec must look like 'euclidean:2' or 'sphere:3', got {spec!r}") from None
        return cls(kind, dim)

    @property
    def is_sphere(self) -> bool:
        return self.kind == SPHERE

    def __str__(self):
        return f"{self.kind}:{self.dim}"

    def __repr__(self):
        return f"Manifold({self.kind!r}, {self.dim}, origin={self.origin.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, Manifold):
            return NotImplemented
        return (self.kind, self.dim) == (other.kind, other.dim) and np.array_equal(self.origin, other.origin)

    def __hash__(self):
        return hash((self.kind, self.dim, tuple(self.origin)))

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InputError(f"point of shape {x.shape} does not match {self}")
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite point coordinates")
        if self.is_sphere and abs(np.linalg.norm(x) - 1.0) > UNIT_NORM_TOL:
            raise InputError(f"point {x} is not on the unit sphere")
        return x

    def check_tangent(self, x, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise InputError(f"tangent vector of shape {v.shape} does not match {self}")
        if self.is_sphere and abs(np.dot(x, v)) > TANGENT_TOL * max(1.0, np.linalg.norm(v)):
            raise InputError("vector is not tangent at its base point")
        return v

    def project_point(self, x, tol: float = 1e-8) -> np.ndarray:
        """Renormalize a point that has drifted slightly off the sphere."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite point coordinates")
        if not self.is_sphere:
            return x
        n = np.linalg.norm(x)
        if abs(n - 1.0) > tol:
            raise NumericError(f"point left the sphere (norm {n})")
        return x / n

    def project_tangent(self, x, v) -> np.ndarray:
        """Orthogonal projection of an ambient vector onto ``T_x M``."""
        v = np.asarray(v, dtype=float)
        if self.is_sphere:
            return v - np.dot(x, v) * x
        return v

    def tangent_basis(self, x) -> np.ndarray:
        """Rows form an orthonormal basis of ``T_x M``."""
        if not self.is_sphere:
            return np.eye(self.dim)
        # complete x to an orthonormal basis of R^d; drop the x direction
        q, _ = np.linalg.qr(np.column_stack([x, np.eye(self.dim)]))
        return q[:, 1:self.dim].T

    # ------------------------------------------------------------------
    # metric operations
    # ------------------------------------------------------------------

    def distance(self, x, y) -> float:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.shape != (self.dim,) or y.shape != (self.dim,):
            raise InputError(f"points of shapes {x.shape}, {y.shape} do not match {self}")
        if not self.is_sphere:
            return float(np.linalg.norm(y - x))
        # equals arccos(<x, y>) on unit vectors; this form is exact at x == y
        # and keeps full precision near 0 and near pi
        return float(2.0 * np.arctan2(np.linalg.norm(x - y), np.linalg.norm(x + y)))

    def origin_distance(self, x) -> float:
        return self.distance(self.origin, x)

    def norm(self, v) -> float:
        return float(np.linalg.norm(v))

    def inner(self, u, v) -> float:
        return float(np.dot(u, v))

    def exp(self, x, v) -> np.ndarray:
        """Exponential map; on the sphere ``|v|`` must stay below ``pi``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if v.shape != x.shape:
            raise InputError("tangent vector and base point have different shapes")
        if not self.is_sphere:
            return x + v
        self.check_tangent(x, v)
        t = np.linalg.norm(v)
        if t >= np.pi:
            raise DomainError(f"|v| = {t} reaches the injectivity radius pi")
        if t == 0.0:
            return x.copy()
        y = np.cos(t) * x + np.sin(t) * (v / t)
        return y / np.linalg.norm(y)

    def log(self, x, y) -> np.ndarray:
        """Inverse exponential map; antipodal pairs raise ``DomainError``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.shape != (self.dim,):
            raise InputError("points do not match the manifold dimension")
        if not self.is_sphere:
            return y - x
        theta = self.distance(x, y)
        if theta > np.pi - ANTIPODAL_MARGIN:
            raise DomainError("log map undefined for antipodal points")
        u = y - np.dot(x, y) * x
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return np.zeros_like(x)
        return theta * u / nu

    def transport(self, x, y, v) -> np.ndarray:
        """Parallel transport of ``v`` from ``x`` to ``y`` along the minimal geodesic."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        if not self.is_sphere:
            return v.copy()
        self.check_tangent(x, v)
        u = self.log(x, y)
        theta = np.linalg.norm(u)
        if theta == 0.0:
            return v.copy()
        e = u / theta
        a = np.dot(v, e)
        # the e-component rotates in the (x, e) plane, the rest is unchanged
        return v + a * ((np.cos(theta) - 1.0) * e - np.sin(theta) * x)

    def gradient(self, phi: Callable, x, h: float | None = None, richardson: bool = False) -> np.ndarray:
        """Riemannian gradient of a scalar field at ``x``.

        Uses ``phi.grad`` (an ambient gradient, projected to ``T_x M``) when the
        field carries one; otherwise central differences along an orthonormal
        tangent basis, stepping along geodesics on the sphere.
        """
        x = np.asarray(x, dtype=float)
        hook = getattr(phi, "grad", None)
        if hook is not None:
            g = np.asarray(hook(x), dtype=float)
            if not np.all(np.isfinite(g)):
                raise NumericError("non-finite analytic gradient")
            return self.project_tangent(x, g)
        if h is None:
            h = 1e-5 * (1.0 + np.linalg.norm(x))
        basis = self.tangent_basis(x)

        def central(step):
            out = np.empty(len(basis))
            for i, e in enumerate(basis):
                fp = phi(self.exp(x, step * e))
                fm = phi(self.exp(x, -step * e))
                if not (np.isfinite(fp) and np.isfinite(fm)):
                    raise NumericError("scalar field returned a non-finite value")
                out[i] = (fp - fm) / (2.0 * step)
            return out

        d = central(h)
        if richardson:
            d = (4.0 * central(h / 2.0) - d) / 3.0
        return d @ basis


def distance(m: Manifold, x, y) -> float:
    return m.distance(x, y)


def exp_map(m: Manifold, x, v) -> np.ndarray:
    return m.exp(x, v)


def log_map(m: Manifold, x, y) -> np.ndarray:
    return m.log(x, y)


def parallel_transport(m: Manifold, x, y, v) -> np.ndarray:
    return m.transport(x, y, v)


def scalar_gradient(m: Manifold, phi: Callable, x, h: float | None = None, richardson: bool = False) -> np.ndarray:
    return m.gradient(phi, x, h=h, richardson=richardson)
