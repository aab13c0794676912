"""Derivatives in measure as numerical limits.

Every derivative here is a one-sided limit ``s -> 0+`` of a difference
quotient.  Quotients are evaluated on the halving schedule
``s_k = s0 * 2**-k`` and the ladder is Richardson-extrapolated, eliminating
the ``O(s)`` and ``O(s^2)`` error terms.  The estimate is flagged converged
when the last two extrapolated levels agree to ``tol * (1 + |value|)``; a
functional whose quotient does not settle (the oscillating counter-example)
comes back with ``converged=False`` and the raw ladder spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError, NumericError
from .functionals import Functional
from .geometry import Manifold
from .measures import (
    ParticleMeasure,
    add_dirac,
    convex_combine,
    dirac,
    integrate,
    pushforward,
    sample_field,
)


@dataclass(frozen=True)
class FDConfig:
    s0: float = 1e-2
    levels: int = 6
    order: int = 2
    tol: float = 1e-6
    spread_threshold: float = 0.5
    h: float | None = None  # spatial gradient step; None picks a per-operator default scaled by 1 + |x|

    def __post_init__(self):
        if not self.s0 > 0:
            raise InputError("s0 must be positive")
        if self.levels < 2:
            raise InputError("need at least levels=2 (three schedule steps)")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if not 0 <= self.order <= self.levels:
            raise InputError("Richardson order must lie in [0, levels]")

    @property
    def steps(self) -> np.ndarray:
        return self.s0 * 2.0 ** -np.arange(self.levels + 1)


@dataclass(frozen=True)
class FlowConfig:
    substeps: int = 64  # RK4 steps per unit time

    def __post_init__(self):
        if self.substeps < 1:
            raise InputError("substeps must be >= 1")


@dataclass
class DerivativeEstimate:
    """Extrapolated limit of a quotient ladder.

    ``ladder`` holds the raw quotients at each schedule step, ``extrapolated``
    the last Richardson column.  Values may be scalars or tangent vectors.
    """

    value: float | np.ndarray
    ladder: np.ndarray
    extrapolated: np.ndarray
    converged: bool
    steps: np.ndarray = field(repr=False, default=None)

    @property
    def spread(self) -> float:
        """Max minus min of the raw quotients (per component, the largest)."""
        lad = np.asarray(self.ladder, dtype=float)
        if lad.ndim == 1:
            return float(lad.max() - lad.min())
        return float((lad.max(axis=0) - lad.min(axis=0)).max())

    def __float__(self):
        return float(self.value)


def richardson(ladder, order: int = 2) -> np.ndarray:
    """One-sided Richardson table on a halving schedule; returns the final column.

    Level ``j`` removes the ``s^j`` term: ``R_j = (2^j R_{j-1}[k+1] - R_{j-1}[k]) / (2^j - 1)``.
    """
    col = np.asarray(ladder, dtype=float)
    for j in range(1, order + 1):
        c = 2.0**j
        col = (c * col[1:] - col[:-1]) / (c - 1.0)
    return col


def estimate(quotient: Callable[[float], float | np.ndarray], cfg: FDConfig) -> DerivativeEstimate:
    steps = cfg.steps
    ladder = np.array([quotient(s) for s in steps], dtype=float)
    if not np.all(np.isfinite(ladder)):
        raise NumericError("difference quotient is not finite")
    ext = richardson(ladder, cfg.order)
    value = ext[-1]
    gap = np.max(np.abs(ext[-1] - ext[-2])) if len(ext) > 1 else np.inf
    converged = bool(gap <= cfg.tol * (1.0 + np.max(np.abs(value))))
    if np.ndim(value) == 0:
        value = float(value)
    return DerivativeEstimate(value, ladder, ext, converged, steps)


# ----------------------------------------------------------------------
# extrinsic derivatives
# ----------------------------------------------------------------------


def extrinsic_fd(f: Functional, eta: ParticleMeasure, x, cfg: FDConfig = FDConfig()) -> DerivativeEstimate:
    """``lim (f(eta + s delta_x) - f(eta)) / s``."""
    x = eta.manifold.check_point(x)
    base = f(eta)
    return estimate(lambda s: (f(add_dirac(eta, s, x)) - base) / s, cfg)


def centered_extrinsic_fd(f: Functional, mu: ParticleMeasure, x, cfg: FDConfig = FDConfig()) -> DerivativeEstimate:
    """``lim (f((1-s) mu + s delta_x) - f(mu)) / s`` for a probability measure ``mu``."""
    if abs(mu.mass - 1.0) > 1e-9:
        raise InputError(f"centered derivative needs a probability measure, mass is {mu.mass}")
    x = mu.manifold.check_point(x)
    dx = dirac(mu.manifold, x)
    base = f(mu)
    return estimate(lambda s: (f(convex_combine(mu, dx, s)) - base) / s, cfg)


def extrinsic_value(f: Functional, eta: ParticleMeasure, x, cfg: FDConfig = FDConfig()) -> float:
    """``D^E f(eta)(x)``, in closed form when the functional provides it."""
    if f.de is not None:
        return float(f.de(eta, np.asarray(x, dtype=float)))
    est = extrinsic_fd(f, eta, x, cfg)
    if not est.converged:
        raise NumericError(f"extrinsic derivative of {f.name} did not converge at {x}")
    return float(est.value)


def grad_extrinsic(f: Functional, eta: ParticleMeasure, x, cfg: FDConfig = FDConfig(), analytic: bool = False) -> np.ndarray:
    """``grad_y D^E f(eta)(y)`` at ``y = x``.

    By default the gradient is taken by finite differences of ``y -> D^E f(eta)(y)``
    (closed-form ``de`` when available); ``analytic=True`` uses ``grad_de``.
    """
    m = eta.manifold
    x = m.check_point(x)
    if analytic:
        if f.grad_de is None:
            raise InputError(f"{f.name} has no closed-form gradient of its extrinsic derivative")
        return m.project_tangent(x, f.grad_de(eta, x))
    return m.gradient(lambda y: extrinsic_value(f, eta, y, cfg), x, h=cfg.h)


# ----------------------------------------------------------------------
# flows and pushforwards
# ----------------------------------------------------------------------


def _velocity(m: Manifold, v, y):
    if m.is_sphere:
        p = y / np.linalg.norm(y)
        return m.project_tangent(p, v(p))
    return v(y)


def flow_map(m: Manifold, v, t: float, flow: FlowConfig = FlowConfig()) -> Callable:
    """Time-``t`` map of ``dphi/ds = v(phi)`` by fixed-step classical RK4.

    On the sphere the velocity is projected to the tangent space at every
    stage and the point is renormalized after every substep.
    """
    n = max(1, math.ceil(flow.substeps * t))
    dt = t / n

    def phi(x):
        y = np.array(x, dtype=float)
        for _ in range(n):
            k1 = _velocity(m, v, y)
            k2 = _velocity(m, v, y + 0.5 * dt * k1)
            k3 = _velocity(m, v, y + 0.5 * dt * k2)
            k4 = _velocity(m, v, y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if m.is_sphere:
                y = m.project_point(y, tol=1e-6)
        if not np.all(np.isfinite(y)):
            raise NumericError("flow produced non-finite coordinates")
        return y

    return phi


def geodesic_shift(m: Manifold, eta: ParticleMeasure, v, s: float) -> ParticleMeasure:
    """``eta o phi_{sv}^{-1}`` with ``phi_{sv}(x) = exp_x(s v(x))``."""
    vs = sample_field(v, eta)
    pts = np.array([m.exp(x, s * u) for x, u in zip(eta.points, vs)]).reshape(len(eta), m.dim)
    return ParticleMeasure(eta.weights, pts, m)


def intrinsic_directional(
    f: Functional,
    eta: ParticleMeasure,
    v,
    cfg: FDConfig = FDConfig(),
    flow: FlowConfig = FlowConfig(),
) -> DerivativeEstimate:
    """``lim (f(eta o (phi_s^v)^{-1}) - f(eta)) / s`` along the flow of ``v``."""
    m = eta.manifold
    if not m.is_sphere and not getattr(v, "compact_support", False):
        raise InputError("intrinsic derivatives need a compactly supported vector field")
    base = f(eta)
    return estimate(lambda s: (f(pushforward(eta, flow_map(m, v, s, flow))) - base) / s, cfg)


def l_directional(f: Functional, eta: ParticleMeasure, v, cfg: FDConfig = FDConfig()) -> DerivativeEstimate:
    """``lim (f(eta o phi_{sv}^{-1}) - f(eta)) / s`` along geodesic shifts.

    ``v`` is a callable field or an array with one tangent vector per atom.
    """
    m = eta.manifold
    vs = sample_field(v, eta)
    base = f(eta)
    return estimate(lambda s: (f(geodesic_shift(m, eta, vs, s)) - base) / s, cfg)


# ----------------------------------------------------------------------
# L-derivative field through Dirac perturbations
# ----------------------------------------------------------------------


def _dirac_spatial_gradient(m: Manifold, phi, x, cfg: FDConfig) -> np.ndarray:
    # phi(y) = f(eta + s delta_y) varies by O(s h) against a value of O(1), so a
    # small step drowns in cancellation once divided by s; a wider step with one
    # Richardson level keeps truncation at O(h^4) and roundoff near 1e-16/(s h)
    h = cfg.h if cfg.h is not None else 1e-3 * (1.0 + float(np.linalg.norm(x)))
    return m.gradient(phi, x, h=h, richardson=True)


def dirac_gradient(f: Functional, eta: ParticleMeasure, s: float, x, cfg: FDConfig = FDConfig()):
    """Both sides of ``grad_y f(eta + s delta_y) |_{y=x} = s D^L f(eta + s delta_x)(x)``.

    The right side evaluates ``D^L`` as ``grad D^E`` at the perturbed measure.
    """
    if not s > 0:
        raise InputError("Dirac weight must be positive")
    m = eta.manifold
    x = m.check_point(x)
    left = _dirac_spatial_gradient(m, lambda y: f(add_dirac(eta, s, y)), x, cfg)
    right = s * grad_extrinsic(f, add_dirac(eta, s, x), x, cfg)
    return left, right


def l_field_via_dirac(f: Functional, eta: ParticleMeasure, x, cfg: FDConfig = FDConfig()) -> DerivativeEstimate:
    """``lim_{s->0} (1/s) grad_y f(eta + s delta_y)|_{y=x}``, extrapolated componentwise.

    All ladder entries are tangent vectors at the same point ``x``, so they
    are compared in one frame without transport.
    """
    m = eta.manifold
    x = m.check_point(x)

    def quotient(s):
        return _dirac_spatial_gradient(m, lambda y: f(add_dirac(eta, s, y)), x, cfg) / s

    return estimate(quotient, cfg)
