"""Catalog of functionals of finite measures.

A :class:`Functional` bundles an evaluation ``f(eta)`` with, when known in
closed form, its extrinsic derivative ``de(eta, x)`` and the manifold
gradient of that derivative ``grad_de(eta, x)``.  For a cylindrical
functional ``g(eta(h_1), ..., eta(h_n))`` these are

    de(eta, x)      = sum_i d_i g(...) h_i(x)
    grad_de(eta, x) = sum_i d_i g(...) grad h_i(x)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import fields
from .errors import InputError
from .fields import ScalarField, smoothstep, smoothstep_prime
from .measures import ParticleMeasure, integrate

# regularity tags, strongest first; these are declared, not verified
E11B = "E11B"
E11 = "E11"
E1K = "E1K"
L1_ONLY = "L1_only"
NONE = "none"

_TAG_RANK = {E11B: 4, E11: 3, E1K: 2, L1_ONLY: 0, NONE: 0}


def tag_at_least(tag: str, required: str) -> bool:
    return _TAG_RANK[tag] >= _TAG_RANK[required]


@dataclass(frozen=True)
class Functional:
    name: str
    evaluate: Callable[[ParticleMeasure], float]
    de: Optional[Callable[[ParticleMeasure, np.ndarray], float]] = None
    grad_de: Optional[Callable[[ParticleMeasure, np.ndarray], np.ndarray]] = None
    tag: str = NONE
    notes: str = ""

    def __call__(self, eta: ParticleMeasure) -> float:
        return float(self.evaluate(eta))

    def __repr__(self):
        return f"Functional({self.name!r}, tag={self.tag})"


@dataclass(frozen=True)
class CylindricalSpec:
    """``f(eta) = outer(eta(h_1), ..., eta(h_n))``; ``outer_grad`` returns the n partials."""

    outer: Callable[[np.ndarray], float]
    outer_grad: Callable[[np.ndarray], np.ndarray]
    inner: Sequence[ScalarField]
    bounded_gradients: bool = False
    name: str = "cylindrical"

    def __post_init__(self):
        if len(self.inner) < 1:
            raise InputError("a cylindrical functional needs at least one inner field")
        for h in self.inner:
            if not callable(h):
                raise InputError("inner fields must be callable")


def cylindrical_make(spec: CylindricalSpec) -> Functional:
    def integrals(eta):
        return np.array([integrate(eta, h) for h in spec.inner])

    def evaluate(eta):
        return float(spec.outer(integrals(eta)))

    def de(eta, x):
        dg = np.asarray(spec.outer_grad(integrals(eta)), dtype=float)
        return float(sum(c * h(x) for c, h in zip(dg, spec.inner)))

    def grad_de(eta, x):
        m = eta.manifold
        dg = np.asarray(spec.outer_grad(integrals(eta)), dtype=float)
        x = np.asarray(x, dtype=float)
        return sum(c * m.gradient(h, x) for c, h in zip(dg, spec.inner))

    tag = E11B if spec.bounded_gradients else E11
    return Functional(spec.name, evaluate, de, grad_de, tag)


# ----------------------------------------------------------------------
# outer maps addressable by name
# ----------------------------------------------------------------------


def outer_linear(coeffs=None):
    def g(t):
        c = np.ones(len(t)) if coeffs is None else np.asarray(coeffs, dtype=float)
        return float(c @ t)

    def dg(t):
        return np.ones(len(t)) if coeffs is None else np.asarray(coeffs, dtype=float)

    return g, dg


def outer_square():
    """``g(t) = (sum t)^2`` (for a single inner field simply ``t^2``)."""
    return (lambda t: float(np.sum(t) ** 2)), (lambda t: 2.0 * np.sum(t) * np.ones(len(t)))


def outer_product():
    def g(t):
        return float(np.prod(t))

    def dg(t):
        return np.array([np.prod(np.delete(t, i)) for i in range(len(t))])

    return g, dg


def outer_exp_quadratic(a: float = 1.0):
    """``g(t) = exp(-a |t|^2 / 2)``: bounded with bounded gradient."""
    return (lambda t: float(np.exp(-0.5 * a * t @ t))), (lambda t: -a * t * np.exp(-0.5 * a * t @ t))


OUTER_MAPS = {
    "linear": outer_linear,
    "square": outer_square,
    "product": outer_product,
    "exp_quadratic": outer_exp_quadratic,
}


def primitive_field(spec, manifold=None) -> ScalarField:
    """Named inner field: ``{"coordinate": i}``, ``{"distance_power": k}`` or ``{"bump": [center, radius]}``."""
    if isinstance(spec, ScalarField):
        return spec
    if not isinstance(spec, dict) or len(spec) != 1:
        raise InputError(f"cannot interpret field spec {spec!r}")
    (kind, arg), = spec.items()
    if kind == "coordinate":
        return fields.coordinate(int(arg))
    if kind == "distance_power":
        if manifold is None:
            raise InputError("distance_power needs a manifold")
        return fields.distance_power(manifold, float(arg))
    if kind == "bump":
        center, radius = arg
        return fields.smooth_bump(center, float(radius))
    raise InputError(f"unknown field kind {kind!r}")


def cylindrical_from_config(cfg: dict, manifold=None) -> Functional:
    """Build a cylindrical functional from ``{"outer": name, "inner": [...], "params": {...}}``."""
    try:
        outer = OUTER_MAPS[cfg["outer"]]
    except KeyError:
        raise InputError(f"unknown or missing outer map in {cfg!r}") from None
    g, dg = outer(**cfg.get("params", {}))
    inner = [primitive_field(s, manifold) for s in cfg.get("inner", [])]
    return cylindrical_make(CylindricalSpec(g, dg, inner, name=cfg.get("name", f"cyl_{cfg['outer']}")))


# ----------------------------------------------------------------------
# built-in catalog
# ----------------------------------------------------------------------


def oscillator(t: float) -> float:
    """``(t-2) sin(ln|t-2|)`` with value 0 at ``t = 2``: continuous, no one-sided derivative at 2."""
    d = t - 2.0
    return 0.0 if d == 0.0 else float(d * np.sin(np.log(abs(d))))


def total_mass() -> Functional:
    return Functional(
        "total_mass",
        lambda eta: eta.mass,
        lambda eta, x: 1.0,
        lambda eta, x: np.zeros(eta.manifold.dim),
        E11B,
    )


def moment(k: float = 2.0) -> Functional:
    """``eta(rho_o^k)``."""

    def h(eta):
        return fields.distance_power(eta.manifold, k)

    return Functional(
        f"moment({k:g})",
        lambda eta: integrate(eta, h(eta)),
        lambda eta, x: h(eta)(x),
        lambda eta, x: eta.manifold.gradient(h(eta), x),
        E11,
        notes="smooth only for even k away from the cut locus of o",
    )


def first_moment_squared() -> Functional:
    """``eta(x_1)^2``."""
    g, dg = outer_square()
    spec = CylindricalSpec(g, dg, [fields.coordinate(0)], name="first_moment_squared")
    f = cylindrical_make(spec)
    return Functional(f.name, f.evaluate, f.de, f.grad_de, E11, notes="gradient growth (*10) holds for q >= 1")


def sphere_height() -> Functional:
    """``eta(x_d)``: the last ambient coordinate, i.e. ``x_3`` on ``S^2``."""

    def h(eta):
        return fields.coordinate(eta.manifold.dim - 1)

    return Functional(
        "sphere_height",
        lambda eta: integrate(eta, h(eta)),
        lambda eta, x: float(np.asarray(x)[-1]),
        lambda eta, x: eta.manifold.gradient(h(eta), x),
        E11B,
    )


def oscillator_mass() -> Functional:
    """``psi(eta(M))`` with the non-differentiable ``psi = oscillator``; no extrinsic derivative."""
    return Functional("oscillator_mass", lambda eta: oscillator(eta.mass), tag=L1_ONLY)


_BUILTINS = {
    "total_mass": total_mass,
    "moment": moment,
    "first_moment_squared": first_moment_squared,
    "sphere_height": sphere_height,
    "oscillator_mass": oscillator_mass,
}


def builtin(name: str) -> Functional:
    """Look up a catalog functional by key; ``"moment(k)"`` selects the k-th moment."""
    key = name.strip()
    if key.startswith("moment"):
        arg = key[len("moment"):].strip()
        if arg and not (arg.startswith("(") and arg.endswith(")")):
            raise InputError(f"unknown functional {name!r}")
        return moment(float(arg[1:-1])) if arg else moment()
    try:
        return _BUILTINS[key]()
    except KeyError:
        raise InputError(f"unknown functional {name!r}; known: {sorted(_BUILTINS)}") from None


def catalog_names():
    return sorted(_BUILTINS)


# ----------------------------------------------------------------------
# extension from probability measures to finite measures
# ----------------------------------------------------------------------


def bump_h(r: float) -> float:
    """Smooth cutoff: 1 on ``[1/2, 3/2]``, 0 outside ``[1/4, 2]``, monotone in between."""
    if r <= 0.25 or r >= 2.0:
        return 0.0
    if r < 0.5:
        return smoothstep((r - 0.25) / 0.25)
    if r <= 1.5:
        return 1.0
    return smoothstep((2.0 - r) / 0.5)


def bump_h_prime(r: float) -> float:
    if r <= 0.25 or r >= 2.0 or 0.5 <= r <= 1.5:
        return 0.0
    if r < 0.5:
        return smoothstep_prime((r - 0.25) / 0.25) / 0.25
    return -smoothstep_prime((2.0 - r) / 0.5) / 0.5


def probability_extension(f: Functional) -> Functional:
    """Lift ``f`` on probability measures to ``eta -> bump_h(eta(M)) f(eta / eta(M))``.

    When ``f`` carries a closed-form extrinsic derivative the lift does too:
    at ``m = eta(M)`` and ``mu = eta/m`` it is
    ``bump_h'(m) f(mu) + bump_h(m)/m * (de(mu, x) - mu(de(mu, .)))``.
    """

    def evaluate(eta):
        m = eta.mass
        hm = bump_h(m)
        if hm == 0.0:
            return 0.0
        return hm * f(eta.normalized())

    de = grad_de = None
    if f.de is not None:

        def de(eta, x):
            m = eta.mass
            if m == 0.0 or bump_h(m) == 0.0 and bump_h_prime(m) == 0.0:
                return 0.0
            mu = eta.normalized()
            centered = f.de(mu, x) - integrate(mu, lambda y: f.de(mu, y))
            return bump_h_prime(m) * f(mu) + bump_h(m) / m * centered

    if f.grad_de is not None:

        def grad_de(eta, x):
            m = eta.mass
            if m == 0.0 or bump_h(m) == 0.0:
                return np.zeros(eta.manifold.dim)
            return bump_h(m) / m * np.asarray(f.grad_de(eta.normalized(), x))

    return Functional(f"extension({f.name})", evaluate, de, grad_de, f.tag, notes=f.notes)


# ----------------------------------------------------------------------
# density perturbations h_r for the reweighting identity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DensityPerturbation:
    """A family ``h(r, x)``, ``r in [0, eps0]``, with ``h(0, .) = 0`` and r-derivative ``hdot``."""

    eps0: float
    h: Callable[[float, np.ndarray], float]
    hdot: Callable[[float, np.ndarray], float]
    support: str = field(default="compact")


def linear_perturbation(b: Callable, eps0: float, b_min: float = 0.0) -> DensityPerturbation:
    """``h(r, x) = r b(x)``; ``b_min`` is a lower bound of ``b`` so that ``1 + h_r >= 0``."""
    if not eps0 > 0:
        raise InputError("eps0 must be positive")
    if eps0 * max(-b_min, 0.0) >= 1.0:
        raise InputError("1 + r b(x) would turn negative on [0, eps0]")
    return DensityPerturbation(eps0, lambda r, x: r * float(b(x)), lambda r, x: float(b(x)))


def quadratic_perturbation(b: Callable, c: Callable, eps0: float, lower: float = 0.0) -> DensityPerturbation:
    """``h(r, x) = r b(x) + r^2 c(x)``; ``lower`` bounds ``b`` and ``c`` from below."""
    if eps0 * max(-lower, 0.0) * (1.0 + eps0) >= 1.0:
        raise InputError("1 + h_r would turn negative on [0, eps0]")
    return DensityPerturbation(
        eps0,
        lambda r, x: r * float(b(x)) + r * r * float(c(x)),
        lambda r, x: float(b(x)) + 2.0 * r * float(c(x)),
    )
