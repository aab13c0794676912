"""Numerical checks of the identities linking the derivatives in measure.

Each ``check_*`` function computes both sides of one identity on one
instance and returns a :class:`Report`.  Non-converged limits never pass:
they produce a failed report whose ``diagnostic`` carries the ladders.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import calculus
from .calculus import DerivativeEstimate, FDConfig, FlowConfig
from .errors import InputError
from .functionals import E1K, DensityPerturbation, Functional, oscillator_mass, tag_at_least
from .measures import (
    ParticleMeasure,
    convex_combine,
    integrate,
    integrate_signed,
    make_measure,
    reweight,
    sample_field,
    wasserstein_p,
)


@dataclass
class Report:
    identity: str
    instance: str
    lhs: float | np.ndarray
    rhs: float | np.ndarray
    residual: float
    tolerance: float
    diagnostic: dict = field(default_factory=dict)
    notes: str = ""
    converged: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.converged and np.isfinite(self.residual) and self.residual <= self.tolerance)

    @property
    def instance_hash(self) -> str:
        return hashlib.sha256(self.instance.encode()).hexdigest()[:12]

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.identity} {self.instance}: residual={self.residual:.3e} tol={self.tolerance:.1e}"


def relative_residual(lhs, rhs) -> float:
    """``|lhs - rhs| / (1 + |lhs|)``; Euclidean norms for vectors."""
    return float(np.linalg.norm(np.subtract(lhs, rhs)) / (1.0 + np.linalg.norm(lhs)))


def _ladder(est: DerivativeEstimate) -> dict:
    return {
        "steps": est.steps,
        "quotients": est.ladder,
        "extrapolated": est.extrapolated,
        "converged": est.converged,
        "spread": est.spread,
    }


def describe(f: Functional, eta: ParticleMeasure, **extra) -> str:
    """Deterministic instance descriptor used for report rows and hashes."""
    atoms = ";".join(" ".join(format(v, ".6g") for v in (w, *x)) for w, x in eta)
    parts = [f"f={f.name}", f"M={eta.manifold}", f"eta=[{atoms}]"]
    for k, v in extra.items():
        if isinstance(v, np.ndarray):
            v = " ".join(format(t, ".6g") for t in v.ravel())
        parts.append(f"{k}={v}")
    return " ".join(parts)


def _require_extrinsic(f: Functional):
    if not tag_at_least(f.tag, E1K):
        raise InputError(f"{f.name} (tag {f.tag}) has no extrinsic derivative to integrate")


# ----------------------------------------------------------------------
# intrinsic / L / extrinsic-gradient consistency
# ----------------------------------------------------------------------


def check_intrinsic_vs_grad(
    f: Functional,
    eta: ParticleMeasure,
    v,
    cfg: FDConfig = FDConfig(),
    flow: FlowConfig = FlowConfig(),
    tol: float = 1e-5,
    label: str = "",
) -> Report:
    """``D^I_v f(eta)`` by flows against ``<grad D^E f(eta), v>_{L^2(eta)}``."""
    lhs = calculus.intrinsic_directional(f, eta, v, cfg, flow)
    grads = np.array([calculus.grad_extrinsic(f, eta, x, cfg) for x in eta.points]).reshape(len(eta), eta.manifold.dim)
    vs = sample_field(v, eta)
    rhs = float(np.sum(eta.weights * np.einsum("ij,ij->i", grads, vs)))
    return Report(
        "intrinsic_vs_grad_extrinsic",
        describe(f, eta, v=label or getattr(v, "name", "v")),
        lhs.value,
        rhs,
        relative_residual(lhs.value, rhs),
        tol,
        {"intrinsic": _ladder(lhs)},
        converged=lhs.converged,
    )


def check_intrinsic_vs_l(
    f: Functional,
    eta: ParticleMeasure,
    v,
    cfg: FDConfig = FDConfig(),
    flow: FlowConfig = FlowConfig(),
    tol: float = 1e-5,
    label: str = "",
) -> Report:
    """Flow-based and geodesic-shift directional derivatives along the same ``v``."""
    lhs = calculus.l_directional(f, eta, v, cfg)
    rhs = calculus.intrinsic_directional(f, eta, v, cfg, flow)
    return Report(
        "l_vs_intrinsic",
        describe(f, eta, v=label or getattr(v, "name", "v")),
        lhs.value,
        rhs.value,
        relative_residual(lhs.value, rhs.value),
        tol,
        {"l_directional": _ladder(lhs), "intrinsic": _ladder(rhs)},
        converged=lhs.converged and rhs.converged,
    )


def l_remainder_ratios(f: Functional, eta: ParticleMeasure, v, scales=(0.1, 0.05, 0.025, 0.0125), cfg: FDConfig = FDConfig()) -> np.ndarray:
    """``|f(eta o phi_{tv}^{-1}) - f(eta) - t <grad D^E f, v>| / (t |v|_{L^2(eta)})`` for each ``t`` in ``scales``.

    Sampled evidence for a vanishing remainder along one direction; a decay
    along finitely many samples cannot certify the uniform version.
    """
    m = eta.manifold
    vs = sample_field(v, eta)
    norm = float(np.sqrt(np.sum(eta.weights * np.einsum("ij,ij->i", vs, vs))))
    if norm == 0.0:
        raise InputError("direction has zero L^2(eta) norm")
    grads = np.array([calculus.grad_extrinsic(f, eta, x, cfg) for x in eta.points]).reshape(len(eta), m.dim)
    linear = float(np.sum(eta.weights * np.einsum("ij,ij->i", grads, vs)))
    base = f(eta)
    return np.array([abs(f(calculus.geodesic_shift(m, eta, vs, t)) - base - t * linear) / (t * norm) for t in scales])


# ----------------------------------------------------------------------
# integral identities
# ----------------------------------------------------------------------


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Nodes and weights of the n-point Gauss-Legendre rule on ``[a, b]``."""
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def check_lfd_identity(
    f: Functional,
    eta: ParticleMeasure,
    gamma: ParticleMeasure,
    n_q: int = 16,
    cfg: FDConfig = FDConfig(),
    tol: float = 1e-6,
) -> Report:
    """``f(gamma) - f(eta) = int_0^1 dr (gamma - eta)(D^E f(r gamma + (1-r) eta))``."""
    _require_extrinsic(f)
    lhs = f(gamma) - f(eta)
    nodes, weights = gauss_legendre(n_q)
    integrand = []
    for r in nodes:
        mid = convex_combine(eta, gamma, r)
        integrand.append(integrate_signed(gamma, eta, lambda y: calculus.extrinsic_value(f, mid, y, cfg)))
    rhs = float(np.dot(weights, integrand))
    atoms = ";".join(" ".join(format(v, ".6g") for v in (w, *x)) for w, x in gamma)
    return Report(
        "linear_functional_derivative",
        describe(f, eta, gamma=f"[{atoms}]", n_q=n_q),
        lhs,
        rhs,
        relative_residual(lhs, rhs),
        tol,
        {"nodes": nodes, "integrand": np.array(integrand)},
    )


def check_reweight_identity(
    f: Functional,
    eta: ParticleMeasure,
    pert: DensityPerturbation,
    eps: float,
    n_q: int = 16,
    cfg: FDConfig = FDConfig(),
    tol: float = 1e-6,
    label: str = "",
) -> Report:
    """``f((1+h_eps) eta) - f(eta) = int_0^eps dr eta(D^E f((1+h_r) eta) hdot_r)``."""
    _require_extrinsic(f)
    if not 0.0 <= eps <= pert.eps0:
        raise InputError(f"eps={eps} outside [0, eps0={pert.eps0}]")
    lhs = f(reweight(eta, lambda x: 1.0 + pert.h(eps, x))) - f(eta)
    nodes, weights = gauss_legendre(n_q, 0.0, eps)
    integrand = []
    for r in nodes:
        eta_r = reweight(eta, lambda x: 1.0 + pert.h(r, x))
        integrand.append(integrate(eta, lambda x: calculus.extrinsic_value(f, eta_r, x, cfg) * pert.hdot(r, x)))
    rhs = float(np.dot(weights, integrand))
    return Report(
        "density_reweighting",
        describe(f, eta, pert=label or "h", eps=eps, n_q=n_q),
        lhs,
        rhs,
        relative_residual(lhs, rhs),
        tol,
        {"nodes": nodes, "integrand": np.array(integrand)},
    )


# ----------------------------------------------------------------------
# Dirac-gradient formulas
# ----------------------------------------------------------------------


def check_dirac_gradient(f: Functional, eta: ParticleMeasure, s: float, x, cfg: FDConfig = FDConfig(), tol: float = 1e-6) -> Report:
    """``grad_y f(eta + s delta_y)|_x`` against ``s grad D^E f(eta + s delta_x)(x)``."""
    left, right = calculus.dirac_gradient(f, eta, s, x, cfg)
    return Report(
        "dirac_gradient",
        describe(f, eta, s=s, x=np.asarray(x, dtype=float)),
        left,
        right,
        relative_residual(left, right),
        tol,
    )


def check_dirac_limit(f: Functional, eta: ParticleMeasure, x, cfg: FDConfig = FDConfig(), tol: float = 1e-5) -> Report:
    """``lim_{s->0} grad_y f(eta + s delta_y)|_x / s`` against ``grad D^E f(eta)(x)``."""
    lhs = calculus.l_field_via_dirac(f, eta, x, cfg)
    rhs = calculus.grad_extrinsic(f, eta, x, cfg)
    return Report(
        "dirac_limit",
        describe(f, eta, x=np.asarray(x, dtype=float)),
        lhs.value,
        rhs,
        relative_residual(lhs.value, rhs),
        tol,
        {"l_field": _ladder(lhs)},
        converged=lhs.converged,
    )


# ----------------------------------------------------------------------
# probability measures
# ----------------------------------------------------------------------


def check_centered(f: Functional, mu: ParticleMeasure, x, cfg: FDConfig = FDConfig(), tol: float = 1e-6) -> Report:
    """Centered extrinsic derivative against ``D^E f(mu)(x) - mu(D^E f(mu))``, all by finite differences."""
    lhs = calculus.centered_extrinsic_fd(f, mu, x, cfg)
    at_x = calculus.extrinsic_fd(f, mu, x, cfg)
    at_atoms = [calculus.extrinsic_fd(f, mu, y, cfg) for y in mu.points]
    rhs = at_x.value - float(np.dot(mu.weights, [e.value for e in at_atoms]))
    converged = lhs.converged and at_x.converged and all(e.converged for e in at_atoms)
    return Report(
        "centered_extrinsic",
        describe(f, mu, x=np.asarray(x, dtype=float)),
        lhs.value,
        rhs,
        relative_residual(lhs.value, rhs),
        tol,
        {"centered": _ladder(lhs), "extrinsic_at_x": _ladder(at_x)},
        converged=converged,
    )


@dataclass
class RandomFamily:
    """Finite-sample-space random points ``xi_s(omega)`` with derivative ``velocity(omega)`` at ``s = 0``.

    ``position(s, i)`` returns ``xi_s`` for the i-th outcome; outcome ``i`` has
    probability ``probs[i]``.
    """

    manifold: object
    probs: np.ndarray
    position: Callable[[float, int], np.ndarray]
    velocity: np.ndarray
    q: float = 2.0
    name: str = "family"

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(len(self.probs), self.manifold.dim)
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise InputError("outcome probabilities must be positive and sum to 1")
        if self.q < 1:
            raise InputError("q must be >= 1")

    @property
    def base(self) -> np.ndarray:
        return np.array([self.position(0.0, i) for i in range(len(self.probs))])

    def law(self, s: float) -> ParticleMeasure:
        return make_measure(self.manifold, [(p, self.position(s, i)) for i, p in enumerate(self.probs)])

    def velocity_error(self, cfg: FDConfig = FDConfig()) -> float:
        """``(E |lim (1/s) log(xi_0, xi_s) - velocity|^q)^(1/q)`` with the limit extrapolated."""
        m = self.manifold
        errs = []
        for i, x0 in enumerate(self.base):
            est = calculus.estimate(lambda s: m.log(x0, self.position(s, i)) / s, cfg)
            errs.append(np.linalg.norm(est.value - self.velocity[i]) ** self.q)
        return float(np.dot(self.probs, errs) ** (1.0 / self.q))


def check_distribution_derivative(
    f: Functional,
    family: RandomFamily,
    cfg: FDConfig = FDConfig(),
    tol: float = 1e-5,
    p: float = 2.0,
) -> Report:
    """``d/ds f(law(xi_s))`` at 0 against ``E <grad centered D^E f(law(xi_0))(xi_0), xi_dot_0>``."""
    verr = family.velocity_error(cfg)
    scale = 1.0 + float(np.max(np.linalg.norm(family.velocity, axis=1)))
    if verr > 1e-5 * scale:
        raise InputError(f"velocity does not match the derivative of xi_s (error {verr:.3e})")
    m = family.manifold
    mu = family.law(0.0)
    base = f(mu)
    lhs = calculus.estimate(lambda s: (f(family.law(s)) - base) / s, cfg)

    if f.de is not None:
        mean = integrate(mu, lambda y: f.de(mu, y))

        def centered(y):
            return f.de(mu, y) - mean

    else:

        def centered(y):
            return calculus.centered_extrinsic_fd(f, mu, y, cfg).value

    rhs = 0.0
    for pr, x0, v in zip(family.probs, family.base, family.velocity):
        rhs += pr * float(np.dot(m.gradient(centered, x0, h=cfg.h), v))

    w_ladder = np.array([wasserstein_p(family.law(s), mu, p) for s in cfg.steps])
    return Report(
        "distribution_derivative",
        f"f={f.name} M={m} family={family.name} n={len(family.probs)} q={family.q:g}",
        lhs.value,
        rhs,
        relative_residual(lhs.value, rhs),
        tol,
        {"quotient": _ladder(lhs), "velocity_error": verr, "wasserstein_to_law0": w_ladder},
        notes=f.notes,
        converged=lhs.converged,
    )


# ----------------------------------------------------------------------
# counter-example
# ----------------------------------------------------------------------


def check_counterexample(eta: ParticleMeasure, v, x, cfg: FDConfig = FDConfig()) -> Report:
    """Extrinsic quotient of ``psi(eta(M))`` oscillates while the L-directional derivative is 0."""
    f = oscillator_mass()
    ext = calculus.extrinsic_fd(f, eta, x, cfg)
    ld = calculus.l_directional(f, eta, v, cfg)
    oscillates = (not ext.converged) and ext.spread >= cfg.spread_threshold
    notes = ""
    if abs(eta.mass - 2.0) > 1e-12:
        notes = "eta(M) != 2: psi is smooth here, the counter-example does not apply"
    return Report(
        "counterexample",
        describe(f, eta, x=np.asarray(x, dtype=float), v=getattr(v, "name", "v")),
        ld.value,
        0.0,
        abs(ld.value),
        0.0,
        {"extrinsic": _ladder(ext), "l_directional": _ladder(ld), "oscillates": oscillates},
        notes=notes,
        converged=oscillates and ld.converged,
    )


def check_wasserstein_pair(gamma: ParticleMeasure, eta: ParticleMeasure, p: float, expected: float, tol: float = 1e-9, label: str = "") -> Report:
    """Compare the metric with an independently computed value."""
    value = wasserstein_p(gamma, eta, p)
    return Report(
        "wasserstein",
        label or f"p={p:g} n={len(gamma)}x{len(eta)}",
        value,
        expected,
        abs(value - expected) / (1.0 + abs(expected)),
        tol,
    )
