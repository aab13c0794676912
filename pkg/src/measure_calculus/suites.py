"""Seeded verification suites over random desk-scale instances.

Every suite draws its instances from its own ``numpy`` PCG64 generator seeded
with ``SeedSequence([seed, suite_index])``, so a suite produces the same
instances whether it runs alone or as part of ``all``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fields
from .calculus import FDConfig, FlowConfig
from .functionals import (
    CylindricalSpec,
    Functional,
    cylindrical_make,
    first_moment_squared,
    linear_perturbation,
    moment,
    outer_exp_quadratic,
    outer_product,
    probability_extension,
    quadratic_perturbation,
    sphere_height,
    total_mass,
)
from .geometry import Manifold
from .measures import ParticleMeasure, coupling_marginals, cost_matrix, dirac, make_measure, optimal_coupling, wasserstein_p
from .oracles import directional_derivative, transport_vertex_enumeration
from .verification import (
    RandomFamily,
    Report,
    check_centered,
    check_counterexample,
    check_dirac_gradient,
    check_dirac_limit,
    check_distribution_derivative,
    check_intrinsic_vs_grad,
    check_intrinsic_vs_l,
    check_lfd_identity,
    check_reweight_identity,
    check_wasserstein_pair,
)

DEFAULT_MANIFOLDS = ("euclidean:1", "euclidean:2", "sphere:3")

# Euclidean atoms live in [-1.5, 1.5]^d; vector fields are cut off beyond radius 3
BOX = 1.5
CUTOFF = (3.0, 4.0)


@dataclass
class SuiteContext:
    manifolds: list
    seed: int = 42
    cfg: FDConfig = field(default_factory=FDConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    tol: float | None = None  # overrides every random-instance tolerance when set

    def rng(self, suite: str) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, SUITE_NAMES.index(suite)])))

    def tolerance(self, default: float) -> float:
        return default if self.tol is None else self.tol

    def has(self, spec: str) -> bool:
        return any(str(m) == spec for m in self.manifolds)

    def get(self, spec: str) -> Manifold | None:
        for m in self.manifolds:
            if str(m) == spec:
                return m
        return None


# ----------------------------------------------------------------------
# random instance generators
# ----------------------------------------------------------------------


def random_point(m: Manifold, rng) -> np.ndarray:
    if not m.is_sphere:
        return rng.uniform(-BOX, BOX, m.dim)
    while True:
        x = rng.normal(size=m.dim)
        x /= np.linalg.norm(x)
        # stay well away from the antipode of o, where rho_o^2 is not smooth
        if np.dot(x, m.origin) > -0.5:
            return x


def random_measure(m: Manifold, rng, n: int | None = None, mass: float | None = None) -> ParticleMeasure:
    n = int(rng.integers(1, 21)) if n is None else n
    w = rng.uniform(0.2, 1.5, n)
    if mass is not None:
        w *= mass / w.sum()
    return make_measure(m, [(wi, random_point(m, rng)) for wi in w])


def random_field(m: Manifold, rng) -> fields.VectorField:
    A = rng.normal(scale=0.7, size=(m.dim, m.dim))
    b = rng.normal(scale=0.7, size=m.dim)
    cutoff = None if m.is_sphere else fields.radial_cutoff(*CUTOFF)
    v = fields.linear_field(A, b, cutoff=cutoff, manifold=m)
    return fields.VectorField(v.value, v.compact_support, name=f"linear(seeded)")


def random_cylindrical(m: Manifold, rng) -> Functional:
    kind = int(rng.integers(0, 2))
    c = random_point(m, rng)
    if kind == 0:
        g, dg = outer_product()
        inner = [fields.coordinate(int(rng.integers(0, m.dim))), fields.smooth_bump(c, 2.5)]
        name = "cyl_product"
    else:
        a = float(rng.uniform(0.1, 0.5))
        g, dg = outer_exp_quadratic(a)
        inner = [fields.coordinate(m.dim - 1), fields.distance_power(m, 2.0)]
        name = f"cyl_expquad({a:.3f})"
    return cylindrical_make(CylindricalSpec(g, dg, inner, name=name))


def e11_catalog(m: Manifold, rng) -> Functional:
    """Pick an E11 functional: a fixed catalog entry or a random cylindrical one."""
    options = [first_moment_squared, lambda: moment(2.0), total_mass, lambda: random_cylindrical(m, rng)]
    if m.is_sphere:
        options.append(sphere_height)
    return options[int(rng.integers(0, len(options)))]()


def _cycle(ctx: SuiteContext, count: int):
    for i in range(count):
        yield i, ctx.manifolds[i % len(ctx.manifolds)]


# ----------------------------------------------------------------------
# suites
# ----------------------------------------------------------------------


def suite_cylindrical(ctx: SuiteContext, count: int = 50) -> list[Report]:
    rng = ctx.rng("cylindrical")
    tol = ctx.tolerance(1e-5)
    out = []
    for i, m in _cycle(ctx, count):
        f = e11_catalog(m, rng)
        eta = random_measure(m, rng)
        v = random_field(m, rng)
        label = f"seeded#{i}"
        out.append(check_intrinsic_vs_grad(f, eta, v, ctx.cfg, ctx.flow, tol, label))
        out.append(check_intrinsic_vs_l(f, eta, v, ctx.cfg, ctx.flow, tol, label))
    return out


def suite_lfd(ctx: SuiteContext, count: int = 20) -> list[Report]:
    rng = ctx.rng("lfd")
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
        gamma = make_measure(R1, [(2, [2.0])])
        out.append(check_lfd_identity(first_moment_squared(), eta, gamma, 16, ctx.cfg, tol=1e-8))
    tol = ctx.tolerance(1e-6)
    for _, m in _cycle(ctx, count):
        f = e11_catalog(m, rng)
        out.append(check_lfd_identity(f, random_measure(m, rng), random_measure(m, rng), 16, ctx.cfg, tol))
    return out


def suite_reweight(ctx: SuiteContext, count: int = 20) -> list[Report]:
    rng = ctx.rng("reweight")
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
        pert = linear_perturbation(fields.smooth_bump([0.0], 1.0), 0.25)
        out.append(check_reweight_identity(first_moment_squared(), eta, pert, 0.25, 16, ctx.cfg, 1e-8, "bump(0,1)"))
    tol = ctx.tolerance(1e-6)
    for _, m in _cycle(ctx, count):
        f = e11_catalog(m, rng)
        eta = random_measure(m, rng)
        b = fields.smooth_bump(random_point(m, rng), float(rng.uniform(0.8, 2.5)))
        if rng.random() < 0.5:
            pert, label = linear_perturbation(b, 0.25), "r*bump"
        else:
            c = fields.smooth_bump(random_point(m, rng), 2.0)
            pert, label = quadratic_perturbation(b, c, 0.25), "r*bump+r^2*bump"
        eps = float(rng.uniform(0.05, 0.25))
        out.append(check_reweight_identity(f, eta, pert, eps, 16, ctx.cfg, tol, label))
    return out


def suite_dirac(ctx: SuiteContext, count: int = 20) -> list[Report]:
    rng = ctx.rng("dirac")
    out = []
    aad_tol = ctx.tolerance(1e-6)
    lim_tol = ctx.tolerance(1e-5)
    for _, m in _cycle(ctx, count):
        f = e11_catalog(m, rng)
        eta = random_measure(m, rng)
        x = random_point(m, rng)
        for s in (1.0, 0.5, 0.1):
            out.append(check_dirac_gradient(f, eta, s, x, ctx.cfg, aad_tol))
        out.append(check_dirac_limit(f, eta, x, ctx.cfg, lim_tol))
    return out


def suite_centered(ctx: SuiteContext, count: int = 20) -> list[Report]:
    rng = ctx.rng("centered")
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        mu = make_measure(R1, [(0.5, [0.0]), (0.5, [1.0])])
        out.append(check_centered(first_moment_squared(), mu, [2.0], ctx.cfg, tol=1e-10))
    tol = ctx.tolerance(1e-6)
    for _, m in _cycle(ctx, count):
        f = e11_catalog(m, rng)
        mu = random_measure(m, rng, mass=1.0)
        out.append(check_centered(f, mu, random_point(m, rng), ctx.cfg, tol))
    return out


def _euclidean_family(m: Manifold, rng, n: int) -> RandomFamily:
    probs = rng.uniform(0.2, 1.0, n)
    probs /= probs.sum()
    x0 = rng.uniform(-BOX, BOX, (n, m.dim))
    a = rng.normal(size=(n, m.dim))
    b = rng.normal(size=(n, m.dim))
    c = rng.normal(scale=0.3, size=(n, m.dim))
    return RandomFamily(
        m,
        probs,
        lambda s, i: x0[i] + s * a[i] + s**2 * b[i] + s**3 * c[i],
        a,
        name="poly3(seeded)",
    )


def suite_distribution(ctx: SuiteContext, count: int = 10) -> list[Report]:
    rng = ctx.rng("distribution")
    tol = ctx.tolerance(1e-5)
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        x0 = np.array([[0.0], [1.0]])
        fam = RandomFamily(R1, [0.5, 0.5], lambda s, i: x0[i] * (1.0 + s), x0, name="uniform{0,1}*(1+s)")
        out.append(check_distribution_derivative(first_moment_squared(), fam, ctx.cfg, tol))
    S = ctx.get("sphere:3")
    if S is not None:
        e1, e3 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
        fam = RandomFamily(S, [1.0], lambda s, i: S.exp(e1, s * e3), [e3], name="exp(s e3) at e1")
        out.append(check_distribution_derivative(sphere_height(), fam, ctx.cfg, tol))
    R2 = ctx.get("euclidean:2")
    if R2 is not None:
        for i in range(count):
            f = e11_catalog(R2, rng)
            if i % 2:
                f = probability_extension(f)
            fam = _euclidean_family(R2, rng, int(rng.integers(1, 8)))
            out.append(check_distribution_derivative(f, fam, ctx.cfg, tol))
    return out


def suite_counterexample(ctx: SuiteContext, count: int = 10) -> list[Report]:
    rng = ctx.rng("counterexample")
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
        v = fields.linear_field([[1.0]], cutoff=fields.radial_cutoff(2.0, 3.0))
        out.append(check_counterexample(eta, fields.VectorField(v.value, True, "x*chi"), [5.0], ctx.cfg))
    for m in ctx.manifolds:
        for _ in range(count):
            eta = random_measure(m, rng, mass=2.0)
            out.append(check_counterexample(eta, random_field(m, rng), random_point(m, rng), ctx.cfg))
    return out


def suite_wasserstein(ctx: SuiteContext, count: int = 20) -> list[Report]:
    rng = ctx.rng("wasserstein")
    out = []
    R1 = ctx.get("euclidean:1")
    if R1 is not None:
        d0, d1 = dirac(R1, [0.0]), dirac(R1, [1.0])
        out.append(check_wasserstein_pair(d0, d1, 1.0, 2.0, label="W_1(delta_0, delta_1)"))
        half = make_measure(R1, [(0.5, [0.0]), (0.5, [2.0])])
        out.append(check_wasserstein_pair(half, d1, 2.0, 2.0, label="W_2(delta_0/2 + delta_2/2, delta_1)"))
    for m in ctx.manifolds:
        for i in range(count):
            p = float(rng.choice([0.5, 1.0, 2.0, 3.0]))
            gamma = random_measure(m, rng, n=3)
            eta = random_measure(m, rng, n=3)
            rows, cols = coupling_marginals(gamma, eta)
            best = transport_vertex_enumeration(cost_matrix(gamma, eta, p), rows, cols)
            lp = optimal_coupling(gamma, eta, p)
            out.append(
                Report(
                    "transport_lp_vs_vertices",
                    f"M={m} p={p:g} 3x3 seeded#{i}",
                    lp.cost,
                    best,
                    abs(lp.cost - best) / (1.0 + abs(best)),
                    1e-9,
                    {"marginal_error": lp.marginal_error()},
                    converged=lp.marginal_error() <= 1e-9,
                )
            )
            out.append(check_wasserstein_pair(gamma, gamma, p, 0.0, label=f"W_p(eta, eta) M={m} p={p:g} seeded#{i}"))
            # the triangle inequality is sampled and recorded, never asserted
            zeta = random_measure(m, rng, n=3)
            w_ge, w_eg = wasserstein_p(gamma, eta, p), wasserstein_p(eta, gamma, p)
            excess = w_ge - wasserstein_p(gamma, zeta, p) - wasserstein_p(zeta, eta, p)
            out.append(
                Report(
                    "wasserstein_symmetry",
                    f"M={m} p={p:g} seeded#{i}",
                    w_ge,
                    w_eg,
                    abs(w_ge - w_eg),
                    1e-9,
                    {"triangle_excess_sample": excess},
                )
            )
    return out


def _random_scalar(m: Manifold, rng):
    a, b, c = rng.normal(size=(3, m.dim))

    def phi(x):
        return float(np.sin(a @ x) + 0.5 * (b @ x) ** 2 + c @ x)

    return phi


def suite_geometry(ctx: SuiteContext, count: int = 100) -> list[Report]:
    """Aggregated per manifold: the worst residual over ``count`` seeded probes."""
    rng = ctx.rng("geometry")
    out = []
    for m in ctx.manifolds:
        worst = {"exp_log_inverse": 0.0, "log_norm_is_distance": 0.0, "exp_distance": 0.0,
                 "transport_isometry": 0.0, "gradient_vs_directional": 0.0, "triangle_bound": 0.0}
        for _ in range(count):
            x, y = random_point(m, rng), random_point(m, rng)
            if m.is_sphere and m.distance(x, y) > np.pi - 1e-3:
                y = m.exp(x, 0.5 * m.project_tangent(x, y - x))
            u = m.log(x, y)
            worst["exp_log_inverse"] = max(worst["exp_log_inverse"], np.linalg.norm(m.exp(x, u) - y))
            worst["log_norm_is_distance"] = max(worst["log_norm_is_distance"], abs(np.linalg.norm(u) - m.distance(x, y)))
            v = m.project_tangent(x, rng.normal(size=m.dim))
            if m.is_sphere:
                v *= rng.uniform(0.0, 3.0) / max(np.linalg.norm(v), 1e-300)
            worst["exp_distance"] = max(worst["exp_distance"], abs(m.distance(x, m.exp(x, v)) - np.linalg.norm(v)))
            w = m.project_tangent(x, rng.normal(size=m.dim))
            tv, tw = m.transport(x, y, v), m.transport(x, y, w)
            iso = max(abs(np.linalg.norm(tv) - np.linalg.norm(v)), abs(tv @ tw - v @ w), abs(tv @ y) if m.is_sphere else 0.0)
            worst["transport_isometry"] = max(worst["transport_isometry"], iso)
            phi = _random_scalar(m, rng)
            d = m.project_tangent(x, rng.normal(size=m.dim))
            d /= np.linalg.norm(d)
            g = m.gradient(phi, x)
            dd = directional_derivative(m, phi, x, d)
            worst["gradient_vs_directional"] = max(worst["gradient_vs_directional"], abs(g @ d - dd) / (1.0 + abs(dd)))
            s = rng.uniform(0.0, 1.0)
            excess = m.origin_distance(m.exp(x, s * v)) - (m.origin_distance(x) + np.linalg.norm(v))
            worst["triangle_bound"] = max(worst["triangle_bound"], excess)
        tols = {"exp_log_inverse": 1e-9, "log_norm_is_distance": 1e-9, "exp_distance": 1e-9,
                "transport_isometry": 1e-9, "gradient_vs_directional": 1e-6, "triangle_bound": 1e-12}
        for name, res in worst.items():
            out.append(Report(f"geometry_{name}", f"M={m} probes={count}", res, 0.0, float(max(res, 0.0)), tols[name]))
    return out


SUITES = {
    "geometry": suite_geometry,
    "wasserstein": suite_wasserstein,
    "cylindrical": suite_cylindrical,
    "lfd": suite_lfd,
    "reweight": suite_reweight,
    "dirac": suite_dirac,
    "centered": suite_centered,
    "distribution": suite_distribution,
    "counterexample": suite_counterexample,
}
SUITE_NAMES = list(SUITES)


def run_suites(names, ctx: SuiteContext) -> list[tuple[str, list[Report]]]:
    """Run suites in canonical order; ``"all"`` expands to every suite."""
    names = list(names)
    if "all" in names:
        names = SUITE_NAMES
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {unknown}; known: {SUITE_NAMES + ['all']}")
    ordered = [n for n in SUITE_NAMES if n in names]
    return [(n, SUITES[n](ctx)) for n in ordered]
