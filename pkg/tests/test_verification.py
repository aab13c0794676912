import numpy as np
import pytest

from measure_calculus import InputError, Manifold, fields
from measure_calculus.calculus import FDConfig
from measure_calculus.functionals import builtin, linear_perturbation, oscillator_mass
from measure_calculus.measures import dirac, make_measure
from measure_calculus.verification import (
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
    gauss_legendre,
    relative_residual,
)

CUT = fields.radial_cutoff(3.0, 4.0)


@pytest.fixture
def eta(R1):
    return make_measure(R1, [(1, [0.0]), (1, [1.0])])


def test_report_pass_logic():
    ok = Report("id", "inst", 1.0, 1.0, 0.0, 1e-6)
    assert ok.passed
    assert "[PASS]" in str(ok)
    assert len(ok.instance_hash) == 12
    assert not Report("id", "inst", 1.0, 2.0, 0.5, 1e-6).passed
    assert not Report("id", "inst", 1.0, 1.0, 0.0, 1e-6, converged=False).passed
    assert not Report("id", "inst", np.nan, 1.0, np.nan, 1e-6).passed


def test_relative_residual():
    assert relative_residual(1.0, 1.0) == 0.0
    assert relative_residual(3.0, 1.0) == pytest.approx(0.5)
    assert relative_residual(np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(5.0 / 6.0)


def test_gauss_legendre_exactness():
    x, w = gauss_legendre(16, 0.0, 2.0)
    assert np.dot(w, x**31) == pytest.approx(2.0**32 / 32, rel=1e-13)


def test_lfd_closed_form(R1, eta):
    r = check_lfd_identity(builtin("first_moment_squared"), eta, make_measure(R1, [(2, [2.0])]))
    assert r.lhs == pytest.approx(15.0)
    assert r.rhs == pytest.approx(15.0, abs=1e-8)
    assert r.passed


def test_lfd_rejects_functional_without_derivative(R1, eta):
    with pytest.raises(InputError):
        check_lfd_identity(oscillator_mass(), eta, dirac(R1, [2.0]))


def test_reweight_closed_form(eta):
    pert = linear_perturbation(fields.smooth_bump([0.0], 1.0), 0.25)
    r = check_reweight_identity(builtin("first_moment_squared"), eta, pert, 0.25, tol=1e-8)
    assert r.passed, r
    with pytest.raises(InputError):
        check_reweight_identity(builtin("first_moment_squared"), eta, pert, 0.5)


@pytest.mark.parametrize("s", [1.0, 0.5, 0.1])
def test_dirac_gradient(R2, s):
    f = builtin("moment(2)")
    eta = make_measure(R2, [(1, [0.3, 0.1]), (0.5, [-1.0, 0.4])])
    assert check_dirac_gradient(f, eta, s, np.array([0.2, 0.9])).passed


def test_dirac_limit(S2):
    eta = make_measure(S2, [(1, [0.0, 0.0, 1.0]), (2, [0.0, 0.6, 0.8])])
    r = check_dirac_limit(builtin("moment(2)"), eta, np.array([0.6, 0.0, 0.8]))
    assert r.passed, r


def test_centered_closed_form(R1):
    mu = make_measure(R1, [(0.5, [0.0]), (0.5, [1.0])])
    r = check_centered(builtin("first_moment_squared"), mu, [2.0], tol=1e-10)
    assert r.lhs == pytest.approx(1.5, abs=1e-10)
    assert r.passed


@pytest.mark.parametrize("spec", ["euclidean:2", "sphere:3"])
def test_intrinsic_checks(spec):
    m = Manifold.from_string(spec)
    A = np.array([[0.2, -1.0, 0.3], [1.0, 0.1, 0.0], [0.4, 0.0, -0.5]])[: m.dim, : m.dim]
    v = fields.linear_field(A, cutoff=None if m.is_sphere else CUT, manifold=m)
    pts = np.array([[0.0, 0.6, 0.8], [0.6, 0.0, 0.8]])[:, -m.dim:]
    pts /= np.linalg.norm(pts, axis=1, keepdims=True) if m.is_sphere else 1.0
    eta = make_measure(m, [(1.0, pts[0]), (0.7, pts[1])])
    for name in ("moment(2)", "first_moment_squared"):
        f = builtin(name)
        assert check_intrinsic_vs_grad(f, eta, v).passed
        assert check_intrinsic_vs_l(f, eta, v).passed


def test_distribution_examples(R1, S2):
    x0 = np.array([[0.0], [1.0]])
    fam = RandomFamily(R1, [0.5, 0.5], lambda s, i: x0[i] * (1.0 + s), x0)
    r = check_distribution_derivative(builtin("first_moment_squared"), fam)
    assert r.lhs == pytest.approx(0.5, abs=1e-5)
    assert r.passed
    e1, e3 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
    fam = RandomFamily(S2, [1.0], lambda s, i: S2.exp(e1, s * e3), [e3])
    r = check_distribution_derivative(builtin("sphere_height"), fam)
    assert r.lhs == pytest.approx(1.0, abs=1e-5)
    assert r.passed


def test_distribution_rejects_wrong_velocity(R1):
    x0 = np.array([[0.0], [1.0]])
    fam = RandomFamily(R1, [0.5, 0.5], lambda s, i: x0[i] * (1.0 + s), 2 * x0)
    with pytest.raises(InputError):
        check_distribution_derivative(builtin("first_moment_squared"), fam)


def test_random_family_validation(R1):
    with pytest.raises(InputError):
        RandomFamily(R1, [0.5, 0.6], lambda s, i: np.zeros(1), np.zeros((2, 1)))


def test_counterexample(R1, eta):
    v = fields.linear_field([[1.0]], cutoff=fields.radial_cutoff(2.0, 3.0))
    r = check_counterexample(eta, v, [5.0])
    assert r.passed
    assert r.lhs == 0.0
    assert r.diagnostic["extrinsic"]["converged"] is False
    assert r.diagnostic["extrinsic"]["spread"] >= 0.5


def test_counterexample_off_singularity_does_not_pass(R1):
    # at mass 1 psi is smooth, so the extrinsic quotient settles and nothing is separated
    r = check_counterexample(dirac(R1, [0.0]), fields.zero_field(), [1.0])
    assert not r.passed
    assert r.notes


def test_wasserstein_pair(R1):
    assert check_wasserstein_pair(dirac(R1, [0.0]), dirac(R1, [1.0]), 1.0, 2.0).passed
    assert not check_wasserstein_pair(dirac(R1, [0.0]), dirac(R1, [1.0]), 1.0, 2.5).passed


def test_a_wrong_identity_fails(R1, eta):
    # pair an lhs with the rhs of a different functional: the harness must report failure
    r = check_lfd_identity(builtin("first_moment_squared"), eta, dirac(R1, [2.0], 2.0))
    bad = Report(r.identity, r.instance, r.lhs, r.rhs + 1e-3, relative_residual(r.lhs, r.rhs + 1e-3), r.tolerance)
    assert not bad.passed


def test_verification_reference_examples(R1):
    eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    v = fields.linear_field([[1.0]], cutoff=fields.radial_cutoff(2.0, 3.0))
    r = check_intrinsic_vs_grad(builtin("moment(1)"), make_measure(R1, [(1, [0.5]), (1, [1.0])]), v)
    assert r.passed
    linear = check_intrinsic_vs_grad(builtin("total_mass"), eta, v)
    assert linear.lhs == 0.0 and linear.rhs == 0.0
    # unit shift on the support: lhs = rhs = 2 eta(x) (v(0) + v(1)) = 4
    shift = fields.constant_field([1.0], cutoff=fields.radial_cutoff(2.0, 3.0))
    r = check_intrinsic_vs_grad(builtin("first_moment_squared"), eta, shift)
    assert r.lhs == pytest.approx(4.0, abs=1e-8) and r.rhs == pytest.approx(4.0, abs=1e-8)
    r = check_dirac_gradient(builtin("first_moment_squared"), eta, 0.5, [2.0])
    assert np.allclose(r.lhs, [2.0]) and np.allclose(r.rhs, [2.0])
    assert check_lfd_identity(builtin("total_mass"), eta, eta).lhs == 0.0


def test_counterexample_note_away_from_kink(R1):
    eta = make_measure(R1, [(1, [0.0]), (2, [1.0])])
    r = check_counterexample(eta, fields.zero_field(), [5.0])
    assert r.diagnostic["extrinsic"]["converged"] is True
    assert "does not apply" in r.notes
    assert not r.passed


@pytest.mark.parametrize("c", [0.01, 1.0, 50.0])
def test_identities_are_scale_robust(R2, c):
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, (5, 2))
    eta = make_measure(R2, list(zip(c * rng.uniform(0.2, 1.0, 5), pts)))
    gamma = make_measure(R2, list(zip(c * rng.uniform(0.2, 1.0, 3), pts[:3] + 0.3)))
    f = builtin("first_moment_squared")
    v = fields.linear_field([[0.3, -1.0], [1.0, 0.2]], cutoff=CUT)
    assert check_lfd_identity(f, eta, gamma).passed
    assert check_intrinsic_vs_grad(f, eta, v).passed
    assert check_dirac_gradient(f, eta, 0.5, pts[0]).passed


def test_quadrature_error_shrinks_with_more_nodes(R1):
    from measure_calculus.functionals import cylindrical_from_config

    f = cylindrical_from_config({"outer": "exp_quadratic", "params": {"a": 0.8}, "inner": [{"coordinate": 0}, {"distance_power": 2}]}, R1)
    eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    gamma = make_measure(R1, [(2, [1.5])])
    res = [check_lfd_identity(f, eta, gamma, n_q).residual for n_q in (1, 2, 4, 8, 16)]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert res[-1] < 1e-12


def test_mass_flow_invariance(S2):
    from measure_calculus.calculus import intrinsic_directional

    eta = make_measure(S2, [(1, [0.0, 0.0, 1.0]), (2, [0.6, 0.0, 0.8])])
    v = fields.linear_field(np.array([[0.0, -1.0, 0.3], [1.0, 0.0, 0.0], [0.0, 0.2, 0.0]]), manifold=S2)
    assert intrinsic_directional(builtin("total_mass"), eta, v).value == 0.0


def test_zero_measure_is_accepted(R1):
    from measure_calculus.calculus import extrinsic_fd, l_directional
    from measure_calculus.measures import zero_measure

    z = zero_measure(R1)
    # s -> f(s delta_3) = 9 s^2 has derivative 0 at 0+
    assert extrinsic_fd(builtin("first_moment_squared"), z, [3.0]).value == pytest.approx(0.0, abs=1e-12)
    assert extrinsic_fd(builtin("total_mass"), z, [3.0]).value == pytest.approx(1.0)
    assert l_directional(builtin("total_mass"), z, fields.zero_field()).value == 0.0


def test_linearity_of_extrinsic_derivative(R2):
    from measure_calculus.calculus import extrinsic_fd
    from measure_calculus.functionals import Functional

    f, g = builtin("first_moment_squared"), builtin("moment(2)")
    h = Functional("2f-3g", lambda eta: 2 * f(eta) - 3 * g(eta))
    eta = make_measure(R2, [(1, [0.2, 0.4]), (0.5, [-1.0, 0.3])])
    x = np.array([0.7, -0.1])
    want = 2 * extrinsic_fd(f, eta, x).value - 3 * extrinsic_fd(g, eta, x).value
    assert extrinsic_fd(h, eta, x).value == pytest.approx(want, abs=1e-6)


@pytest.mark.parametrize("spec", ["euclidean:2", "sphere:3"])
def test_l_remainder_ratio_decays(spec):
    from measure_calculus.verification import l_remainder_ratios

    m = Manifold.from_string(spec)
    pts = np.array([[0.0, 0.6, 0.8], [0.6, 0.0, 0.8], [0.0, 0.0, 1.0]])[:, -m.dim:]
    if m.is_sphere:
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    eta = make_measure(m, [(1.0, p) for p in pts])
    vs = np.array([m.project_tangent(x, [0.3, -0.5, 0.7][: m.dim]) for x in pts])
    ratios = l_remainder_ratios(builtin("moment(2)"), eta, vs)
    # first order remainder: ratio roughly halves with t
    assert np.all(np.diff(ratios) < 0)
    assert ratios[-1] / ratios[0] < 0.2
