import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from measure_calculus import InputError, Manifold, NumericError
from measure_calculus.measures import (
    ParticleMeasure,
    add_dirac,
    as_measure,
    convex_combine,
    cost_matrix,
    coupling_marginals,
    dirac,
    format_measure,
    integrate,
    integrate_signed,
    l2_inner,
    l2_norm,
    load_measure,
    make_measure,
    optimal_coupling,
    parse_measure,
    pushforward,
    reweight,
    sample_field,
    save_measure,
    wasserstein_p,
    zero_measure,
)
from measure_calculus.oracles import transport_vertex_enumeration


def test_construction(R1):
    eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    assert eta.mass == 2.0
    assert len(eta) == 2
    assert not eta.is_zero
    assert zero_measure(R1).is_zero
    assert zero_measure(R1).mass == 0.0


def test_zero_weights_dropped_negative_rejected(R1):
    assert len(make_measure(R1, [(0, [0.0]), (1, [1.0])])) == 1
    with pytest.raises(InputError):
        make_measure(R1, [(-1, [0.0])])


def test_arrays_are_read_only(R1):
    eta = dirac(R1, [0.0])
    with pytest.raises(ValueError):
        eta.weights[0] = 5.0


def test_sphere_points_validated(S2):
    with pytest.raises(InputError):
        make_measure(S2, [(1, [1.0, 1.0, 0.0])])


def test_moment_and_scaling(R1):
    eta = make_measure(R1, [(1, [1.0]), (2, [-2.0])])
    assert eta.moment(2) == pytest.approx(1 + 2 * 4)
    assert eta.scaled(0.5).mass == pytest.approx(1.5)
    assert eta.normalized().mass == pytest.approx(1.0)
    with pytest.raises(InputError):
        zero_measure(R1).normalized()


def test_integration(R1):
    eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    assert integrate(eta, lambda x: x[0] + 1) == 3.0
    gamma = make_measure(R1, [(2, [2.0])])
    assert integrate_signed(gamma, eta, lambda x: x[0]) == 3.0
    with pytest.raises(NumericError):
        integrate(eta, lambda x: np.inf)


def test_add_dirac_appends_atom(R1):
    eta = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    out = add_dirac(eta, 0.5, [1.0])
    assert out.mass == 2.5
    assert len(out) == 3
    assert len(eta) == 2
    with pytest.raises(InputError):
        add_dirac(eta, 0.0, [1.0])


def test_convex_combine(R1):
    mu = make_measure(R1, [(0.5, [0.0]), (0.5, [1.0])])
    out = convex_combine(mu, dirac(R1, [2.0]), 0.25)
    assert out.mass == pytest.approx(1.0)
    assert integrate(out, lambda x: x[0]) == pytest.approx(0.75 * 0.5 + 0.25 * 2)
    with pytest.raises(InputError):
        convex_combine(mu, mu, 1.5)


def test_mixed_manifolds_rejected(R1, R2):
    with pytest.raises(InputError):
        convex_combine(dirac(R1, [0.0]), dirac(R2, [0.0, 0.0]), 0.5)


def test_pushforward_and_reweight(R1, S2):
    eta = make_measure(R1, [(1, [0.0]), (2, [1.0])])
    moved = pushforward(eta, lambda x: x + 1.0)
    assert np.allclose(moved.points, [[1.0], [2.0]])
    assert np.array_equal(moved.weights, eta.weights)
    rw = reweight(eta, lambda x: 1.0 + x[0])
    assert np.allclose(rw.weights, [1.0, 4.0])
    with pytest.raises(InputError):
        reweight(eta, lambda x: -1.0)
    on_sphere = pushforward(dirac(S2, [0.0, 0.0, 1.0]), lambda x: x * (1 + 1e-10))
    assert np.linalg.norm(on_sphere.points[0]) == pytest.approx(1.0, abs=1e-15)


def test_field_sampling(R2, S2):
    eta = make_measure(R2, [(1, [0.0, 0.0]), (2, [1.0, 1.0])])
    assert l2_inner(lambda x: x, lambda x: x, eta) == pytest.approx(4.0)
    assert l2_norm(np.array([[3.0, 4.0], [0.0, 0.0]]), eta) == pytest.approx(5.0)
    with pytest.raises(InputError):
        sample_field(np.zeros((3, 2)), eta)
    with pytest.raises(InputError):
        sample_field(lambda x: x, dirac(S2, [0.0, 0.0, 1.0]))


# ---- text format -------------------------------------------------------


def test_parse_and_format_roundtrip(R2, tmp_path):
    text = "# two atoms\n1 0 0\n\n0.5 1.25 -3  # trailing comment\n"
    eta = parse_measure(text, R2)
    assert eta.mass == 1.5
    save_measure(eta, tmp_path / "m.txt")
    again = load_measure(tmp_path / "m.txt", R2)
    assert np.array_equal(again.weights, eta.weights)
    assert np.array_equal(again.points, eta.points)
    assert format_measure(again) == format_measure(eta)


def test_parse_errors(R2):
    with pytest.raises(InputError):
        parse_measure("1 0", R2)
    with pytest.raises(InputError):
        parse_measure("1 a b", R2)


def test_parse_renormalizes_sphere_points(S2):
    eta = parse_measure("1 0.6 0.8 0.0000001", S2)
    assert np.linalg.norm(eta.points[0]) == pytest.approx(1.0, abs=1e-15)


def test_as_measure_accepts_rows_and_pairs(R2):
    a = as_measure(R2, [[1, 0, 0], [2, 1, 1]])
    b = as_measure(R2, [(1, [0, 0]), (2, [1, 1])])
    assert np.array_equal(a.points, b.points)
    assert as_measure(R2, a) is a


# ---- Wasserstein -------------------------------------------------------


def test_wasserstein_closed_forms(R1):
    d0, d1 = dirac(R1, [0.0]), dirac(R1, [1.0])
    # |1 - 2| mass-moment term plus a unit transport cost
    assert wasserstein_p(d0, d1, 1.0) == pytest.approx(2.0, abs=1e-12)
    half = make_measure(R1, [(0.5, [0.0]), (0.5, [2.0])])
    assert wasserstein_p(half, d1, 2.0) == pytest.approx(2.0, abs=1e-12)


def test_wasserstein_zero_measure(R1):
    z = zero_measure(R1)
    assert wasserstein_p(z, z, 1.0) == 0.0
    assert wasserstein_p(z, dirac(R1, [1.0]), 1.0) == pytest.approx(2.0)


def test_wasserstein_rejects_bad_p(R1):
    with pytest.raises(InputError):
        wasserstein_p(dirac(R1, [0.0]), dirac(R1, [1.0]), 0.0)


def test_coupling_marginals_are_scaled(R1):
    g = make_measure(R1, [(1, [0.0]), (1, [1.0])])
    e = make_measure(R1, [(3, [2.0])])
    c = optimal_coupling(g, e, 1.0)
    assert np.allclose(c.plan.sum(axis=1), 3.0 * g.weights)
    assert np.allclose(c.plan.sum(axis=0), 2.0 * e.weights)
    assert c.marginal_error() < 1e-12


@pytest.mark.parametrize("spec", ["euclidean:1", "euclidean:2", "sphere:3"])
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_lp_matches_vertex_enumeration(spec, p):
    m = Manifold.from_string(spec)
    rng = np.random.default_rng(hash((spec, p)) % 2**32)
    for _ in range(5):
        pts = rng.normal(size=(6, m.dim))
        if m.is_sphere:
            pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        w = rng.uniform(0.2, 1.5, 6)
        g = make_measure(m, list(zip(w[:3], pts[:3])))
        e = make_measure(m, list(zip(w[3:], pts[3:])))
        rows, cols = coupling_marginals(g, e)
        best = transport_vertex_enumeration(cost_matrix(g, e, p), rows, cols)
        assert optimal_coupling(g, e, p).cost == pytest.approx(best, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(-2.0, 2.0)), min_size=1, max_size=4),
    st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(-2.0, 2.0)), min_size=1, max_size=4),
    st.sampled_from([0.5, 1.0, 2.0]),
)
@example(a=[(1.0, 0.0), (1.0, 2.0), (1.0, 1.192092896e-07)], b=[(1.0, 0.0)], p=2.0)
def test_wasserstein_symmetric_and_zero_on_diagonal(a, b, p):
    m = Manifold.euclidean(1)
    g = make_measure(m, [(w, [x]) for w, x in a])
    e = make_measure(m, [(w, [x]) for w, x in b])
    assert wasserstein_p(g, g, p) == pytest.approx(0.0, abs=1e-9)
    assert wasserstein_p(g, e, p) == pytest.approx(wasserstein_p(e, g, p), abs=1e-9)
    assert wasserstein_p(g, e, p) >= 0.0


def test_vertex_enumeration_tiny_case():
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert transport_vertex_enumeration(cost, np.array([1.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(0.0)
    assert transport_vertex_enumeration(cost, np.array([2.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.0])
def test_self_distance_with_near_coincident_atoms(R1, p):
    # a self-coupling that moves mass between atoms 1e-3 apart costs ~1e-9,
    # below an LP dual tolerance yet visible after the 1/p root
    eta = make_measure(R1, [(1.3, [0.1]), (0.9, [0.101]), (1.1, [-0.7])])
    assert wasserstein_p(eta, eta, p) <= 1e-12


def test_polish_from_northwest_corner_reaches_optimum():
    from measure_calculus.measures import _northwest_corner, _polish

    rng = np.random.default_rng(11)
    for _ in range(20):
        C = rng.uniform(0.0, 2.0, (3, 4))
        rows = rng.uniform(0.2, 1.0, 3)
        cols = rng.uniform(0.2, 1.0, 4)
        cols *= rows.sum() / cols.sum()
        plan, basis = _northwest_corner(rows, cols)
        out = _polish(C, plan, basis)
        assert np.allclose(out.sum(axis=1), rows) and np.allclose(out.sum(axis=0), cols)
        assert float(np.sum(out * C)) == pytest.approx(transport_vertex_enumeration(C, rows, cols), abs=1e-12)


def test_triangle_inequality_can_fail_for_heavy_measures(R1):
    # coupling marginals scale with the other measure's mass, so transport cost grows
    # quadratically in mass while the detour through a light measure grows linearly
    g, e, z = dirac(R1, [-1.0], 10.0), dirac(R1, [1.0], 10.0), dirac(R1, [0.0], 1e-6)
    assert wasserstein_p(g, e, 1.0) == pytest.approx(200.0)
    assert wasserstein_p(g, z, 1.0) + wasserstein_p(z, e, 1.0) == pytest.approx(40.0, abs=1e-3)
