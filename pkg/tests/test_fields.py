import numpy as np
import pytest

from measure_calculus import Manifold, fields


def test_smoothstep_shape():
    assert fields.smoothstep(0.0) == 0.0
    assert fields.smoothstep(1.0) == 1.0
    assert fields.smoothstep(0.5) == pytest.approx(0.5)
    ts = np.linspace(0, 1, 50)
    vals = [fields.smoothstep(t) for t in ts]
    assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("t", [0.1, 0.3, 0.5, 0.8, 0.95])
def test_smoothstep_prime_matches_difference(t):
    h = 1e-6
    fd = (fields.smoothstep(t + h) - fields.smoothstep(t - h)) / (2 * h)
    assert fields.smoothstep_prime(t) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_bump_and_cutoff_values():
    b = fields.smooth_bump([0.0, 0.0], 1.0)
    assert b(np.zeros(2)) == pytest.approx(1.0)
    assert b(np.array([1.5, 0.0])) == 0.0
    c = fields.radial_cutoff(3.0, 4.0)
    assert c(np.array([1.0, 2.0])) == 1.0
    assert c(np.array([5.0, 0.0])) == 0.0


@pytest.mark.parametrize(
    "phi",
    [
        fields.smooth_bump([0.3, -0.2], 1.5),
        fields.radial_cutoff(0.5, 2.0),
        fields.distance_power(Manifold.euclidean(2), 2.0),
        fields.distance_power(Manifold.euclidean(2), 3.0),
        fields.coordinate(1),
    ],
    ids=["bump", "cutoff", "dist2", "dist3", "coord"],
)
def test_analytic_gradients_match_differences(phi):
    m = Manifold.euclidean(2)
    bare = lambda x: phi(x)  # no grad hook: forces finite differences
    for x in ([0.4, 0.7], [-1.1, 0.3], [1.2, -0.6]):
        x = np.array(x)
        assert np.allclose(m.gradient(phi, x), m.gradient(bare, x, richardson=True), atol=1e-7)


def test_sphere_distance_power_gradient():
    m = Manifold.sphere(3)
    phi = fields.distance_power(m, 2.0)
    x = np.array([0.6, 0.0, 0.8])
    assert np.allclose(m.gradient(phi, x), m.gradient(lambda y: phi(y), x, richardson=True), atol=1e-7)


def test_vector_fields():
    m = Manifold.sphere(3)
    v = fields.linear_field(np.eye(3), manifold=m)
    assert v.compact_support
    x = np.array([0.0, 0.6, 0.8])
    assert np.allclose(v(x), 0.0)
    assert not fields.linear_field(np.eye(2)).compact_support
    w = fields.constant_field([1.0, 0.0], cutoff=fields.radial_cutoff(1.0, 2.0))
    assert w.compact_support
    assert np.allclose(w(np.array([3.0, 0.0])), 0.0)
    assert np.allclose(fields.zero_field()(np.ones(2)), 0.0)
