import numpy as np
import pytest

from measure_calculus import Manifold
from measure_calculus.suites import SUITE_NAMES, SuiteContext, random_measure, random_point, run_suites

MANIFOLDS = [Manifold.from_string(s) for s in ("euclidean:1", "euclidean:2", "sphere:3")]


def test_rng_streams_are_independent_and_reproducible():
    ctx = SuiteContext(MANIFOLDS, seed=42)
    a = ctx.rng("lfd").random(3)
    assert np.array_equal(a, SuiteContext(MANIFOLDS, seed=42).rng("lfd").random(3))
    assert not np.array_equal(a, ctx.rng("dirac").random(3))
    assert not np.array_equal(a, SuiteContext(MANIFOLDS, seed=43).rng("lfd").random(3))


def test_random_points_avoid_antipode(S2):
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert np.dot(random_point(S2, rng), S2.origin) > -0.5


def test_random_measure_mass(R2):
    eta = random_measure(R2, np.random.default_rng(0), mass=2.0)
    assert eta.mass == pytest.approx(2.0)
    assert 1 <= len(eta) <= 20


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["bogus"], SuiteContext(MANIFOLDS))


def test_canonical_order():
    out = run_suites(["centered", "lfd"], SuiteContext(MANIFOLDS))
    assert [n for n, _ in out] == ["lfd", "centered"]


def test_tolerance_override_applies_to_random_instances():
    ctx = SuiteContext(MANIFOLDS, tol=1e-30)
    reports = dict(run_suites(["lfd"], ctx))["lfd"]
    assert reports[0].tolerance == 1e-8  # closed form keeps its own
    assert all(r.tolerance == 1e-30 for r in reports[1:])


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_every_suite_passes_with_defaults(name):
    (_, reports), = run_suites([name], SuiteContext(MANIFOLDS, seed=42))
    assert reports
    failed = [str(r) for r in reports if not r.passed]
    assert not failed, "\n".join(failed)
