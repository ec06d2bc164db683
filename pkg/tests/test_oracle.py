import numpy as np
import pytest

from pulse_seek import core, oracle, single_planner
from pulse_seek.errors import EpsilonOutOfRange, KOutOfRange, NOutOfRange
from pulse_seek.multi_target import prob_k_in_aperture

TRIALS = 1_000_000


def test_single_source_exact():
    est = oracle.mc_prob_k(1, 1, 0.3, 1000, seed=3)
    assert est.value == 1.0 and est.stderr == 0.0
    assert est.within(1.0)


@pytest.mark.parametrize("n,k,l,p", [(3, 2, 0.5, 0.5), (5, 1, 0.1, 0.6561)])
def test_mc_prob_k_examples(n, k, l, p):
    est = oracle.mc_prob_k(n, k, l, TRIALS, seed=11)
    assert est.trials == TRIALS and est.algorithm == "philox4x64-10"
    assert est.within(p)


@pytest.mark.parametrize("n,k,l,p", [(2, 2, 0.5, 0.5), (3, 1, 0.2, 0.64)])
def test_mc_region_examples(n, k, l, p):
    assert oracle.mc_region_probability(n, k, l, TRIALS, seed=12).within(p)


def test_mc_region_full_circle_limit():
    est = oracle.mc_region_probability(2, 1, 0.999, 100_000, seed=1)
    assert est.value < 0.005


def test_mc_deterministic_and_seed_sensitive():
    a = oracle.mc_prob_k(4, 2, 0.3, 70_000, seed=5)
    b = oracle.mc_prob_k(4, 2, 0.3, 70_000, seed=5)
    c = oracle.mc_prob_k(4, 2, 0.3, 70_000, seed=6)
    assert a == b
    assert a.value != c.value


def test_histogram_totals():
    h = oracle.mc_count_histogram(5, 0.4, 10_000, seed=2)
    assert h.sum() == 10_000 and h[0] == 0


def test_oracle_rejections():
    with pytest.raises(KOutOfRange):
        oracle.mc_prob_k(3, 4, 0.5, 10, 0)
    with pytest.raises(NOutOfRange):
        oracle.mc_region_probability(1, 1, 0.5, 10, 0)


def test_minimizer_uniform_constant():
    obj, grad, hess = oracle.periodic_objective([0.25] * 4)
    x = oracle.constrained_minimizer(obj, grad, [0.25] * 4, 0.1, 1.0, hess)
    np.testing.assert_allclose(x, 0.1, rtol=1e-9)


def test_minimizer_matches_square_root_rule():
    prior = core.PriorDensity.piecewise([0, 0.5, 1], [1.6, 0.4])
    obj, grad, hess = oracle.periodic_objective(prior.masses)
    x = oracle.constrained_minimizer(obj, grad, prior.widths, 0.3, 1.0, hess)
    np.testing.assert_allclose(x, single_planner.periodic_load_profile(prior, 0.3).phi, atol=1e-6)


def test_minimizer_survival_clamps():
    prior = core.PriorDensity.piecewise([0, 0.5, 1], [1.8, 0.2])
    obj, grad, hess = oracle.survival_objective(prior.masses)
    x = oracle.constrained_minimizer(obj, grad, prior.widths, 0.2, 1.0, hess)
    np.testing.assert_allclose(x, [0.4, 0.0], atol=1e-8)


def test_minimizer_without_hessian():
    obj, grad, _ = oracle.periodic_objective([0.7, 0.3])
    x = oracle.constrained_minimizer(obj, grad, [0.5, 0.5], 0.4, 1.0, max_iter=100_000, tol=1e-12)
    r = np.sqrt([0.7, 0.3])
    np.testing.assert_allclose(x, 0.8 * r / r.sum(), atol=1e-5)


def test_minimizer_infeasible_budget():
    obj, grad, hess = oracle.periodic_objective([1.0])
    with pytest.raises(EpsilonOutOfRange):
        oracle.constrained_minimizer(obj, grad, [1.0], 2.0, 1.0, hess)


def test_projection_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(100):
        w = rng.uniform(0.1, 1, 6)
        caps = rng.uniform(0.2, 2, 6)
        budget = rng.uniform(0, 1) * np.dot(w, caps)
        x = oracle._project(rng.normal(size=6), rng.uniform(0.5, 2, 6), w, budget, caps)
        assert np.dot(w, x) == pytest.approx(budget, rel=1e-10, abs=1e-12)
        assert np.all(x >= 0) and np.all(x <= caps)
