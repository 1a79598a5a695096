import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from adaptive_mcmc.adaptation import ThetaSpace
from adaptive_mcmc.chain import run_am
from adaptive_mcmc.exceptions import DimensionError, ParameterError
from adaptive_mcmc.kernels import (RwmParameter, discrete_rwm_matrix, discrete_rwm_row, rwm_chain,
                                   rwm_step)
from adaptive_mcmc.targets import CallableTarget, DiscretePmf, GaussianTarget, SmoothedWeibullTarget

# stationary acceptance rate of RWM with a unit-variance Gaussian proposal on N(0, 1)
GAUSS_ACCEPT = 2.0 / math.pi * math.atan(2.0)


def test_rwm_parameter_checks():
    with pytest.raises(ParameterError):
        RwmParameter(np.zeros(2), np.array([[1.0, 0.2], [0.3, 1.0]]), 0.0)
    with pytest.raises(DimensionError):
        RwmParameter(np.zeros(3), np.eye(2), 0.0)
    th = RwmParameter.identity(2, c=math.log(4.0))
    assert np.allclose(th.proposal_cov, 4 * np.eye(2))
    assert np.allclose(th.proposal_chol(), 2 * np.eye(2))
    with pytest.raises(ParameterError):
        RwmParameter(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), 0.0).proposal_chol()


def test_uphill_move_always_accepted(rng):
    t = GaussianTarget.standard(1)
    th = RwmParameter.identity(1)
    for _ in range(200):
        rec = rwm_step(t, th, [3.0], rng)
        if t.log_density(rec.proposal) >= t.log_density([3.0]):
            assert rec.alpha == 1.0 and rec.accepted


def test_step_draw_order(rng):
    # p normals then one uniform
    th = RwmParameter(np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]]), 0.3)
    x = np.array([0.4, -1.0])
    rec = rwm_step(GaussianTarget.standard(2), th, x, np.random.Generator(np.random.PCG64(5)))
    g = np.random.Generator(np.random.PCG64(5))
    y = x + th.proposal_chol() @ g.standard_normal(2)
    assert np.allclose(rec.proposal, y, atol=1e-14)
    assert rec.accepted == (g.random() < rec.alpha)


def test_nonfinite_proposal_is_rejected(rng, caplog):
    t = CallableTarget(lambda x: 0.0 if x[0] < 0.5 else math.nan, 1)
    th = RwmParameter.identity(1, c=math.log(100.0))
    seen = False
    for _ in range(50):
        rec = rwm_step(t, th, [0.0], rng)
        if rec.proposal[0] >= 0.5:
            seen = True
            assert rec.alpha == 0.0 and not rec.accepted and rec.new_state[0] == 0.0
    assert seen


def test_long_run_acceptance_matches_analytic_rate():
    tr = run_am(GaussianTarget.standard(1), ThetaSpace.box(1), [0.0], RwmParameter.identity(1),
                10**6, seed=11, adapt=False)
    acc = tr.accepted.mean()
    assert 0.0 < acc < 1.0
    assert acc == pytest.approx(GAUSS_ACCEPT, abs=0.005)


def test_tiny_steps_almost_always_accepted(rng):
    th = RwmParameter.identity(1, c=math.log(1e-8))
    _, acc = rwm_chain(SmoothedWeibullTarget(), th, [0.3], 10**4, rng)
    assert acc.mean() >= 0.99


def _thinned_ks(target, var, cdf, seed, n=10**6, thin=100):
    th = RwmParameter(np.zeros(1), np.array([[var]]), 0.0)
    tr = run_am(target, ThetaSpace.box(1), [0.0], th, n, seed=seed, adapt=False)
    draws = tr.states[thin::thin, 0]
    qs = np.quantile(draws, np.linspace(0.025, 0.975, 20))
    emp = np.array([(draws <= q).mean() for q in qs])
    ks = np.abs(emp - np.array([cdf(q) for q in qs])).max()
    return ks, 1.95 / math.sqrt(draws.size)  # 0.001 critical value


def test_fixed_theta_leaves_gaussian_invariant():
    ks, crit = _thinned_ks(GaussianTarget.standard(1), 5.0, stats.norm.cdf, seed=3)
    assert ks < crit


def test_fixed_theta_leaves_weibull_invariant():
    t = SmoothedWeibullTarget(0.5, 1.0)
    dens = lambda x: math.exp(t.log_density([x]))
    z = 2 * integrate.quad(dens, 0, np.inf, limit=200)[0]

    def cdf(q):
        if q <= 0:
            return integrate.quad(dens, -np.inf, q, limit=200)[0] / z
        return 0.5 + integrate.quad(dens, 0, q, limit=200)[0] / z

    ks, crit = _thinned_ks(t, 50.0, cdf, seed=4, thin=200)
    assert ks < crit


def test_row_boundary_example():
    row = discrete_rwm_row(DiscretePmf.uniform(4), 1, 1)
    assert np.allclose(row.weights, [0.5, 0.5, 0.0, 0.0])


def test_row_uniform_interior_never_holds():
    row = discrete_rwm_row(DiscretePmf.uniform(9), 3, 5)
    assert row.weights[4] == 0.0
    assert np.allclose(row.weights, [0, 1 / 6, 1 / 6, 1 / 6, 0, 1 / 6, 1 / 6, 1 / 6, 0])


def test_row_index_errors():
    pmf = DiscretePmf.linear(5)
    with pytest.raises(IndexError):
        discrete_rwm_row(pmf, 1, 0)
    with pytest.raises(IndexError):
        discrete_rwm_row(pmf, 0, 2)


pmfs = st.integers(4, 12).flatmap(
    lambda K: st.lists(st.floats(0.01, 10.0), min_size=K, max_size=K)).map(
    lambda w: DiscretePmf(np.array(w) / sum(w)))


@given(pmfs, st.integers(1, 6))
def test_rows_stochastic_and_reversible(pmf, theta):
    P = discrete_rwm_matrix(pmf, theta)
    assert np.abs(P.sum(axis=1) - 1.0).max() <= 1e-14
    assert P.min() >= 0.0
    flow = pmf.weights[:, None] * P
    assert np.abs(flow - flow.T).max() <= 1e-13
    assert np.abs(pmf.weights @ P - pmf.weights).max() <= 1e-13


@pytest.mark.parametrize("K, theta", [(10, 1), (10, 5), (20, 3), (20, 20)])
def test_uniform_ergodicity_of_each_kernel(K, theta):
    pmf = DiscretePmf.linear(K)
    P = discrete_rwm_matrix(pmf, theta)
    Pn = np.eye(K)
    prev = np.inf
    for n in range(1, 10**4 + 1):
        Pn = Pn @ P
        d = np.abs(Pn - pmf.weights).sum(axis=1).max()
        assert d <= prev + 1e-15
        prev = d
        if d < 1e-6:
            break
    assert prev < 1e-6
