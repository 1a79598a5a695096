import math

import numpy as np
import pytest

from adaptive_mcmc.adaptation import ThetaSpace
from adaptive_mcmc.chain import Trajectory, run_am, run_toy, spawn_seeds
from adaptive_mcmc.diagnostics import (DriftSpec, ReturnTimeSpec, diminishing_adaptation_report,
                                       drift_check, drift_increment, dyadic_windows, lln_report,
                                       return_time_moments)
from adaptive_mcmc.exceptions import InsufficientDataError, NumericalError, ParameterError
from adaptive_mcmc.kernels import RwmParameter
from adaptive_mcmc.schedules import harmonic
from adaptive_mcmc.targets import DiscretePmf, SmoothedWeibullTarget

WEIBULL = SmoothedWeibullTarget(0.5, 1.0)
# P V - V for s = 0.05 from a 2e6-node trapezoid rule on z in [-9 sd, 9 sd]
DRIFT_ORACLE = {
    (50.0, 0.01): -2.7638137201080326e-06,
    (10.0, 1.0): -0.001375457343868014,
    (20.0, 4.0): -0.00233769380815696,
}


def _theta(var):
    return RwmParameter(np.zeros(1), np.array([[var]]), 0.0)


def test_drift_spec_validation():
    with pytest.raises(ParameterError):
        DriftSpec(alpha=1.0)
    with pytest.raises(ParameterError):
        DriftSpec(s=-0.1)
    with pytest.raises(ParameterError):
        ReturnTimeSpec(eta=-1.0)


@pytest.mark.parametrize("x, var", sorted(DRIFT_ORACLE))
def test_drift_increment_against_trapezoid(x, var):
    inc, err, tail = drift_increment(WEIBULL, 0.05, x, var)
    assert inc == pytest.approx(DRIFT_ORACLE[(x, var)], rel=1e-8, abs=1e-14)
    assert err + tail < 1e-8


def test_deep_tail_contraction():
    inc, _, _ = drift_increment(WEIBULL, 0.05, 50.0, 0.01)
    assert inc < 0.0


def test_flat_drift_function_cannot_contract():
    rep = drift_check(WEIBULL, DriftSpec(s=0.0, c=0.01), [_theta(1.0)], [50.0])
    p = rep.points[0]
    assert p.V == 2.0 and p.PV == pytest.approx(2.0, abs=1e-14)
    assert p.margin == pytest.approx(-0.01 * 2.0 * 50.0 ** (2 * (0.5 - 1)), rel=1e-10)
    assert not rep.passed


def test_points_inside_C_are_skipped():
    rep = drift_check(WEIBULL, DriftSpec(C_bound=5.0, c=1e-4), [_theta(1.0)], [3.0, -4.0, 10.0])
    assert rep.skipped == [(1.0, 3.0), (1.0, -4.0)]
    assert [p.x for p in rep.points] == [10.0]
    with pytest.raises(ParameterError):
        drift_check(WEIBULL, DriftSpec(C_bound=5.0), [_theta(1.0)], [1.0])


def test_quadrature_shortfall_names_the_point():
    with pytest.raises(NumericalError, match="x=20.0"):
        drift_check(WEIBULL, DriftSpec(), [_theta(1.0)], [20.0], quad_tol=1e-30)


def test_c_star_is_largest_passing_constant():
    grid = [-50.0, -20.0, -10.0, 10.0, 20.0, 50.0]
    thetas = [_theta(v) for v in (0.25, 1.0, 4.0)]
    rep = drift_check(WEIBULL, DriftSpec(c=1e-4), thetas, grid)
    assert rep.passed and rep.c_star > 0
    assert drift_check(WEIBULL, DriftSpec(c=rep.c_star), thetas, grid).passed
    assert not drift_check(WEIBULL, DriftSpec(c=1.01 * rep.c_star), thetas, grid).passed


def test_sign_flips_are_flagged():
    # c between the per-point limits of x = 10 and x = 20 at variance 0.25
    rep = drift_check(WEIBULL, DriftSpec(c=0.0015), [_theta(0.25)], [10.0, 20.0, 50.0])
    assert (0.25, 10.0, 20.0) in rep.sign_flips
    margins = np.array([p.margin for p in rep.points])
    assert margins[0] > 0 > margins[1]


def test_lln_constant_function():
    trs = [run_toy(DiscretePmf.linear(10), 5, 1, 1, harmonic(), 1000, s) for s in (1, 2)]
    rep = lln_report(trs, lambda x: np.ones(len(x)), 1.0)
    assert not rep.errors.any() and rep.pooled_error == 0.0
    with pytest.raises(InsufficientDataError):
        lln_report(trs[:1], lambda x: np.ones(len(x)), 1.0)
    with pytest.raises(InsufficientDataError):
        lln_report(trs, lambda x: np.ones(len(x)), 1.0, n=5000)


def test_lln_pooled_error_shrinks_with_length():
    pmf = DiscretePmf.linear(10)
    trs = [run_toy(pmf, 5, 1, 1, harmonic(), 10**6, s) for s in spawn_seeds(0, 10)]
    f = lambda x: (x == 10).astype(float)
    pooled = [lln_report(trs, f, pmf.prob(10), n=10**k).pooled_error for k in (3, 4, 5, 6)]
    assert sum(b > a for a, b in zip(pooled, pooled[1:])) <= 1
    final = lln_report(trs, f, pmf.prob(10))
    assert final.n == 10**6 and final.errors.max() <= 0.02
    assert final.half_width == pytest.approx(3 * final.standard_error)


def test_dyadic_windows():
    assert dyadic_windows(1000, 8000) == [(1000, 2000), (2000, 4000), (4000, 8000)]
    assert dyadic_windows(1000, 7000) == [(1000, 2000), (2000, 4000), (4000, 7001)]
    assert dyadic_windows(1000, 4500) == [(1000, 2000), (2000, 4000)]


def test_frozen_adaptation_has_zero_metric():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 10**4, seed=1, adapt=False)
    rep = diminishing_adaptation_report(tr)
    assert not rep.delta.any() and rep.passed and rep.growth == 1.0


def test_lattice_nonzero_delta_frequency():
    tr = run_toy(DiscretePmf.linear(10), 5, 1, 1, harmonic(), 2 * 10**5, 6)
    rep = diminishing_adaptation_report(tr)
    assert rep.delta.max() <= 1.0
    for (lo, hi), freq in zip(rep.windows, rep.nonzero_freq):
        p = harmonic()(np.arange(lo, hi) + 1.0)  # step n adapts with p_{n+1}
        bound = 2 * p.mean()
        assert freq <= bound + 3 * math.sqrt(bound / (hi - lo))


def test_am_adaptation_medians_flat():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 2 * 10**5, seed=3)
    rep = diminishing_adaptation_report(tr)
    assert rep.passed and rep.growth <= 2.0
    with pytest.raises(InsufficientDataError):
        diminishing_adaptation_report(tr, start=2 * 10**5)


def test_return_times_confined_chain():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 1000, seed=0)
    rep = return_time_moments(tr, ReturnTimeSpec(radius=1e12, eta=0.1))
    assert np.all(rep.taus == 1) and rep.cycles == 1000
    assert rep.mean_rate == pytest.approx(2 ** 1.1, rel=1e-15)


def test_return_times_eta_zero_is_mean_gap_plus_one():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 10**4, seed=2)
    rep = return_time_moments(tr, ReturnTimeSpec(radius=2.0, eta=0.0))
    assert rep.mean_rate == pytest.approx(rep.taus.mean() + 1.0, rel=1e-14)


def test_return_times_need_two_visits():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [100.0], RwmParameter.identity(1, c=-8.0), 100, seed=0)
    with pytest.raises(InsufficientDataError):
        return_time_moments(tr, ReturnTimeSpec(radius=5.0))


def test_return_times_split_halves_agree():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 10**6, seed=4)
    spec = ReturnTimeSpec(radius=5.0, eta=0.1)
    a = return_time_moments(tr, spec, 0, 5 * 10**5).mean_rate
    b = return_time_moments(tr, spec, 5 * 10**5).mean_rate
    assert abs(a - b) <= 0.25 * min(a, b)


def test_return_times_unaffected_by_unit_thinning():
    tr = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 10**4, seed=5)
    rebuilt = Trajectory("am", tr.seed, tr.states.copy(), tr.accepted.copy(), tr.metric.copy(), thin=1)
    spec = ReturnTimeSpec(radius=3.0)
    assert return_time_moments(tr, spec).mean_rate == return_time_moments(rebuilt, spec).mean_rate
    thinned = run_am(WEIBULL, ThetaSpace.box(1), [0.0], RwmParameter.identity(1), 10**4, seed=5, thin=2)
    assert np.all(return_time_moments(thinned, spec).taus % 2 == 0)
