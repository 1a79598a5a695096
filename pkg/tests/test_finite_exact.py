import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptive_mcmc.exceptions import ParameterError
from adaptive_mcmc.finite_exact import (ResolventSpec, build_joint_kernel, exact_D, exact_resolvent,
                                        kernel_power_profile, point_law, poisson_residual,
                                        poisson_residual_table, propagate, resolvent_table,
                                        state_index, truncation_index, winkler_counterexample,
                                        winkler_second_moment_enumeration)
from adaptive_mcmc.kernels import discrete_rwm_matrix, discrete_rwm_row
from adaptive_mcmc.measures import WeightFunction, tv_distance
from adaptive_mcmc.schedules import ConstantSchedule, PowerSchedule, harmonic
from adaptive_mcmc.targets import DiscretePmf

PMF = DiscretePmf.linear(10)
K, M = 10, 5

# Reference values below come from a separate construction of the joint kernel
# with explicit loops over (x, theta, proposal) and, for the resolvent, the
# backward recursion g^(k) = (1-a)(fbar + Pbar(k) g^(k+1)) started far out.
TV_AT_49 = 0.009525604357833985
TV_AT_5000 = 3.7889594751122635e-05
RESOLVENT = {  # a -> (max |a g|, g(1,1), g(10,5)); f = 1{x = 10}, p_n = 1/n, l = 0
    0.5: (0.2859229070119152, -0.18112509719044217, 0.5718458140238304),
    0.2: (0.2573572055119302, -0.661395892484173, 1.2146751259736501),
    0.1: (0.18214363986426235, -1.195195118192583, 1.5570836045076752),
    0.05: (0.11411926527097865, -1.7416232084383965, 1.787689183707931),
    0.02: (0.0544805768831491, -2.275660043783929, 1.9717523945130804),
    0.01: (0.029389949678484958, -2.499766200028439, 2.054800698004134),
}
HOMOGENEOUS_G = (-1.4788947780313317, 1.5411358902316212)  # p = 0, a = 0.1: g(1,1), g(10,3)
F_TOP = np.eye(K)[-1]


def test_state_index_is_x_major():
    assert state_index(1, 1, M) == 0 and state_index(2, 1, M) == M and state_index(1, M, M) == M - 1


@given(st.floats(0, 1))
def test_joint_kernel_stochastic_and_marginal_consistent(p):
    J = build_joint_kernel(PMF, M, p)
    assert np.abs(J.matrix.sum(axis=1) - 1.0).max() <= 1e-14
    marg = J.x_marginal()
    for x in range(1, K + 1):
        for th in range(1, M + 1):
            row = discrete_rwm_row(PMF, th, x).weights
            assert np.abs(marg[state_index(x, th, M)] - row).max() <= 1e-14


def test_joint_kernel_without_adaptation_is_block_diagonal():
    J = build_joint_kernel(PMF, M, 0.0).matrix.reshape(K, M, K, M)
    for t in range(M):
        for u in range(M):
            block = J[:, t, :, u]
            if t == u:
                assert np.array_equal(block, discrete_rwm_matrix(PMF, t + 1))
            else:
                assert not block.any()


def test_joint_kernel_clipping_on_hold():
    J = build_joint_kernel(PMF, M, 1.0).matrix
    i = state_index(10, 1, M)  # holding at the top with theta = 1
    hold = discrete_rwm_row(PMF, 1, 10).weights[-1]
    assert J[i, state_index(10, 1, M)] == hold
    assert J[i, state_index(9, 2, M)] == discrete_rwm_row(PMF, 1, 10).weights[8]


def test_joint_kernel_rejects_bad_p():
    with pytest.raises(ParameterError):
        build_joint_kernel(PMF, M, 1.5)


def test_one_step_marginal_is_kernel_row():
    prop = propagate(PMF, M, point_law(3, 2, K, M), harmonic(), 1)
    assert np.array_equal(prop.marginals[1], discrete_rwm_row(PMF, 2, 3).weights)


def test_propagation_without_adaptation_is_kernel_power():
    th = 3
    prop = propagate(PMF, M, point_law(1, th, K, M), ConstantSchedule(0.0), 300)
    P = discrete_rwm_matrix(PMF, th)
    law = np.eye(K)[0]
    for n in range(301):
        assert np.abs(prop.marginals[n] - law).max() <= 1e-13
        law = law @ P
    prof = kernel_power_profile(PMF, th, n_max=300)
    # the sup over starts bounds the start-at-1 distance at every n
    assert np.all(prop.tv_to_pi <= prof.sup_dist + 1e-13)


def test_adaptive_marginal_convergence_fixture():
    prop = propagate(PMF, M, point_law(1, 1, K, M), harmonic(), 5000)
    assert prop.tv_to_pi[49] == pytest.approx(TV_AT_49, abs=1e-13)
    assert prop.tv_to_pi[5000] == pytest.approx(TV_AT_5000, abs=1e-13)
    assert int(np.argmax(prop.tv_to_pi <= 0.01)) == 49
    assert prop.tv_to_pi.min() <= 0.01


def test_propagate_validation():
    with pytest.raises(ParameterError):
        propagate(PMF, M, np.ones(3), harmonic(), 10)
    with pytest.raises(ParameterError):
        propagate(PMF, M, point_law(1, 1, K, M), harmonic(), 0)


def test_exact_D_enumeration_example():
    # K = 4, uniform: at x = 1 width 1 holds 1/2 and width 2 holds 3/4, giving the supremum
    assert exact_D(DiscretePmf.uniform(4), 1, 2) == pytest.approx(1.0, abs=1e-15)


@given(st.integers(1, 5), st.integers(1, 5))
def test_exact_D_properties(a, b):
    d = exact_D(PMF, a, b)
    assert d == exact_D(PMF, b, a)
    assert 0.0 <= d <= 2.0
    if a == b:
        assert d == 0.0


def test_truncation_index():
    J = truncation_index(0.1, 1.0, 1e-12)
    assert 0.9 ** (J + 1) / 0.1 <= 1e-12 < 0.9 ** J / 0.1
    assert truncation_index(0.5, 0.0, 1e-12) == 0


@pytest.mark.parametrize("a", sorted(RESOLVENT))
def test_resolvent_against_backward_recursion(a):
    g = resolvent_table(ResolventSpec(a, F_TOP), PMF, M, harmonic())
    top, g11, g105 = RESOLVENT[a]
    assert np.abs(a * g).max() == pytest.approx(top, abs=1e-12)
    assert g[0, 0] == pytest.approx(g11, abs=1e-12)
    assert exact_resolvent(ResolventSpec(a, F_TOP), PMF, M, (10, 5), harmonic()) == pytest.approx(g105, abs=1e-12)


def test_homogeneous_resolvent_closed_form():
    g = resolvent_table(ResolventSpec(0.1, F_TOP), PMF, M, ConstantSchedule(0.0))
    assert g[0, 0] == pytest.approx(HOMOGENEOUS_G[0], abs=1e-11)
    assert g[9, 2] == pytest.approx(HOMOGENEOUS_G[1], abs=1e-11)


def test_constant_function_has_zero_resolvent():
    spec = ResolventSpec(0.3, np.full(K, 2.5))
    assert not resolvent_table(spec, PMF, M, harmonic()).any()
    assert not poisson_residual_table(spec, PMF, M, harmonic()).any()


def test_resolvent_near_one_is_single_term():
    a = 0.999
    spec = ResolventSpec(a, F_TOP)
    fbar_max = np.abs(F_TOP - PMF.weights[-1]).max()
    g = resolvent_table(spec, PMF, M, harmonic())
    assert np.abs(g).max() <= (1 - a) * fbar_max / a


def test_resolvent_spec_validation():
    with pytest.raises(ParameterError):
        ResolventSpec(1.0, F_TOP)
    with pytest.raises(ParameterError):
        ResolventSpec(0.5, F_TOP, l=-1)


@pytest.mark.parametrize("schedule", [harmonic(), ConstantSchedule(0.0), ConstantSchedule(0.3)])
@pytest.mark.parametrize("a", [0.5, 0.1, 0.01])
def test_poisson_identity(a, schedule):
    tol = 1e-12
    res = poisson_residual_table(ResolventSpec(a, F_TOP, tol=tol), PMF, M, schedule)
    assert res.max() <= 10 * tol / (1 - a)


def test_poisson_identity_shifted_start():
    spec = ResolventSpec(0.1, F_TOP, l=7)
    assert poisson_residual(spec, PMF, M, (4, 2), harmonic()) <= 1e-8


def test_resolvent_limit_shrinks():
    tops = [RESOLVENT[a][0] for a in (0.2, 0.1, 0.05, 0.02)]
    assert all(x >= y for x, y in zip(tops, tops[1:]))


def test_power_profile_reductions():
    prof = kernel_power_profile(PMF, 2, n_max=400)
    P = discrete_rwm_matrix(PMF, 2)
    assert prof.sup_dist[0] == pytest.approx(max(tv_distance(np.eye(K)[x], PMF.weights).l1 for x in range(K)), abs=1e-15)
    assert np.array_equal(prof.rate_ratio, prof.sup_dist)
    assert np.all(np.diff(prof.sup_dist) <= 1e-15)
    Pn = np.linalg.matrix_power(P, 17)
    assert prof.sup_dist[17] == pytest.approx(np.abs(Pn - PMF.weights).sum(axis=1).max(), abs=1e-14)


def test_power_profile_weighted():
    V = WeightFunction(PMF.weights.max() / PMF.weights)
    prof = kernel_power_profile(PMF, 3, V=V, beta=0.5, kappa=1.5, n_max=200, alpha=0.5)
    v = V.values
    for x in range(K):
        assert prof.sup_dist[0] >= np.dot(v**0.5, np.abs(np.eye(K)[x] - PMF.weights)) - 1e-14
    assert prof.constant == prof.rate_ratio.max()


def test_power_profile_reaches_precision():
    for K_, th in ((10, 1), (20, 4)):
        prof = kernel_power_profile(DiscretePmf.linear(K_), th, n_max=10**4)
        assert prof.sup_dist.min() <= 1e-6


def _winkler_schedule(n):
    return 1.0 / (np.asarray(n, dtype=float) + 2.0) ** 2


def test_winkler_marginal_product_formula():
    N = 10**4
    r = winkler_counterexample(_winkler_schedule, N, f=(0.0, 1.0))
    th = _winkler_schedule(np.arange(N))
    # law(X_n)(1) - 1/2 = -(1/2) prod (1 - 2 theta_k)
    assert r.tv_to_pi[N] == pytest.approx(np.prod(1 - 2 * th), rel=1e-12)
    assert np.isnan(r.second_moment[0])


def test_winkler_constant_half_is_iid():
    r = winkler_counterexample(ConstantSchedule(0.5), 400)
    n = np.arange(1, 401)
    assert np.allclose(r.second_moment[1:], 0.25 / n, rtol=1e-12)


@pytest.mark.parametrize("N", [1, 5, 10, 12])
@pytest.mark.parametrize("schedule", [_winkler_schedule, PowerSchedule(offset=2.0), ConstantSchedule(0.3)])
def test_winkler_recursion_matches_path_enumeration(N, schedule):
    r = winkler_counterexample(schedule, N)
    brute = winkler_second_moment_enumeration(schedule, N)
    assert np.abs(r.second_moment[1:] - brute[1:]).max() <= 1e-12


def test_winkler_rejects_degenerate_theta():
    with pytest.raises(ParameterError):
        winkler_counterexample(ConstantSchedule(1.0), 10)
