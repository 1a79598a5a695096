"""Drivers for the adaptive chain ``Z_n = (X_n, theta_n)``.

Each iteration first moves ``X_n -> X_{n+1}`` under the current kernel
``P_{theta_n}`` and then adapts ``theta_n -> theta_{n+1}`` from
``(X_n, theta_n, X_{n+1})`` and the acceptance probability.

Random numbers: every chain owns one ``numpy.random.Generator`` on a PCG64
bit generator seeded with a 64-bit integer. Replicates get independent
seeds from :func:`spawn_seeds` (``SeedSequence.spawn``). The compiled loops
draw from the generator in the same order as :func:`kernels.rwm_step` and
:func:`adaptation.toy_update`: per AM step ``p`` normals then one uniform;
per lattice step one uniform for the move then one for the width coin.
"""
from __future__ import annotations

import math
import types
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .adaptation import ThetaSpace, _am_candidate, _in_theta, _metric
from .exceptions import ConfigError, ParameterError
from .kernels import RwmParameter, _accept_prob, _propose, discrete_rwm_matrix
from .targets import KIND_PYTHON, DiscretePmf, TargetDensity, _log_density_kernel


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit replicate seeds derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


@dataclass
class Trajectory:
    """Recorded path of an adaptive chain.

    ``states[i]`` is ``X_{i * thin}``. ``accepted[n]`` and ``metric[n]``
    describe the transition from step ``n`` to ``n + 1``: whether the move
    was accepted (AM) or the state changed (lattice), and the adaptation
    metric between ``theta_{n+1}`` and ``theta_n``.
    """

    algorithm: str
    seed: int
    states: np.ndarray
    accepted: np.ndarray
    metric: np.ndarray
    thin: int = 1
    alpha: np.ndarray | None = None
    thetas: np.ndarray | None = None
    snapshot_steps: np.ndarray | None = None
    snapshot_mu: np.ndarray | None = None
    snapshot_Sigma: np.ndarray | None = None
    snapshot_c: np.ndarray | None = None
    final_theta: object = None
    n_nonfinite: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.accepted.shape[0]
        if self.metric.shape[0] != n:
            raise ParameterError("metric and accepted lengths differ")
        if self.states.shape[0] != n // self.thin + 1:
            raise ParameterError("states length inconsistent with n_steps and thin")

    @property
    def n_steps(self) -> int:
        return self.accepted.shape[0]

    def theta_at(self, i: int) -> RwmParameter:
        """Snapshot ``i`` of an AM trajectory."""
        return RwmParameter(self.snapshot_mu[i], self.snapshot_Sigma[i], self.snapshot_c[i])


# --------------------------------------------------------------------------
# adaptive random walk Metropolis


def _am_loop_src(kind, params, rng, x0, mu0, S0, c0, n_steps, adapt, alpha_bar,
                 mu_lo, mu_hi, floor, cap, kl, ku, thin, snap_every):
    p = x0.shape[0]
    x = x0.copy()
    mu = mu0.copy()
    S = S0.copy()
    c = c0
    n_rec = n_steps // thin + 1
    states = np.empty((n_rec, p))
    states[0] = x
    accepted = np.zeros(n_steps, dtype=np.bool_)
    alphas = np.empty(n_steps)
    metric = np.zeros(n_steps)
    n_snap = n_steps // snap_every + 1
    snap_steps = np.empty(n_snap, dtype=np.int64)
    snap_mu = np.empty((n_snap, p))
    snap_S = np.empty((n_snap, p, p))
    snap_c = np.empty(n_snap)
    snap_steps[0] = 0
    snap_mu[0] = mu
    snap_S[0] = S
    snap_c[0] = c
    n_bad = 0
    lx = _log_density_kernel(kind, x, params)
    for n in range(n_steps):
        ec = math.exp(c)
        if p == 1:
            L = np.empty((1, 1))
            L[0, 0] = math.sqrt(ec * S[0, 0])
        else:
            L = np.linalg.cholesky(ec * S)
        xi = rng.standard_normal(p)
        y = _propose(x, L, xi)
        ly = _log_density_kernel(kind, y, params)
        if not math.isfinite(ly):
            n_bad += 1
            ly = -math.inf
        a = _accept_prob(ly - lx)
        if rng.random() < a:
            x = y
            lx = ly
            accepted[n] = True
        alphas[n] = a
        if (n + 1) % thin == 0:
            states[(n + 1) // thin] = x
        if adapt:
            new_mu, new_S, new_c = _am_candidate(mu, S, c, float(n), x, a, alpha_bar)
            if _in_theta(new_mu, new_S, new_c, mu_lo, mu_hi, floor, cap, kl, ku):
                metric[n] = _metric(new_S, new_c, S, c)
                mu = new_mu
                S = new_S
                c = new_c
        if (n + 1) % snap_every == 0:
            k = (n + 1) // snap_every
            snap_steps[k] = n + 1
            snap_mu[k] = mu
            snap_S[k] = S
            snap_c[k] = c
    return states, accepted, alphas, metric, snap_steps, snap_mu, snap_S, snap_c, mu, S, c, n_bad


_am_loop = numba.njit(cache=True, nogil=True)(_am_loop_src)


def _python_loop(src: Callable, log_density: Callable) -> Callable:
    """Copy of ``src`` whose log-density kernel is a Python callable."""
    g = dict(src.__globals__)
    g["_log_density_kernel"] = lambda kind, x, params: log_density(x)
    return types.FunctionType(src.__code__, g, src.__name__)


def run_am(target: TargetDensity, space: ThetaSpace, x0, theta0: RwmParameter, n_steps: int,
           seed: int, adapt: bool = True, thin: int = 1, snapshot_every: int = 100) -> Trajectory:
    """Adaptive random walk Metropolis with covariance and scale adaptation.

    With ``adapt=False`` the parameter stays at ``theta0`` and the result is a
    homogeneous Metropolis chain, identical to :func:`kernels.rwm_chain` run
    with ``make_rng(seed)``.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if thin < 1 or snapshot_every < 1:
        raise ConfigError("thin and snapshot_every must be >= 1")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != target.dim or theta0.dim != target.dim:
        raise ConfigError("initial state, parameter and target dimensions differ")
    if not space.contains(theta0):
        raise ConfigError("initial parameter lies outside the parameter space")
    if not math.isfinite(target.log_density(x0)):
        raise ConfigError("log-density is not finite at the initial state")

    args = (np.ascontiguousarray(theta0.mu), np.ascontiguousarray(theta0.Sigma), theta0.c,
            int(n_steps), bool(adapt), space.target_accept, space.mu_low, space.mu_high,
            space.floor, space.cap, space.kappa_l, space.kappa_u, int(thin), int(snapshot_every))
    rng = make_rng(seed)
    if target.jit_kind == KIND_PYTHON:
        loop = _python_loop(_am_loop_src, target.log_density)
        out = loop(KIND_PYTHON, target.jit_params, rng, x0, *args)
    else:
        out = _am_loop(target.jit_kind, target.jit_params, rng, x0, *args)
    states, accepted, alphas, metric, sst, smu, sS, sc, mu, S, c, n_bad = out
    return Trajectory(
        algorithm="am" if adapt else "rwm", seed=int(seed), states=states, accepted=accepted,
        metric=metric, thin=thin, alpha=alphas, snapshot_steps=sst, snapshot_mu=smu,
        snapshot_Sigma=sS, snapshot_c=sc, final_theta=RwmParameter(mu, S, c), n_nonfinite=int(n_bad),
    )


# --------------------------------------------------------------------------
# lattice toy chain


def _toy_loop_src(cum, rng, x0, th0, p_next, M, thin):
    n_steps = p_next.shape[0]
    states = np.empty(n_steps // thin + 1, dtype=np.int64)
    thetas = np.empty(n_steps + 1, dtype=np.int64)
    moved = np.zeros(n_steps, dtype=np.bool_)
    x = x0
    th = th0
    states[0] = x
    thetas[0] = th
    for n in range(n_steps):
        u = rng.random()
        x_new = np.searchsorted(cum[th - 1, x - 1], u, side="right") + 1
        mv = x_new != x
        moved[n] = mv
        x = x_new
        if rng.random() < p_next[n]:
            th = min(M, th + 1) if mv else max(1, th - 1)
        thetas[n + 1] = th
        if (n + 1) % thin == 0:
            states[(n + 1) // thin] = x
    return states, thetas, moved


_toy_loop = numba.njit(cache=True, nogil=True)(_toy_loop_src)


def toy_cumulative_rows(pmf: DiscretePmf, M: int) -> np.ndarray:
    """``(M, K, K)`` cumulative rows of ``P_1, ..., P_M`` with exact 1.0 ends."""
    cum = np.cumsum(np.array([discrete_rwm_matrix(pmf, th) for th in range(1, M + 1)]), axis=2)
    cum[:, :, -1] = 1.0
    return cum


def run_toy(pmf: DiscretePmf, M: int, x0: int, theta0: int, p_schedule: Callable, n_steps: int,
            seed: int, thin: int = 1) -> Trajectory:
    """Lattice chain with the +/-1 width adaptation; ``p_schedule(n)`` is ``p_n``."""
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if not 1 <= x0 <= pmf.K:
        raise ConfigError(f"initial state {x0} outside 1..{pmf.K}")
    if not 1 <= theta0 <= M:
        raise ConfigError(f"initial width {theta0} outside 1..{M}")
    p_next = np.asarray(p_schedule(np.arange(1, n_steps + 1)), dtype=float)
    if np.any((p_next < 0) | (p_next > 1)):
        raise ConfigError("adaptation probabilities must lie in [0, 1]")
    states, thetas, moved = _toy_loop(toy_cumulative_rows(pmf, M), make_rng(seed), int(x0),
                                      int(theta0), p_next, int(M), int(thin))
    metric = np.abs(np.diff(thetas)).astype(float)
    return Trajectory(algorithm="toy", seed=int(seed), states=states, accepted=moved,
                      metric=metric, thin=thin, thetas=thetas, final_theta=int(thetas[-1]))


# --------------------------------------------------------------------------
# configs and running averages


@dataclass
class AMConfig:
    target: TargetDensity
    space: ThetaSpace
    x0: np.ndarray
    theta0: RwmParameter
    n_steps: int
    seed: int
    adapt: bool = True
    thin: int = 1
    snapshot_every: int = 100


@dataclass
class ToyConfig:
    pmf: DiscretePmf
    M: int
    x0: int
    theta0: int
    p_schedule: Callable
    n_steps: int
    seed: int
    thin: int = 1


def run_adaptive(config: AMConfig | ToyConfig) -> Trajectory:
    if isinstance(config, AMConfig):
        return run_am(config.target, config.space, config.x0, config.theta0, config.n_steps,
                      config.seed, adapt=config.adapt, thin=config.thin,
                      snapshot_every=config.snapshot_every)
    if isinstance(config, ToyConfig):
        return run_toy(config.pmf, config.M, config.x0, config.theta0, config.p_schedule,
                       config.n_steps, config.seed, thin=config.thin)
    raise ConfigError(f"unsupported config type {type(config).__name__}")


@numba.njit(cache=True)
def _kahan_running_mean(v):
    out = np.empty(v.shape[0])
    s = 0.0
    comp = 0.0
    for i in range(v.shape[0]):
        y = v[i] - comp
        t = s + y
        comp = (t - s) - y
        s = t
        out[i] = s / (i + 1)
    return out


def evaluate(f: Callable, states: np.ndarray) -> np.ndarray:
    """Apply ``f`` to each recorded state, vectorised when ``f`` allows it."""
    try:
        vals = np.asarray(f(states), dtype=float)
        if vals.shape in ((states.shape[0],), (states.shape[0], 1)):
            return vals.reshape(-1)
    except Exception:
        pass
    return np.array([np.asarray(f(s), dtype=float).item() for s in states])


def running_average(traj: Trajectory, f: Callable) -> np.ndarray:
    """Entry ``i`` is the mean of ``f`` over recorded states ``1..i+1``.

    For ``thin == 1`` this is ``n^{-1} sum_{k=1}^n f(X_k)`` at ``n = i + 1``.
    Summation is compensated.
    """
    return _kahan_running_mean(evaluate(f, traj.states[1:]))
