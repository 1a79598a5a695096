"""Exact linear algebra for finite adaptive chains.

Covers the lattice toy chain on pairs ``(x, theta)`` in
``{1..K} x {1..M}`` and the two-state chain with vanishing switching
probabilities. Joint states are flattened x-major:
``index(x, theta) = (x - 1) * M + (theta - 1)``.

Time-indexing: the kernel ``Pbar(n)`` moves ``Z_n`` to ``Z_{n+1}`` and uses
the adaptation probability ``p_{n+1}``; the shifted chain started at time
``l`` uses ``Pbar(l), Pbar(l + 1), ...``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ParameterError
from .kernels import discrete_rwm_matrix
from .measures import WeightFunction, tv_distance
from .targets import DiscretePmf


def state_index(x: int, theta: int, M: int) -> int:
    return (x - 1) * M + (theta - 1)


@dataclass(frozen=True, eq=False)
class FiniteJointKernel:
    """Transition matrix of ``(X_n, theta_n) -> (X_{n+1}, theta_{n+1})``."""

    matrix: np.ndarray
    K: int
    M: int
    p_next: float

    def x_marginal(self) -> np.ndarray:
        """``(K*M, K)`` matrix of ``P_theta(x, x')`` obtained by summing out ``theta'``."""
        return self.matrix.reshape(self.K * self.M, self.K, self.M).sum(axis=2)


def _rwm_stack(pmf: DiscretePmf, M: int) -> np.ndarray:
    return np.array([discrete_rwm_matrix(pmf, th) for th in range(1, M + 1)])


def _joint_parts(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kernels with the width frozen (``p = 0``) and always adapted (``p = 1``)."""
    M, K, _ = P.shape
    stay = np.zeros((K, M, K, M))
    move = np.zeros((K, M, K, M))
    xs = np.arange(K)
    for t in range(M):
        down, up = max(0, t - 1), min(M - 1, t + 1)
        stay[:, t, :, t] = P[t]
        move[:, t, :, up] = P[t]
        move[xs, t, xs, up] = 0.0
        move[xs, t, xs, down] = P[t][xs, xs]
    return stay.reshape(K * M, K * M), move.reshape(K * M, K * M)


def build_joint_kernel(pmf: DiscretePmf, M: int, p_next: float) -> FiniteJointKernel:
    """Joint kernel of the lattice chain for one step.

    From ``(x, theta)``: move to ``x'`` with ``P_theta(x, x')``; then with
    probability ``p_next`` the width becomes ``max(1, theta - 1)`` if
    ``x' == x`` and ``min(M, theta + 1)`` otherwise, else it stays.
    """
    if not 0.0 <= p_next <= 1.0:
        raise ParameterError(f"p_next={p_next!r} outside [0, 1]")
    if M < 1:
        raise ParameterError("M must be >= 1")
    stay, move = _joint_parts(_rwm_stack(pmf, M))
    return FiniteJointKernel((1.0 - p_next) * stay + p_next * move, pmf.K, M, float(p_next))


class _KernelSequence:
    """``Pbar(n)`` for ``n = 0, 1, ...``, optionally memoised."""

    def __init__(self, pmf: DiscretePmf, M: int, p_schedule: Callable, memo: bool = False):
        self.p = p_schedule
        self.stay, self.move = _joint_parts(_rwm_stack(pmf, M))
        self._cache: dict[int, np.ndarray] | None = {} if memo else None

    def __call__(self, n: int) -> np.ndarray:
        if self._cache is not None and n in self._cache:
            return self._cache[n]
        p = float(self.p(n + 1))
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p_{n + 1}={p!r} outside [0, 1]")
        T = (1.0 - p) * self.stay + p * self.move
        if self._cache is not None:
            self._cache[n] = T
        return T


@dataclass
class Propagation:
    joint: np.ndarray      # (N+1, K*M) laws of Z_n
    marginals: np.ndarray  # (N+1, K) laws of X_n
    tv_to_pi: np.ndarray   # (N+1,) l1 distance of X_n's law to pi


def point_law(x: int, theta: int, K: int, M: int) -> np.ndarray:
    law = np.zeros(K * M)
    law[state_index(x, theta, M)] = 1.0
    return law


def propagate(pmf: DiscretePmf, M: int, initial: np.ndarray, p_schedule: Callable,
              horizon: int, start: int = 0) -> Propagation:
    """Exact laws of ``Z_n`` for ``n = 0..horizon`` by vector-matrix products.

    ``initial`` is a length ``K*M`` law (see :func:`point_law`).
    """
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    K = pmf.K
    law = np.asarray(initial, dtype=float)
    if law.shape != (K * M,):
        raise ParameterError(f"initial law must have length K*M = {K * M}")
    kernels = _KernelSequence(pmf, M, p_schedule)
    joint = np.empty((horizon + 1, K * M))
    joint[0] = law
    for n in range(horizon):
        law = law @ kernels(start + n)
        joint[n + 1] = law
    marginals = joint.reshape(horizon + 1, K, M).sum(axis=2)
    pi = pmf.weights
    tv = np.abs(marginals - pi).sum(axis=1)
    return Propagation(joint, marginals, tv)


def exact_D(pmf: DiscretePmf, theta1: int, theta2: int) -> float:
    """``max_x || P_theta1(x, .) - P_theta2(x, .) ||`` in the l1 convention."""
    A = discrete_rwm_matrix(pmf, theta1)
    B = discrete_rwm_matrix(pmf, theta2)
    return max(tv_distance(a, b).l1 for a, b in zip(A, B))


# --------------------------------------------------------------------------
# resolvent and Poisson identity


@dataclass(frozen=True)
class ResolventSpec:
    """Discount ``a`` in (0,1), start offset ``l``, test function ``f`` on
    ``{1..K}`` (entry ``k`` is ``f(k+1)``), truncation tolerance."""

    a: float
    f: np.ndarray
    l: int = 0
    tol: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ParameterError(f"discount a={self.a!r} must lie in (0, 1)")
        if not self.tol > 0.0:
            raise ParameterError(f"truncation tolerance must be positive, got {self.tol!r}")
        if self.l < 0:
            raise ParameterError("start offset l must be >= 0")
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))


def centred(f: np.ndarray, pmf: DiscretePmf) -> np.ndarray:
    return np.asarray(f, dtype=float) - float(np.dot(pmf.weights, f))


def truncation_index(a: float, fbar_max: float, tol: float) -> int:
    """Smallest ``J`` with ``(1-a)^{J+1} * fbar_max / a <= tol``."""
    if fbar_max == 0.0:
        return 0
    J = math.ceil(math.log(tol * a / fbar_max) / math.log1p(-a)) - 1
    return max(J, 0)


def resolvent_table(spec: ResolventSpec, pmf: DiscretePmf, M: int, p_schedule: Callable,
                    l: int | None = None, kernels: _KernelSequence | None = None) -> np.ndarray:
    """``g_a^{(l)}(x, theta)`` for every start, as a ``(K, M)`` array.

    Evaluates ``sum_{j=0}^{J} (1-a)^{j+1} E^{(l)}_{x,theta}[fbar(X_j)]`` with
    ``fbar = f - pi(f)`` and ``J`` from :func:`truncation_index`, so the
    dropped tail is at most ``spec.tol``.
    """
    l = spec.l if l is None else l
    K = pmf.K
    fbar = centred(spec.f, pmf)
    fz = np.repeat(fbar, M)  # fbar lifted to joint states
    J = truncation_index(spec.a, float(np.abs(fbar).max()), spec.tol)
    kernels = kernels or _KernelSequence(pmf, M, p_schedule)
    prod = np.eye(K * M)
    disc = 1.0 - spec.a
    g = disc * fz
    w = disc
    for j in range(1, J + 1):
        prod = prod @ kernels(l + j - 1)
        w *= disc
        g = g + w * (prod @ fz)
    return g.reshape(K, M)


def exact_resolvent(spec: ResolventSpec, pmf: DiscretePmf, M: int, start: tuple[int, int],
                    p_schedule: Callable) -> float:
    x, theta = start
    return float(resolvent_table(spec, pmf, M, p_schedule)[x - 1, theta - 1])


def poisson_residual_table(spec: ResolventSpec, pmf: DiscretePmf, M: int,
                           p_schedule: Callable) -> np.ndarray:
    """``|fbar(x) - g^{(l)}(x,theta)/(1-a) + E^{(l)}_{x,theta}[g^{(l+1)}(X_1, theta_1)]|``
    for every start, as a ``(K, M)`` array."""
    kernels = _KernelSequence(pmf, M, p_schedule, memo=True)
    g_l = resolvent_table(spec, pmf, M, p_schedule, kernels=kernels).ravel()
    g_next = resolvent_table(spec, pmf, M, p_schedule, l=spec.l + 1, kernels=kernels).ravel()
    fz = np.repeat(centred(spec.f, pmf), M)
    res = fz - g_l / (1.0 - spec.a) + kernels(spec.l) @ g_next
    return np.abs(res).reshape(pmf.K, M)


def poisson_residual(spec: ResolventSpec, pmf: DiscretePmf, M: int, start: tuple[int, int],
                     p_schedule: Callable) -> float:
    x, theta = start
    return float(poisson_residual_table(spec, pmf, M, p_schedule)[x - 1, theta - 1])


# --------------------------------------------------------------------------
# kernel powers


@dataclass
class PowerProfile:
    sup_dist: np.ndarray    # (n_max+1,) sup_x ||P^n(x,.) - pi||_{V^beta}
    rate_ratio: np.ndarray  # (n_max+1,) sup_x (n+1)^{kappa-1} dist / V^{beta+alpha*kappa}
    constant: float         # max over n of rate_ratio


def kernel_power_profile(pmf: DiscretePmf, theta: int, V: WeightFunction | None = None,
                         beta: float = 0.0, kappa: float = 1.0, n_max: int = 1000,
                         alpha: float = 0.5) -> PowerProfile:
    """Convergence profile of ``P_theta^n`` to ``pi`` for ``n = 0..n_max``.

    ``alpha`` is the drift exponent entering the weight ``V^{beta + alpha*kappa}``;
    it is irrelevant when ``V`` is identically one.
    """
    if not 0.0 <= beta <= 1.0:
        raise ParameterError("beta must lie in [0, 1]")
    if kappa < 1.0:
        raise ParameterError("kappa must be >= 1")
    K = pmf.K
    v = np.ones(K) if V is None else np.asarray(V.values, dtype=float)
    vb = v**beta
    denom = v ** (beta + alpha * kappa)
    P = discrete_rwm_matrix(pmf, theta)
    pi = pmf.weights
    Q = np.eye(K)
    sup_dist = np.empty(n_max + 1)
    ratio = np.empty(n_max + 1)
    for n in range(n_max + 1):
        dist = np.abs(Q - pi) @ vb
        sup_dist[n] = dist.max()
        ratio[n] = ((n + 1.0) ** (kappa - 1.0) * dist / denom).max()
        Q = Q @ P
    return PowerProfile(sup_dist, ratio, float(ratio.max()))


# --------------------------------------------------------------------------
# two-state counterexample


@dataclass
class WinklerResult:
    tv_to_pi: np.ndarray       # (N+1,) l1 distance of law(X_n) to (1/2, 1/2)
    second_moment: np.ndarray  # (N+1,) E[(n^{-1} sum_{k=1}^n f(X_k) - pi(f))^2]; entry 0 is nan
    marginals: np.ndarray      # (N+1, 2)


def _switch_matrix(theta: float) -> np.ndarray:
    return np.array([[1.0 - theta, theta], [theta, 1.0 - theta]])


def _winkler_thetas(theta_schedule: Callable, N: int) -> np.ndarray:
    th = np.asarray(theta_schedule(np.arange(N)), dtype=float)
    if np.any((th <= 0.0) | (th >= 1.0)):
        raise ParameterError("switching probabilities theta_n must lie strictly in (0, 1)")
    return th


def winkler_counterexample(theta_schedule: Callable, horizon: int, f=(0.0, 1.0),
                           initial=(1.0, 0.0)) -> WinklerResult:
    """Two-state chain with ``P_theta(0,0) = P_theta(1,1) = 1 - theta`` and
    ``X_{n+1} ~ P_{theta_n}(X_n, .)``.

    The second moment of the running-average error is propagated exactly
    through ``m_n(x) = E[A_n 1{X_n = x}]`` with ``A_n = sum_{k<=n} fbar(X_k)``:

        E[A_{n+1}^2] = E[A_n^2] + 2 sum_x m_n(x) (P fbar)(x) + E[fbar(X_{n+1})^2]
        m_{n+1}      = m_n P + fbar * law(X_{n+1})
    """
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    th = _winkler_thetas(theta_schedule, horizon)
    f = np.asarray(f, dtype=float)
    fbar = f - f.mean()
    law = np.asarray(initial, dtype=float)
    marg = np.empty((horizon + 1, 2))
    marg[0] = law
    second = np.full(horizon + 1, np.nan)
    m = np.zeros(2)
    q = 0.0
    for n in range(horizon):
        P = _switch_matrix(th[n])
        q += 2.0 * m @ (P @ fbar)
        m = m @ P
        law = law @ P
        m = m + fbar * law
        q += law @ fbar**2
        marg[n + 1] = law
        second[n + 1] = q / (n + 1) ** 2
    tv = np.abs(marg - 0.5).sum(axis=1)
    return WinklerResult(tv, second, marg)


def winkler_second_moment_enumeration(theta_schedule: Callable, horizon: int, f=(0.0, 1.0),
                                      initial=(1.0, 0.0)) -> np.ndarray:
    """Brute-force second moments over all ``2^horizon`` paths (small ``horizon`` only)."""
    th = _winkler_thetas(theta_schedule, horizon)
    f = np.asarray(f, dtype=float)
    fbar = f - f.mean()
    acc = np.zeros(horizon + 1)
    for x0 in (0, 1):
        if initial[x0] == 0.0:
            continue
        for path in itertools.product((0, 1), repeat=horizon):
            prob = initial[x0]
            prev = x0
            for n, x in enumerate(path):
                prob *= (1.0 - th[n]) if x == prev else th[n]
                prev = x
            s = np.cumsum(fbar[list(path)])
            acc[1:] += prob * (s / np.arange(1, horizon + 1)) ** 2
    acc[0] = np.nan
    return acc
