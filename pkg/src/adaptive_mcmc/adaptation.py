"""Adaptation rules.

* :func:`am_update` -- stochastic-approximation update of ``(mu, Sigma, c)``
  with step ``1/(n+1)``; a candidate outside the compact parameter space is
  rejected as a whole (no projection).
* :func:`toy_update` -- the +/-1 proposal-width rule of the lattice chain.
* :func:`adaptation_metric` -- ``|exp(c) Sigma - exp(c') Sigma'|_s``, the
  computable upper-bound surrogate (up to a constant) for the kernel
  distance between consecutive parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import DimensionError, ParameterError
from .kernels import RwmParameter

EIG_TOL = 1e-12
CAP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ThetaSpace:
    """Compact parameter space ``box x Theta_+ x [kappa_l, kappa_u]``.

    ``Theta_+`` is ``{A + floor * Id : A symmetric PSD, |A|_s <= cap}``.
    ``target_accept`` is the acceptance rate the log-scale is steered to.
    """

    mu_low: np.ndarray
    mu_high: np.ndarray
    floor: float = 1e-3
    cap: float = 1e3
    kappa_l: float = -10.0
    kappa_u: float = 10.0
    target_accept: float = 0.35

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.mu_low, dtype=float))
        hi = np.atleast_1d(np.asarray(self.mu_high, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionError("mu_low and mu_high must have the same shape")
        if np.any(lo >= hi):
            raise ParameterError("mu_low must be strictly below mu_high componentwise")
        if not self.floor > 0:
            raise ParameterError(f"eigenvalue floor must be positive, got {self.floor!r}")
        if not self.cap > 0:
            raise ParameterError(f"Schur-norm cap must be positive, got {self.cap!r}")
        if not self.kappa_l < self.kappa_u:
            raise ParameterError(f"need kappa_l < kappa_u, got {self.kappa_l!r} >= {self.kappa_u!r}")
        if not 0.0 < self.target_accept < 1.0:
            raise ParameterError(f"target_accept must lie in (0, 1), got {self.target_accept!r}")
        object.__setattr__(self, "mu_low", lo)
        object.__setattr__(self, "mu_high", hi)

    @property
    def dim(self) -> int:
        return self.mu_low.size

    @classmethod
    def box(cls, dim: int, half_width: float = 1e3, **kw) -> "ThetaSpace":
        return cls(np.full(dim, -half_width), np.full(dim, half_width), **kw)

    def contains(self, theta: RwmParameter) -> bool:
        if theta.dim != self.dim:
            raise DimensionError(f"parameter dimension {theta.dim} != space dimension {self.dim}")
        return bool(_in_theta(theta.mu, theta.Sigma, theta.c, self.mu_low, self.mu_high,
                              self.floor, self.cap, self.kappa_l, self.kappa_u))

    def check(self, theta: RwmParameter) -> RwmParameter:
        if not self.contains(theta):
            raise ParameterError("initial parameter lies outside the parameter space")
        return theta


@numba.njit(cache=True, nogil=True)
def _in_theta(mu, S, c, mu_lo, mu_hi, floor, cap, kl, ku):
    for i in range(mu.shape[0]):
        if not (mu_lo[i] <= mu[i] <= mu_hi[i]):
            return False
    if not (kl <= c <= ku):
        return False
    p = S.shape[0]
    ss = 0.0
    for i in range(p):
        for j in range(p):
            if abs(S[i, j] - S[j, i]) > EIG_TOL:
                return False
            a = S[i, j] - (floor if i == j else 0.0)
            ss += a * a
    if not math.sqrt(ss) <= cap + CAP_TOL:
        return False
    if p == 1:
        return S[0, 0] >= floor - EIG_TOL
    return np.linalg.eigvalsh(S)[0] >= floor - EIG_TOL


@numba.njit(cache=True, nogil=True)
def _am_candidate(mu, S, c, n, x_next, alpha_val, alpha_bar):
    g = 1.0 / (n + 1.0)
    p = mu.shape[0]
    d = x_next - mu
    new_mu = mu + g * d
    new_S = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            v = S[i, j] + g * (d[i] * d[j] - S[i, j])
            new_S[i, j] = v
            new_S[j, i] = v
    new_c = c + g * (alpha_val - alpha_bar)
    return new_mu, new_S, new_c


@numba.njit(cache=True, nogil=True)
def _metric(S, c, S_prev, c_prev):
    ec, ep = math.exp(c), math.exp(c_prev)
    ss = 0.0
    for i in range(S.shape[0]):
        for j in range(S.shape[1]):
            a = ec * S[i, j] - ep * S_prev[i, j]
            ss += a * a
    return math.sqrt(ss)


def am_update(theta: RwmParameter, n: int, x_next, alpha_val: float, space: ThetaSpace) -> RwmParameter:
    """One adaptation step after the move ``X_n -> X_{n+1} = x_next``.

    ``alpha_val`` is the acceptance probability of the proposal made at step
    ``n``. Returns the candidate if it lies in ``space`` (all three components
    tested jointly), otherwise ``theta`` unchanged.
    """
    if n < 0:
        raise ParameterError("step index must be non-negative")
    x_next = np.atleast_1d(np.asarray(x_next, dtype=float))
    mu, S, c = _am_candidate(theta.mu, theta.Sigma, theta.c, float(n), x_next,
                             float(alpha_val), space.target_accept)
    if _in_theta(mu, S, c, space.mu_low, space.mu_high, space.floor, space.cap,
                 space.kappa_l, space.kappa_u):
        return RwmParameter(mu, S, c)
    return theta


def toy_update(theta: int, moved: bool, p_next: float, M: int, rng: np.random.Generator) -> int:
    """Proposal-width rule of the lattice chain.

    One uniform is drawn on every call, adapting or not, so the random stream
    stays aligned with the compiled driver.
    """
    if not 1 <= theta <= M:
        raise ParameterError(f"theta={theta} outside 1..{M}")
    if not 0.0 <= p_next <= 1.0:
        raise ParameterError(f"adaptation probability {p_next!r} outside [0, 1]")
    if rng.random() < p_next:
        return min(M, theta + 1) if moved else max(1, theta - 1)
    return theta


def adaptation_metric(theta: RwmParameter, theta_prev: RwmParameter) -> float:
    """Schur norm ``|exp(c) Sigma - exp(c') Sigma'|_s``."""
    if theta.dim != theta_prev.dim:
        raise DimensionError("parameters have different dimensions")
    return float(_metric(theta.Sigma, theta.c, theta_prev.Sigma, theta_prev.c))
