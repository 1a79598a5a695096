"""One-step transition kernels: Gaussian random walk Metropolis on ``R^p``
and the exact Metropolis rows of the lattice toy chain."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import DimensionError, ParameterError
from .measures import ProbVector
from .targets import DiscretePmf, TargetDensity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RwmParameter:
    """Adapted parameter ``theta = (mu, Sigma, c)``.

    The proposal increment is Gaussian with covariance ``exp(c) * Sigma``;
    ``mu`` is the running mean used by the covariance recursion.
    """

    mu: np.ndarray
    Sigma: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float)).copy()
        S = np.atleast_2d(np.asarray(self.Sigma, dtype=float)).copy()
        if S.shape != (mu.size, mu.size):
            raise DimensionError(f"Sigma shape {S.shape} does not match mu of length {mu.size}")
        if not np.allclose(S, S.T, rtol=0.0, atol=1e-12):
            raise ParameterError("Sigma must be symmetric")
        mu.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", S)
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def proposal_cov(self) -> np.ndarray:
        return math.exp(self.c) * self.Sigma

    def proposal_chol(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.proposal_cov)
        except np.linalg.LinAlgError:
            raise ParameterError("exp(c) * Sigma is not positive definite") from None

    @classmethod
    def identity(cls, dim: int, c: float = 0.0) -> "RwmParameter":
        return cls(np.zeros(dim), np.eye(dim), c)


@dataclass(frozen=True)
class StepRecord:
    new_state: np.ndarray
    proposal: np.ndarray
    alpha: float
    accepted: bool


@numba.njit(cache=True, nogil=True)
def _propose(x, L, xi):
    p = x.shape[0]
    y = np.empty(p)
    for i in range(p):
        s = x[i]
        for j in range(i + 1):
            s += L[i, j] * xi[j]
        y[i] = s
    return y


@numba.njit(cache=True, nogil=True)
def _accept_prob(log_ratio):
    # NaN/inf-safe: a non-finite log target at the proposal is a rejection
    if log_ratio != log_ratio:
        return 0.0
    if log_ratio >= 0.0:
        return 1.0
    return math.exp(log_ratio)


def rwm_step(target: TargetDensity, theta: RwmParameter, x, rng: np.random.Generator,
             log_px: float | None = None) -> StepRecord:
    """One random walk Metropolis step from ``x`` under ``theta``.

    Draw order per step is fixed: ``p`` standard normals, then one uniform.
    The compiled chain drivers consume the generator in the same order, so a
    frozen-parameter chain reproduces these steps exactly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != theta.dim:
        raise DimensionError(f"state has dimension {x.size}, parameter has {theta.dim}")
    L = theta.proposal_chol()
    lx = target.log_density(x) if log_px is None else log_px
    if not math.isfinite(lx):
        raise ParameterError("log-density is not finite at the current state")
    xi = rng.standard_normal(theta.dim)
    y = _propose(x, L, xi)
    ly = target.log_density(y)
    if not math.isfinite(ly):
        logger.warning("non-finite log-density at proposal %s; rejecting", y)
        ly = -math.inf
    a = _accept_prob(ly - lx)
    accepted = bool(rng.random() < a)
    return StepRecord(y.copy() if accepted else x.copy(), y, a, accepted)


def rwm_chain(target: TargetDensity, theta: RwmParameter, x0, n_steps: int,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Homogeneous RWM chain by repeated :func:`rwm_step`.

    Returns ``(states, accepted)`` with ``states[0] = x0``.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    states = np.empty((n_steps + 1, x.size))
    states[0] = x
    accepted = np.zeros(n_steps, dtype=bool)
    lx = target.log_density(x)
    for n in range(n_steps):
        rec = rwm_step(target, theta, x, rng, log_px=lx)
        if rec.accepted:
            x = rec.new_state
            lx = target.log_density(x)
        states[n + 1] = x
        accepted[n] = rec.accepted
    return states, accepted


# --------------------------------------------------------------------------
# lattice toy kernel


def discrete_rwm_row(pmf: DiscretePmf, theta: int, x: int) -> ProbVector:
    """Exact Metropolis row ``P_theta(x, .)`` on ``{1, ..., K}``.

    The proposal is uniform on ``{x-theta, ..., x-1, x+1, ..., x+theta}``.
    Proposals off the lattice have zero target mass and are rejected, so
    their probability stays at ``x``. Entry ``k`` of the result is the mass
    of lattice point ``k + 1``.
    """
    K = pmf.K
    if not 1 <= x <= K:
        raise IndexError(f"state {x} outside 1..{K}")
    if theta < 1:
        raise IndexError(f"proposal width {theta} must be >= 1")
    return ProbVector(_row(pmf.weights, int(theta), int(x)))


def _row(w: np.ndarray, theta: int, x: int) -> np.ndarray:
    K = w.size
    row = np.zeros(K)
    px = w[x - 1]
    for y in range(max(1, x - theta), min(K, x + theta) + 1):
        if y != x:
            ratio = 1.0 if px == 0.0 else min(1.0, w[y - 1] / px)
            row[y - 1] = ratio / (2 * theta)
    row[x - 1] = 0.0
    row[x - 1] = 1.0 - row.sum()
    return row


def discrete_rwm_matrix(pmf: DiscretePmf, theta: int) -> np.ndarray:
    """Full ``K x K`` transition matrix of ``P_theta``."""
    if theta < 1:
        raise IndexError(f"proposal width {theta} must be >= 1")
    return np.array([_row(pmf.weights, int(theta), x) for x in range(1, pmf.K + 1)])
