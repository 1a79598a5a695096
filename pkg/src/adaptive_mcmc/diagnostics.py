"""Numerical checks of the conditions behind the ergodicity and LLN results
for the continuous adaptive Metropolis chain.

These are empirical diagnostics on grids and finite runs, not proofs: the
drift check verifies a given ``(c, b)`` at grid points, the adaptation report
tracks the Schur-norm surrogate along one trajectory, and the return-time
statistic is a sample mean over observed cycles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .chain import Trajectory, running_average
from .exceptions import InsufficientDataError, NumericalError, ParameterError
from .kernels import RwmParameter
from .targets import SmoothedWeibullTarget

TAIL_SIGMAS = 8.0


@dataclass(frozen=True)
class DriftSpec:
    """Drift function ``V_s = 1 + pi^{-s}`` with constants of the inequality
    ``P V <= V - c V^{1-alpha} + b 1_C`` and ``C = {|x| <= C_bound}``."""

    s: float = 0.05
    alpha: float = 0.5
    c: float = 1e-3
    b: float = 1.0
    C_bound: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.s < 0.0:
            raise ParameterError(f"s must be non-negative, got {self.s!r}")
        if not self.C_bound > 0.0:
            raise ParameterError("C_bound must be positive")


@dataclass(frozen=True)
class ReturnTimeSpec:
    """Small set ``C = {|x| <= radius}`` and rate ``r(n) = (n + 1)^{1 + eta}``."""

    radius: float = 5.0
    eta: float = 0.1

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise ParameterError(f"eta must be non-negative, got {self.eta!r}")
        if not self.radius > 0.0:
            raise ParameterError("radius must be positive")


# --------------------------------------------------------------------------
# drift


@dataclass
class DriftPoint:
    proposal_var: float
    x: float
    V: float
    PV: float
    margin: float
    c_max: float       # largest c for which this point passes
    quad_error: float
    tail_bound: float


@dataclass
class DriftReport:
    points: list
    skipped: list
    c: float
    quad_tol: float
    worst_margin: float
    c_star: float
    passed: bool
    sign_flips: list = field(default_factory=list)


def _drift_tail_bound(target: SmoothedWeibullTarget, s: float, x: float, Vx: float, sd: float) -> float:
    # |(V(x+z) - V(x)) alpha| <= V(x+z) + V(x) and, from
    # -log pi(y) <= 2 beta + (beta + 1 - m)|y|, V(x+z) <= 1 + exp(s (2 beta + k (|x| + |z|))).
    # Both Gaussian tails beyond TAIL_SIGMAS * sd then integrate in closed form.
    k = target.beta + 1.0 - target.m
    lam = s * k
    q8 = 0.5 * special.erfc(TAIL_SIGMAS / math.sqrt(2.0))
    shifted = 0.5 * special.erfc((TAIL_SIGMAS - lam * sd) / math.sqrt(2.0))
    grow = math.exp(s * (2.0 * target.beta + k * abs(x)) + 0.5 * (lam * sd) ** 2)
    return 2.0 * ((Vx + 1.0) * q8 + grow * shifted)


def drift_increment(target: SmoothedWeibullTarget, s: float, x: float, proposal_var: float,
                    quad_tol: float = 1e-8) -> tuple[float, float, float]:
    """``P V_s(x) - V_s(x)`` for the 1-D RWM kernel with proposal variance
    ``proposal_var``, as ``(value, quadrature_error, tail_bound)``.

    Uses ``P V(x) - V(x) = int (V(x+z) - V(x)) alpha(x, x+z) q(z) dz`` on
    ``|z| <= 8 sd``; the remainder is bounded analytically.
    """
    sd = math.sqrt(proposal_var)
    lx = target.log_density(np.array([x]))
    Vx = 1.0 + math.exp(-s * lx)
    norm = 1.0 / (sd * math.sqrt(2.0 * math.pi))

    def integrand(z):
        ly = target.log_density(np.array([x + z]))
        dv = math.expm1(-s * ly) - math.expm1(-s * lx)
        acc = 1.0 if ly >= lx else math.exp(ly - lx)
        return dv * acc * norm * math.exp(-0.5 * (z / sd) ** 2)

    lim = TAIL_SIGMAS * sd
    # break at the mirror point -2x where pi(x+z) = pi(x) (the target is symmetric)
    pts = [p for p in (-2.0 * x, 0.0) if -lim < p < lim]
    val, err = integrate.quad(integrand, -lim, lim, points=pts or None, epsabs=quad_tol * 1e-3,
                              epsrel=1e-12, limit=500)
    return val, err, _drift_tail_bound(target, s, x, Vx, sd)


def drift_check(target: SmoothedWeibullTarget, spec: DriftSpec, theta_grid: Sequence[RwmParameter],
                x_grid: Sequence[float], quad_tol: float = 1e-8) -> DriftReport:
    """Check ``P_theta V_s(x) <= V_s(x) - c V_s(x) |x|^{2(m-1)}`` on a grid.

    ``margin = V - c V |x|^{2(m-1)} - P V``; the check passes when every
    margin is ``>= -quad_tol``. Points inside ``C`` are skipped. ``c_star``
    is the largest ``c`` for which all evaluated points pass.
    """
    if target.dim != 1:
        raise ParameterError("drift_check needs a 1-D target")
    m, s = target.m, spec.s
    points, skipped = [], []
    for theta in theta_grid:
        var = float(theta.proposal_cov[0, 0])
        for x in x_grid:
            x = float(x)
            if abs(x) <= spec.C_bound:
                skipped.append((var, x))
                continue
            try:
                inc, err, tail = drift_increment(target, s, x, var, quad_tol)
            except Exception as exc:  # scipy warnings escalated to errors, etc.
                raise NumericalError(f"quadrature failed at proposal_var={var}, x={x}: {exc}") from exc
            if err + tail > quad_tol:
                raise NumericalError(
                    f"quadrature error {err + tail:.3g} exceeds {quad_tol:.3g} at proposal_var={var}, x={x}")
            V = 1.0 + math.exp(-s * target.log_density(np.array([x])))
            scale = V * abs(x) ** (2.0 * (m - 1.0))
            points.append(DriftPoint(var, x, V, V + inc, -inc - spec.c * scale, -inc / scale, err, tail))
    if not points:
        raise ParameterError("every grid point lies inside C")
    margins = np.array([p.margin for p in points])
    flips = []
    for var in sorted({p.proposal_var for p in points}):
        row = sorted((p for p in points if p.proposal_var == var), key=lambda p: p.x)
        for p, q in zip(row, row[1:]):
            if np.sign(p.margin) != np.sign(q.margin) and np.sign(p.x) == np.sign(q.x):
                flips.append((var, p.x, q.x))
    return DriftReport(points=points, skipped=skipped, c=spec.c, quad_tol=quad_tol,
                       worst_margin=float(margins.min()),
                       c_star=float(min(p.c_max for p in points)),
                       passed=bool(margins.min() >= -quad_tol), sign_flips=flips)


# --------------------------------------------------------------------------
# law of large numbers


@dataclass
class LLNReport:
    n: int
    estimates: np.ndarray  # per-trajectory running average at step n
    errors: np.ndarray     # |estimate - reference|
    reference: float
    pooled_error: float    # mean of per-trajectory absolute errors
    mean_error: float      # |mean estimate - reference|
    standard_error: float  # across-trajectory standard error of the estimates
    half_width: float      # 3 standard errors

    def within(self, tol: float, relative: bool = False) -> np.ndarray:
        scale = abs(self.reference) if relative else 1.0
        return self.errors <= tol * scale


def lln_report(trajectories: Sequence[Trajectory], f: Callable, reference: float,
               n: int | None = None) -> LLNReport:
    """Running-average errors at step ``n`` (default: the final step)."""
    if len(trajectories) < 2:
        raise InsufficientDataError("lln_report needs at least two trajectories")
    est = []
    for tr in trajectories:
        avg = running_average(tr, f)
        k = avg.size if n is None else n // tr.thin
        if not 1 <= k <= avg.size:
            raise InsufficientDataError(f"step {n} beyond trajectory length {tr.n_steps}")
        est.append(avg[k - 1])
    est = np.array(est)
    err = np.abs(est - reference)
    se = float(est.std(ddof=1) / math.sqrt(est.size))
    n_eff = trajectories[0].n_steps if n is None else n
    return LLNReport(n_eff, est, err, float(reference), float(err.mean()),
                     float(abs(est.mean() - reference)), se, 3.0 * se)


# --------------------------------------------------------------------------
# diminishing adaptation


@dataclass
class AdaptationReport:
    delta: np.ndarray        # delta[n-1] = metric(theta_n, theta_{n-1}), n = 1..N
    windows: list            # [(lo, hi), ...] step ranges, hi exclusive
    medians: np.ndarray      # median of n * delta_n per window
    nonzero_freq: np.ndarray  # fraction of non-zero delta_n per window
    growth: float            # max median / first median
    spread: float            # max median / min median
    passed: bool


def dyadic_windows(start: int, stop: int) -> list[tuple[int, int]]:
    """``[start 2^k, start 2^{k+1})`` up to ``stop``; a final partial window is
    kept when at least half full."""
    out = []
    lo = start
    while lo < stop:
        hi = 2 * lo
        if hi > stop + 1:
            if (stop + 1 - lo) * 2 >= lo:
                out.append((lo, stop + 1))
            break
        out.append((lo, hi))
        lo = hi
    return out


def diminishing_adaptation_report(traj: Trajectory, start: int = 1000,
                                  factor: float = 2.0) -> AdaptationReport:
    """Windowed medians of ``n * delta_n``, with ``delta_n`` the Schur-norm
    surrogate between consecutive parameters (or ``|theta_n - theta_{n-1}|``
    on the lattice).

    Passes when no window median exceeds ``factor`` times the first one.
    """
    delta = np.asarray(traj.metric, dtype=float)
    N = delta.size
    if N < 2 * start:
        raise InsufficientDataError(f"need at least {2 * start} steps, got {N}")
    ns = np.arange(1, N + 1, dtype=float)
    scaled = ns * delta
    windows = dyadic_windows(start, N)
    med = np.array([np.median(scaled[lo - 1:hi - 1]) for lo, hi in windows])
    freq = np.array([np.mean(delta[lo - 1:hi - 1] != 0.0) for lo, hi in windows])
    first = med[0]
    if first > 0:
        growth = float(med.max() / first)
    else:
        growth = 1.0 if med.max() == 0 else math.inf
    spread = float(med.max() / med.min()) if med.min() > 0 else (1.0 if med.max() == 0 else math.inf)
    return AdaptationReport(delta, windows, med, freq, growth, spread, bool(growth <= factor))


# --------------------------------------------------------------------------
# return times


@dataclass
class ReturnTimeReport:
    mean_rate: float   # empirical mean of (tau + 1)^{1 + eta}
    cycles: int
    taus: np.ndarray


def return_time_moments(traj: Trajectory, spec: ReturnTimeSpec, start: int = 0,
                        stop: int | None = None) -> ReturnTimeReport:
    """Gaps ``tau`` between consecutive visits to ``C`` over recorded steps
    ``start..stop`` and the empirical mean of ``(tau + 1)^{1 + eta}``.

    Gaps are counted in steps, so thinned trajectories give multiples of
    ``thin``.
    """
    states = traj.states[start // traj.thin: None if stop is None else stop // traj.thin + 1]
    x = states.reshape(states.shape[0], -1)
    inside = np.linalg.norm(x, axis=1) <= spec.radius
    visits = np.flatnonzero(inside) * traj.thin
    if visits.size < 2:
        raise InsufficientDataError(f"only {visits.size} visit(s) to C; need at least 2")
    taus = np.diff(visits)
    return ReturnTimeReport(float(np.mean((taus + 1.0) ** (1.0 + spec.eta))), int(taus.size), taus)
