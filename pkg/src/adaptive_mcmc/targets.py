"""Target densities: a smoothed Weibull-type family with sub-exponential
tails, a Gaussian reference, user-supplied log-densities, and discrete pmfs
for the lattice toy chain.

Built-in continuous targets evaluate their log-density through a single
jitted kernel keyed by an integer ``kind`` so that compiled chain loops can
call it without function-typed arguments (which defeat numba's cache).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import integrate

from .exceptions import DimensionError, NumericalError, ParameterError
from .measures import ProbVector

KIND_PYTHON = -1
KIND_GAUSSIAN = 0
KIND_WEIBULL = 1

FD_REL_STEP = 1e-6


@numba.njit(cache=True, nogil=True)
def _log_density_kernel(kind, x, params):
    if kind == KIND_GAUSSIAN:
        # params = [p, mean (p), precision (p*p, row-major)]
        p = int(params[0])
        q = 0.0
        for i in range(p):
            di = x[i] - params[1 + i]
            for j in range(p):
                q += di * params[1 + p + i * p + j] * (x[j] - params[1 + j])
        return -0.5 * q
    # smoothed Weibull, params = [m, beta]
    m = params[0]
    t = 1.0 + x[0] * x[0]
    return -params[1] * t ** (0.5 * m) + 0.5 * (m - 1.0) * math.log(t)


class TargetDensity:
    """Unnormalised log-density on ``R^p``.

    Subclasses implement :meth:`log_density`; :meth:`grad_log_density` is
    optional and returns ``None`` when no analytic gradient is available.
    ``normalization`` holds ``int exp(log_density)`` once a quadrature has
    computed it.
    """

    dim: int = 1
    normalization: float | None = None
    jit_kind: int = KIND_PYTHON
    jit_params: np.ndarray = np.zeros(0)

    def log_density(self, x) -> float:
        raise NotImplementedError

    def grad_log_density(self, x) -> np.ndarray | None:
        return None

    @property
    def has_gradient(self) -> bool:
        return type(self).grad_log_density is not TargetDensity.grad_log_density

    def log_density_vec(self, xs: np.ndarray) -> np.ndarray:
        """Log-density over many points; rows of ``xs`` (or scalars in 1-D)."""
        xs = np.asarray(xs, dtype=float)
        if self.dim == 1:
            return np.array([self.log_density(np.array([v])) for v in xs.ravel()]).reshape(xs.shape)
        return np.array([self.log_density(row) for row in xs])

    def _point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise DimensionError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        return x


class CallableTarget(TargetDensity):
    """Wraps a user-supplied log-density (and optional gradient)."""

    def __init__(self, log_density: Callable, dim: int, grad: Callable | None = None):
        self.dim = int(dim)
        self._f = log_density
        self._grad = grad

    def log_density(self, x) -> float:
        return float(self._f(self._point(x)))

    def grad_log_density(self, x):
        if self._grad is None:
            return None
        return np.asarray(self._grad(self._point(x)), dtype=float)

    @property
    def has_gradient(self) -> bool:
        return self._grad is not None


class GaussianTarget(TargetDensity):
    """Multivariate normal ``N(mean, cov)``, log-density up to a constant."""

    jit_kind = KIND_GAUSSIAN

    def __init__(self, mean, cov):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        p = self.mean.size
        if self.cov.shape != (p, p):
            raise DimensionError(f"covariance shape {self.cov.shape} does not match mean of length {p}")
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ParameterError("covariance must be symmetric")
        try:
            np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError:
            raise ParameterError("covariance must be positive definite") from None
        self.dim = p
        self.precision = np.linalg.inv(self.cov)
        self.jit_params = np.concatenate([[p], self.mean, self.precision.ravel()])

    @classmethod
    def standard(cls, dim: int = 1) -> "GaussianTarget":
        return cls(np.zeros(dim), np.eye(dim))

    def log_density(self, x) -> float:
        return _log_density_kernel(KIND_GAUSSIAN, self._point(x), self.jit_params)

    def grad_log_density(self, x) -> np.ndarray:
        return -self.precision @ (self._point(x) - self.mean)

    def log_density_vec(self, xs):
        xs = np.asarray(xs, dtype=float)
        d = xs.reshape(-1, self.dim) - self.mean
        out = -0.5 * np.einsum("ni,ij,nj->n", d, self.precision, d)
        return out.reshape(xs.shape if self.dim == 1 else xs.shape[:-1])


class SmoothedWeibullTarget(TargetDensity):
    """One-dimensional density with Weibull-type tails,

        log pi(x) = -beta (1 + x^2)^{m/2} + ((m - 1)/2) log(1 + x^2),

    which matches ``|x|^{m-1} exp(-beta |x|^m)`` as ``|x| -> inf`` but is
    smooth at the origin.
    """

    jit_kind = KIND_WEIBULL
    dim = 1

    def __init__(self, m: float = 0.5, beta: float = 1.0):
        if not 0.0 < m < 1.0:
            raise ParameterError(f"m must lie in (0, 1), got {m!r}")
        if not beta > 0.0:
            raise ParameterError(f"beta must be positive, got {beta!r}")
        self.m = float(m)
        self.beta = float(beta)
        self.jit_params = np.array([self.m, self.beta])

    def log_density(self, x) -> float:
        return _log_density_kernel(KIND_WEIBULL, self._point(x), self.jit_params)

    def log_density_vec(self, xs):
        t = 1.0 + np.asarray(xs, dtype=float) ** 2
        return -self.beta * t ** (0.5 * self.m) + 0.5 * (self.m - 1.0) * np.log(t)

    def grad_log_density(self, x) -> np.ndarray:
        return np.array([self.dlog(float(self._point(x)[0]))])

    def dlog(self, x: float) -> float:
        """First derivative of the log-density (scalar)."""
        m, b = self.m, self.beta
        t = 1.0 + x * x
        return -b * m * x * t ** (0.5 * m - 1.0) + (m - 1.0) * x / t

    def d2log(self, x: float) -> float:
        """Second derivative of the log-density (scalar)."""
        m, b = self.m, self.beta
        t = 1.0 + x * x
        return (-b * m * (t ** (0.5 * m - 1.0) + (m - 2.0) * x * x * t ** (0.5 * m - 2.0))
                + (m - 1.0) * (1.0 - x * x) / (t * t))


@dataclass(frozen=True, eq=False)
class DiscretePmf(ProbVector):
    """Target pmf on the lattice ``{1, ..., K}``, ``K >= 4``.

    ``weights[k]`` is the mass of lattice point ``k + 1``.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.K < 4:
            raise ParameterError(f"lattice size K must be at least 4, got {self.K}")

    @property
    def K(self) -> int:
        return self.weights.size

    def prob(self, x: int) -> float:
        if not 1 <= x <= self.K:
            raise IndexError(f"lattice point {x} outside 1..{self.K}")
        return float(self.weights[x - 1])

    @classmethod
    def linear(cls, K: int) -> "DiscretePmf":
        """``pi(x) proportional to x``."""
        w = np.arange(1, K + 1, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, K: int) -> "DiscretePmf":
        return cls(np.full(K, 1.0 / K))


# --------------------------------------------------------------------------
# tail regularity


@dataclass
class D2Report:
    d0: float
    D0: float
    d1: float
    D1: float
    d2: float
    D2: float
    r_contour: float
    radii: list
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _fd_grad(f: Callable[[float], float], x: float) -> float:
    h = FD_REL_STEP * max(1.0, abs(x))
    return (f(x + h) - f(x - h)) / (2.0 * h)


def check_D2(target: SmoothedWeibullTarget, radii: Sequence[float], R: float = 10.0) -> D2Report:
    """Tail-regularity sweep of a 1-D sub-exponential target.

    At ``x = +r`` and ``x = -r`` for every radius, evaluates the ratios

        -log pi(x) / |x|^m,  |d log pi(x)| / |x|^{m-1},  |d^2 log pi(x)| / |x|^{m-2}

    and the contour inner product ``sign(pi'(x)) * sign(x)``. The envelope
    constants are the empirical min/max of each ratio. The log-density is the
    unnormalised one; the additive constant does not affect the tail rates.

    A violation is recorded for non-finite or non-positive ratios, a contour
    product that is not negative, or an analytic gradient that disagrees with
    central finite differences by more than 1e-5 relative.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ParameterError("radii must be non-empty")
    low = [r for r in radii if r < R]
    if low:
        raise ParameterError(f"radii {low} lie below the regularity radius R={R}")
    m = target.m
    logpi = lambda v: target.log_density(np.array([v]))
    rows, violations = [], []
    for r in radii:
        for x in (r, -r):
            g = target.dlog(x)
            g_fd = _fd_grad(logpi, x)
            h = target.d2log(x)
            ax = abs(x)
            row = {
                "x": x,
                "ratio0": -logpi(x) / ax**m,
                "ratio1": abs(g) / ax ** (m - 1.0),
                "ratio2": abs(h) / ax ** (m - 2.0),
                "contour": float(np.sign(g) * np.sign(x)),
                "grad_fd_relerr": abs(g - g_fd) / max(abs(g), 1e-300),
            }
            rows.append(row)
            for key in ("ratio0", "ratio1", "ratio2"):
                if not np.isfinite(row[key]) or row[key] <= 0.0:
                    violations.append((x, key, row[key]))
            if not row["contour"] < 0.0:
                violations.append((x, "contour", row["contour"]))
            if row["grad_fd_relerr"] > 1e-5:
                violations.append((x, "gradient", row["grad_fd_relerr"]))
    col = lambda k: np.array([row[k] for row in rows])
    return D2Report(
        d0=col("ratio0").min(), D0=col("ratio0").max(),
        d1=col("ratio1").min(), D1=col("ratio1").max(),
        d2=col("ratio2").min(), D2=col("ratio2").max(),
        r_contour=float(-col("contour").max()),
        radii=radii, rows=rows, violations=violations,
    )


def d3_tail_overlap(target: SmoothedWeibullTarget, x: float, proposal_var: float,
                    s_star: float, upsilon: float | None = None, eta: float = 0.5) -> float:
    """Tail-overlap integral

        int_{|z| >= eta |x|^upsilon} max(1, pi(x)/pi(x+z))^{s_star} q(z) dz

    for a centred Gaussian ``q`` with variance ``proposal_var``. The default
    ``upsilon`` is ``(1 - m)/2``.
    """
    if upsilon is None:
        upsilon = 0.5 * (1.0 - target.m)
    sd = math.sqrt(proposal_var)
    cut = eta * abs(x) ** upsilon
    lx = target.log_density(np.array([x]))

    def integrand(z):
        ratio = lx - target.log_density(np.array([x + z]))
        return math.exp(s_star * max(0.0, ratio) - 0.5 * (z / sd) ** 2) / (sd * math.sqrt(2 * math.pi))

    total = 0.0
    for lo, hi in ((cut, np.inf), (-np.inf, -cut)):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-300, epsrel=1e-10, limit=200)
        total += val
    return total


# --------------------------------------------------------------------------
# quadrature reference values

_BREAKS = (0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 1e4, 1e5, 1e6)


def quadrature_expectation(target: TargetDensity, f: Callable, abs_tol: float = 1e-8,
                           center: float | None = None) -> float:
    """``int f dpi / int dpi`` for a 1-D target by adaptive quadrature.

    The line is split into geometrically growing pieces on either side of
    ``center`` (the Gaussian mean, or 0). ``f`` must accept a float. Sets
    ``target.normalization`` as a side effect.

    Raises:
        NumericalError: if the propagated error estimate exceeds ``abs_tol``.
    """
    if target.dim != 1:
        raise DimensionError("quadrature_expectation needs a 1-D target")
    if center is None:
        center = float(target.mean[0]) if isinstance(target, GaussianTarget) else 0.0
    shift = target.log_density(np.array([center]))

    def w(x):
        return math.exp(target.log_density(np.array([x])) - shift)

    pieces = list(zip(_BREAKS[:-1], _BREAKS[1:])) + [(_BREAKS[-1], np.inf)]
    z = zerr = num = nerr = 0.0
    for sign in (1.0, -1.0):
        for lo, hi in pieces:
            a_, b_ = (center + lo, center + hi) if sign > 0 else (center - hi, center - lo)
            kw = dict(epsabs=abs_tol * 1e-3, epsrel=1e-13, limit=500)
            v0, e0 = integrate.quad(w, a_, b_, **kw)
            v1, e1 = integrate.quad(lambda x: f(x) * w(x), a_, b_, **kw)
            z, zerr, num, nerr = z + v0, zerr + e0, num + v1, nerr + e1
    if not z > 0.0 or not math.isfinite(num):
        raise NumericalError("quadrature produced a non-positive or non-finite mass")
    value = num / z
    err = nerr / z + abs(num) * zerr / z**2
    if err > abs_tol:
        raise NumericalError(f"quadrature error estimate {err:.3g} exceeds abs_tol={abs_tol:.3g}")
    target.normalization = z * math.exp(shift)
    return value
