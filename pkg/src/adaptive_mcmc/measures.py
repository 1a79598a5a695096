"""Finite probability vectors, total-variation and V-norm distances, and
maximal coupling.

Two total-variation conventions are used side by side:

* ``l1``  -- ``sum_i |mu_i - nu_i|``, range ``[0, 2]``. This is the norm used
  for the kernel distance ``D(theta, theta')`` throughout the package.
* ``sup`` -- ``sup_A |mu(A) - nu(A)| = l1 / 2``, range ``[0, 1]``. This is the
  convention under which a maximal coupling meets with probability
  ``1 - sup``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError, ParameterError

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A probability distribution on the labels ``0, ..., n-1``.

    Weights within ``PROB_TOL`` of summing to one are renormalised; anything
    further off is rejected.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise ParameterError("probability vector must be non-empty")
        if not np.all(np.isfinite(w)):
            raise ParameterError("probability weights must be finite")
        if np.any(w < 0):
            raise ParameterError(f"negative probability weight {w.min()!r}")
        total = w.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ParameterError(f"weights sum to {float(total)!r}, not 1 (tol {PROB_TOL})")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.weights.size)


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A weight function ``V >= 1`` on a finite space."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)) or np.any(v < 1.0):
            raise ParameterError("weight function values must be finite and >= 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __pow__(self, exponent: float) -> "WeightFunction":
        return WeightFunction(self.values**exponent)

    @classmethod
    def ones(cls, n: int) -> "WeightFunction":
        return cls(np.ones(n))


class TVDistance(NamedTuple):
    l1: float
    sup: float


class CouplingDraw(NamedTuple):
    x: int
    y: int
    met: bool


def as_prob_vector(w) -> ProbVector:
    return w if isinstance(w, ProbVector) else ProbVector(w)


def _pair(mu, nu) -> tuple[np.ndarray, np.ndarray]:
    a = as_prob_vector(mu).weights
    b = as_prob_vector(nu).weights
    if a.size != b.size:
        raise DimensionError(f"support sizes differ: {a.size} != {b.size}")
    return a, b


def tv_distance(mu, nu) -> TVDistance:
    """Total-variation distance in both conventions.

    >>> tv_distance([0.5, 0.5], [1.0, 0.0])
    TVDistance(l1=1.0, sup=0.5)
    """
    a, b = _pair(mu, nu)
    l1 = float(np.abs(a - b).sum())
    return TVDistance(l1, 0.5 * l1)


def v_norm_distance(mu, nu, v) -> float:
    """``sum_i v_i |mu_i - nu_i|``, the V-norm of ``mu - nu`` on a finite space."""
    a, b = _pair(mu, nu)
    vals = v.values if isinstance(v, WeightFunction) else WeightFunction(v).values
    if vals.size != a.size:
        raise DimensionError(f"weight function has {vals.size} entries, expected {a.size}")
    return float(np.dot(vals, np.abs(a - b)))


def _coupling_parts(a: np.ndarray, b: np.ndarray):
    overlap = np.minimum(a, b)
    mass = float(overlap.sum())
    # snap the degenerate cases so neither branch normalises a zero vector
    if mass <= 0.0:
        return overlap, 1.0
    if np.all(a == overlap) and np.all(b == overlap):
        return overlap, 0.0
    return overlap, min(1.0, 1.0 - mass)


def maximal_coupling_sample(mu, nu, rng: np.random.Generator) -> CouplingDraw:
    """Draw ``(x, y)`` from a maximal coupling of ``mu`` and ``nu``.

    With probability ``1 - d`` (``d`` the sup-convention distance) a common
    value is drawn from the normalised overlap ``min(mu, nu)``; otherwise
    ``x`` and ``y`` are drawn independently from the normalised residuals,
    which have disjoint supports, so ``x != y``.
    """
    a, b = _pair(mu, nu)
    overlap, d = _coupling_parts(a, b)
    if rng.random() < 1.0 - d:
        x = int(rng.choice(a.size, p=overlap / overlap.sum()))
        return CouplingDraw(x, x, True)
    ra, rb = a - overlap, b - overlap
    x = int(rng.choice(a.size, p=ra / ra.sum()))
    y = int(rng.choice(b.size, p=rb / rb.sum()))
    return CouplingDraw(x, y, False)


def maximal_coupling_samples(mu, nu, size: int, rng: np.random.Generator):
    """Vectorised form of :func:`maximal_coupling_sample`.

    Returns arrays ``(x, y, met)`` of length ``size``.
    """
    a, b = _pair(mu, nu)
    overlap, d = _coupling_parts(a, b)
    met = rng.random(size) < 1.0 - d
    x = np.empty(size, dtype=np.int64)
    y = np.empty(size, dtype=np.int64)
    n_met = int(met.sum())
    if n_met:
        common = rng.choice(a.size, size=n_met, p=overlap / overlap.sum())
        x[met] = common
        y[met] = common
    n_apart = size - n_met
    if n_apart:
        ra, rb = a - overlap, b - overlap
        x[~met] = rng.choice(a.size, size=n_apart, p=ra / ra.sum())
        y[~met] = rng.choice(b.size, size=n_apart, p=rb / rb.sum())
    return x, y, met
