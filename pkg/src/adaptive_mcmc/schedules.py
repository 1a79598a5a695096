"""Deterministic step-indexed sequences: adaptation probabilities ``p_n`` for
the lattice chain and kernel parameters ``theta_n`` for the two-state
counterexample.

A schedule maps an integer ``n`` to a float and also evaluates vectorised
over ``numpy`` index arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError


@dataclass(frozen=True)
class PowerSchedule:
    """``scale / (n + offset) ** power``, clipped to ``[lower, upper]``.

    ``PowerSchedule()`` is the harmonic sequence ``1/n``.
    """

    scale: float = 1.0
    power: float = 1.0
    offset: float = 0.0
    lower: float = 0.0
    upper: float = 1.0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore"):
            v = self.scale / (n + self.offset) ** self.power
        v = np.clip(v, self.lower, self.upper)
        return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class ConstantSchedule:
    value: float = 0.0

    def __call__(self, n):
        n = np.asarray(n)
        return float(self.value) if n.ndim == 0 else np.full(n.shape, float(self.value))


def harmonic() -> PowerSchedule:
    return PowerSchedule()


def schedule_from_config(spec) -> PowerSchedule | ConstantSchedule:
    """Build a schedule from a config entry.

    Accepts a number (constant), ``"harmonic"``, or a mapping with
    ``kind`` in ``{"constant", "harmonic", "power"}`` plus that kind's fields.
    """
    if isinstance(spec, (int, float)):
        return ConstantSchedule(float(spec))
    if spec == "harmonic":
        return harmonic()
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"schedule: expected a number, 'harmonic' or a mapping with 'kind', got {spec!r}")
    kind = spec["kind"]
    fields = {k: float(v) for k, v in spec.items() if k != "kind"}
    try:
        if kind == "constant":
            return ConstantSchedule(**fields)
        if kind == "harmonic":
            return PowerSchedule(**fields)
        if kind == "power":
            return PowerSchedule(**fields)
    except TypeError as exc:
        raise ConfigError(f"schedule: {exc}") from None
    raise ConfigError(f"schedule.kind: unknown kind {kind!r}")
