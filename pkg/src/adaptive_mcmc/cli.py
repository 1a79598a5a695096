"""Command-line experiment runner.

Usage::

    adaptive-mcmc <subcommand> --config exp.json --out results/ [--seed N] [--threads N]

Each subcommand reads one JSON config, validates every parameter block
before any computation, and writes CSV files whose first line is

    # config_hash=<sha256 hex> seed=<u64> version=<semver>

followed by a header row. Floats are written with ``repr`` (shortest
round-trip form), so reruns with the same config and seed are byte-identical.

Seeds: ``--seed`` overrides the environment variable ``ADAPTIVE_MCMC_SEED``,
which overrides the config's ``seed`` (default 0). Replicates use the
config's explicit ``seeds`` list when no override is given, otherwise
``replicates`` (or ``len(seeds)``) seeds spawned from the base seed. The
hash covers the effective config, resolved seeds included.
"""
from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .adaptation import ThetaSpace
from .chain import run_am, run_toy, running_average, spawn_seeds
from .diagnostics import (DriftSpec, ReturnTimeSpec, diminishing_adaptation_report, drift_check,
                          lln_report, return_time_moments)
from .exceptions import AdaptiveMCMCError, ConfigError
from .finite_exact import (ResolventSpec, exact_D, kernel_power_profile, point_law,
                           poisson_residual_table, propagate, resolvent_table, winkler_counterexample)
from .kernels import RwmParameter
from .measures import WeightFunction, maximal_coupling_samples, tv_distance
from .schedules import schedule_from_config
from .targets import DiscretePmf, GaussianTarget, SmoothedWeibullTarget, quadrature_expectation

SEED_ENV = "ADAPTIVE_MCMC_SEED"
S_SWEEP = (0.01, 0.02, 0.05, 0.1)
U64 = 2**64


class _Block:
    """Typed field access on one config mapping, with unknown-key checks."""

    def __init__(self, data, path: str, allowed: set[str]):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'}: expected a JSON object, got {type(data).__name__}")
        extra = set(data) - allowed
        if extra:
            name = f"{path}.{sorted(extra)[0]}" if path else sorted(extra)[0]
            raise ConfigError(f"{name}: unknown field")
        self.data, self.path = data, path

    def name(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key, default=None, kind=None, required=False):
        if key not in self.data:
            if required:
                raise ConfigError(f"{self.name(key)}: required field missing")
            return default
        v = self.data[key]
        try:
            if kind is int:
                if isinstance(v, bool) or not float(v).is_integer():
                    raise ValueError
                return int(v)
            if kind is float:
                if isinstance(v, bool):
                    raise ValueError
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError
                return v
            if kind is list:
                return [float(u) for u in v]
        except (TypeError, ValueError):
            raise ConfigError(f"{self.name(key)}: invalid value {v!r}") from None
        return v


@contextlib.contextmanager
def _field(name: str):
    try:
        yield
    except ConfigError:
        raise
    except (AdaptiveMCMCError, ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


# --------------------------------------------------------------------------
# shared parameter blocks


def _lattice(cfg: _Block) -> tuple[DiscretePmf, int]:
    K = cfg.get("K", 10, int)
    M = cfg.get("M", 5, int)
    if M < 1:
        raise ConfigError("M: must be >= 1")
    spec = cfg.get("target", "linear")
    with _field("target"):
        if spec == "linear":
            pmf = DiscretePmf.linear(K)
        elif spec == "uniform":
            pmf = DiscretePmf.uniform(K)
        elif isinstance(spec, list):
            pmf = DiscretePmf(np.asarray(spec, dtype=float))
        else:
            raise ConfigError(f"target: expected 'linear', 'uniform' or a weight list, got {spec!r}")
    if isinstance(spec, list) and "K" in cfg.data and pmf.K != K:
        raise ConfigError(f"K: {K} does not match the {pmf.K} target weights")
    return pmf, M


def _schedule(cfg: _Block, key: str, default):
    with _field(cfg.name(key)):
        return schedule_from_config(cfg.get(key, default))


def _indicator(cfg: _Block, key: str, K: int, default: int) -> tuple[int, np.ndarray]:
    x = cfg.get(key, default, int)
    if not 1 <= x <= K:
        raise ConfigError(f"{cfg.name(key)}: lattice point {x} outside 1..{K}")
    f = np.zeros(K)
    f[x - 1] = 1.0
    return x, f


def _continuous_target(spec):
    b = _Block(spec, "target", {"name", "m", "beta", "mean", "cov"})
    name = b.get("name", required=True)
    with _field("target"):
        if name == "weibull":
            return SmoothedWeibullTarget(b.get("m", 0.5, float), b.get("beta", 1.0, float))
        if name == "gaussian":
            mean = np.asarray(b.get("mean", required=True), dtype=float)
            cov = np.asarray(b.get("cov", required=True), dtype=float)
            return GaussianTarget(mean, cov)
    raise ConfigError(f"target.name: unknown target {name!r} (expected 'weibull' or 'gaussian')")


def _theta_space(spec, dim: int) -> ThetaSpace:
    b = _Block(spec or {}, "theta_space", {"half_width", "mu_low", "mu_high", "floor", "cap",
                                            "kappa_l", "kappa_u", "target_accept"})
    kw = {k: b.get(k, kind=float) for k in ("floor", "cap", "kappa_l", "kappa_u", "target_accept")
          if k in b.data}
    with _field("theta_space"):
        if "mu_low" in b.data or "mu_high" in b.data:
            return ThetaSpace(np.asarray(b.get("mu_low", required=True), dtype=float),
                              np.asarray(b.get("mu_high", required=True), dtype=float), **kw)
        return ThetaSpace.box(dim, b.get("half_width", 1e3, float), **kw)


def _rwm_parameter(spec, dim: int, path: str) -> RwmParameter:
    b = _Block(spec or {}, path, {"mu", "Sigma", "c"})
    with _field(path):
        mu = np.asarray(b.get("mu", [0.0] * dim), dtype=float).reshape(dim)
        Sigma = np.asarray(b.get("Sigma", np.eye(dim).tolist()), dtype=float).reshape(dim, dim)
        return RwmParameter(mu, Sigma, b.get("c", 0.0, float))


# --------------------------------------------------------------------------
# subcommands: each ``_prepare_*`` validates and returns a closure that computes
# ``{filename: (columns, rows)}`` given replicate seeds and a thread count.

COMMON = {"subcommand", "seed", "seeds", "replicates"}


def _prepare_toy_exact(raw):
    cfg = _Block(raw, "", COMMON | {"K", "M", "target", "p_schedule", "horizon", "start",
                                    "profile_steps", "kappa", "beta", "alpha"})
    pmf, M = _lattice(cfg)
    sched = _schedule(cfg, "p_schedule", "harmonic")
    horizon = cfg.get("horizon", 5000, int)
    if horizon < 1:
        raise ConfigError("horizon: must be >= 1")
    start = cfg.get("start", [1, 1])
    if not (isinstance(start, list) and len(start) == 2):
        raise ConfigError("start: expected [x, theta]")
    with _field("start"):
        init = point_law(int(start[0]), int(start[1]), pmf.K, M)
    n_max = cfg.get("profile_steps", 200, int)
    kappa = cfg.get("kappa", 1.0, float)
    beta = cfg.get("beta", 0.0, float)
    alpha = cfg.get("alpha", 0.5, float)
    if n_max < 0:
        raise ConfigError("profile_steps: must be >= 0")

    def run(seeds, threads):
        prop = propagate(pmf, M, init, sched, horizon)
        tv = [(n, float(v)) for n, v in enumerate(prop.tv_to_pi)]
        d = [(i, j, exact_D(pmf, i, j)) for i in range(1, M + 1) for j in range(1, M + 1)]
        # V(x) = 1/pi(x) / max keeps V >= 1 and makes the weighted norm non-trivial
        V = WeightFunction(pmf.weights.max() / pmf.weights) if beta else None
        prof = []
        for th in range(1, M + 1):
            pp = kernel_power_profile(pmf, th, V=V, beta=beta, kappa=kappa, n_max=n_max, alpha=alpha)
            prof += [(th, n, float(s), float(r)) for n, (s, r) in enumerate(zip(pp.sup_dist, pp.rate_ratio))]
        return {"tv_to_pi.csv": (("n", "tv_l1"), tv),
                "kernel_distance.csv": (("theta1", "theta2", "D"), d),
                "power_profile.csv": (("theta", "n", "sup_dist", "rate_ratio"), prof)}

    return run


def _prepare_toy_simulate(raw):
    cfg = _Block(raw, "", COMMON | {"K", "M", "target", "p_schedule", "x0", "theta0", "n_steps",
                                    "f_state", "checkpoints"})
    pmf, M = _lattice(cfg)
    sched = _schedule(cfg, "p_schedule", "harmonic")
    x0 = cfg.get("x0", 1, int)
    th0 = cfg.get("theta0", 1, int)
    if not 1 <= x0 <= pmf.K:
        raise ConfigError(f"x0: lattice point {x0} outside 1..{pmf.K}")
    if not 1 <= th0 <= M:
        raise ConfigError(f"theta0: width {th0} outside 1..{M}")
    n = cfg.get("n_steps", 10**6, int)
    if n < 1:
        raise ConfigError("n_steps: must be >= 1")
    xf, _ = _indicator(cfg, "f_state", pmf.K, pmf.K)
    checkpoints = sorted({int(c) for c in cfg.get("checkpoints", [], list)} | {n})
    if checkpoints[0] < 1 or checkpoints[-1] > n:
        raise ConfigError(f"checkpoints: must lie in 1..{n}")
    ref = pmf.prob(xf)

    def f(s):
        return (np.asarray(s) == xf).astype(float)

    def run(seeds, threads):
        trs = _map(lambda s: run_toy(pmf, M, x0, th0, sched, n, s), seeds, threads)
        rows, summary = [], []
        for c in checkpoints:
            rep = lln_report(trs, f, ref, n=c) if len(trs) > 1 else None
            for tr in trs:
                est = float(np.mean(f(tr.states[1:c + 1])))
                rows.append((tr.seed, c, est, ref, abs(est - ref)))
            if rep is not None:
                summary.append((c, rep.pooled_error, rep.mean_error, rep.half_width))
        out = {"lln.csv": (("seed", "n", "estimate", "reference", "abs_error"), rows)}
        if summary:
            out["lln_summary.csv"] = (("n", "pooled_error", "mean_error", "half_width"), summary)
        return out

    return run


def _first(x):
    # first coordinate of a point, a row of points, or a bare scalar
    x = np.asarray(x, dtype=float)
    return x if x.ndim == 0 else x[..., 0]


_FUNCTIONS = {"abs": lambda x: np.abs(_first(x)), "identity": _first,
              "square": lambda x: _first(x) ** 2}


def _prepare_am_run(raw):
    cfg = _Block(raw, "", COMMON | {"target", "theta_space", "x0", "theta0", "n_steps", "return_time",
                                    "window_start", "f", "thin", "checkpoints"})
    target = _continuous_target(cfg.get("target", {"name": "weibull"}))
    dim = target.dim
    space = _theta_space(cfg.get("theta_space"), dim)
    theta0 = _rwm_parameter(cfg.get("theta0"), dim, "theta0")
    if not space.contains(theta0):
        raise ConfigError("theta0: initial parameter lies outside theta_space")
    x0 = np.asarray(cfg.get("x0", [0.0] * dim), dtype=float).reshape(-1)
    if x0.size != dim:
        raise ConfigError(f"x0: expected {dim} coordinates")
    n = cfg.get("n_steps", 10**6, int)
    if n < 1:
        raise ConfigError("n_steps: must be >= 1")
    rt = _Block(cfg.get("return_time", {}), "return_time", {"radius", "eta"})
    with _field("return_time"):
        rspec = ReturnTimeSpec(rt.get("radius", 5.0, float), rt.get("eta", 0.1, float))
    w0 = cfg.get("window_start", 1000, int)
    if not 1 <= w0 <= n // 2:
        raise ConfigError(f"window_start: must lie in 1..{n // 2}")
    fname = cfg.get("f", "abs")
    if fname not in _FUNCTIONS:
        raise ConfigError(f"f: unknown function {fname!r} (expected one of {sorted(_FUNCTIONS)})")
    f = _FUNCTIONS[fname]
    checkpoints = sorted({int(c) for c in cfg.get("checkpoints", [], list)} | {n})
    if checkpoints[0] < 1 or checkpoints[-1] > n:
        raise ConfigError(f"checkpoints: must lie in 1..{n}")

    def run(seeds, threads):
        trs = _map(lambda s: run_am(target, space, x0, theta0, n, s), seeds, threads)
        ref = quadrature_expectation(target, f) if dim == 1 else None
        summary, windows, rtimes, lln = [], [], [], []
        for tr in trs:
            half = n // 2
            last = float(np.mean(tr.accepted[half:]))
            th = tr.final_theta
            summary.append((tr.seed, float(np.mean(tr.accepted)), last, th.c,
                            *[float(v) for v in th.Sigma.ravel()], tr.n_nonfinite))
            ad = diminishing_adaptation_report(tr, start=w0)
            windows += [(tr.seed, lo, hi, float(m), float(q))
                        for (lo, hi), m, q in zip(ad.windows, ad.medians, ad.nonzero_freq)]
            for part, (a, b) in (("all", (0, None)), ("first_half", (0, half)), ("second_half", (half, None))):
                try:
                    r = return_time_moments(tr, rspec, a, b)
                    rtimes.append((tr.seed, part, r.mean_rate, r.cycles))
                except AdaptiveMCMCError:
                    rtimes.append((tr.seed, part, math.nan, 0))
            avg = running_average(tr, f)
            for c in checkpoints:
                err = abs(avg[c - 1] - ref) if ref is not None else math.nan
                lln.append((tr.seed, c, float(avg[c - 1]), math.nan if ref is None else ref, err))
        cols = ("seed", "acceptance", "acceptance_last_half", "c_final",
                *[f"Sigma_{i}{j}" for i in range(dim) for j in range(dim)], "n_nonfinite")
        return {"am_summary.csv": (cols, summary),
                "adaptation.csv": (("seed", "window_lo", "window_hi", "median_n_delta", "nonzero_freq"), windows),
                "return_times.csv": (("seed", "segment", "mean_rate", "cycles"), rtimes),
                "lln.csv": (("seed", "n", "estimate", "reference", "abs_error"), lln)}

    return run


def _prepare_drift_check(raw):
    cfg = _Block(raw, "", COMMON | {"target", "drift", "proposal_vars", "x_grid", "quad_tol", "s_sweep"})
    tspec = cfg.get("target", {"name": "weibull"})
    target = _continuous_target(tspec)
    if not isinstance(target, SmoothedWeibullTarget):
        raise ConfigError("target.name: drift-check needs the 'weibull' target")
    d = _Block(cfg.get("drift", {}), "drift", {"s", "alpha", "c", "b", "C_bound"})
    with _field("drift"):
        spec = DriftSpec(**{k: d.get(k, kind=float) for k in d.data})
    # an explicit drift.s pins the exponent; otherwise sweep the usual range
    sweep = cfg.get("s_sweep", [spec.s] if "s" in d.data else list(S_SWEEP), list)
    for s in sweep:
        if s < 0:
            raise ConfigError(f"s_sweep: s={s!r} must be non-negative")
    vars_ = cfg.get("proposal_vars", [0.25, 1.0, 4.0], list)
    if not vars_ or min(vars_) <= 0:
        raise ConfigError("proposal_vars: must be a non-empty list of positive variances")
    grid = cfg.get("x_grid", [-50.0, -20.0, -10.0, 10.0, 20.0, 50.0], list)
    inside = [x for x in grid if abs(x) <= spec.C_bound]
    if inside:
        raise ConfigError(f"x_grid: point {inside[0]!r} lies inside C (|x| <= {spec.C_bound!r})")
    tol = cfg.get("quad_tol", 1e-8, float)
    if tol <= 0:
        raise ConfigError("quad_tol: must be positive")
    thetas = [RwmParameter(np.zeros(1), np.array([[v]]), 0.0) for v in vars_]

    def run(seeds, threads):
        pts, summ = [], []
        for s in sweep:
            sp = DriftSpec(s=s, alpha=spec.alpha, c=spec.c, b=spec.b, C_bound=spec.C_bound)
            r = drift_check(target, sp, thetas, grid, tol)
            pts += [(s, p.proposal_var, p.x, p.V, p.PV, p.margin, p.c_max, p.quad_error + p.tail_bound)
                    for p in r.points]
            summ.append((s, spec.c, r.worst_margin, r.c_star, int(r.passed), len(r.sign_flips)))
        return {"drift.csv": (("s", "proposal_var", "x", "V", "PV", "margin", "c_max", "error_bound"), pts),
                "drift_summary.csv": (("s", "c", "worst_margin", "c_star", "passed", "sign_flips"), summ)}

    return run


def _prepare_resolvent_check(raw):
    cfg = _Block(raw, "", COMMON | {"K", "M", "target", "p_schedule", "a", "f_state", "l", "tol"})
    pmf, M = _lattice(cfg)
    sched = _schedule(cfg, "p_schedule", "harmonic")
    _, f = _indicator(cfg, "f_state", pmf.K, pmf.K)
    l = cfg.get("l", 0, int)
    tol = cfg.get("tol", 1e-12, float)
    specs = []
    for a in cfg.get("a", [0.5, 0.1, 0.01], list):
        with _field("a"):
            specs.append(ResolventSpec(a, f, l, tol))

    def run(seeds, threads):
        rows, summ = [], []
        for spec in specs:
            g = resolvent_table(spec, pmf, M, sched)
            res = poisson_residual_table(spec, pmf, M, sched)
            rows += [(spec.a, x + 1, th + 1, float(g[x, th]), float(spec.a * g[x, th]), float(res[x, th]))
                     for x in range(pmf.K) for th in range(M)]
            summ.append((spec.a, float(np.abs(spec.a * g).max()), float(res.max())))
        return {"resolvent.csv": (("a", "x", "theta", "g", "a_g", "poisson_residual"), rows),
                "resolvent_summary.csv": (("a", "max_abs_a_g", "max_poisson_residual"), summ)}

    return run


def _prepare_winkler(raw):
    cfg = _Block(raw, "", COMMON | {"theta_schedule", "horizon", "f", "initial"})
    sched = _schedule(cfg, "theta_schedule", {"kind": "power", "power": 2.0, "offset": 2.0})
    N = cfg.get("horizon", 10**4, int)
    if N < 1:
        raise ConfigError("horizon: must be >= 1")
    f = cfg.get("f", [0.0, 1.0], list)
    init = cfg.get("initial", [1.0, 0.0], list)
    if len(f) != 2:
        raise ConfigError("f: expected two values")
    if len(init) != 2 or min(init) < 0 or abs(sum(init) - 1.0) > 1e-12:
        raise ConfigError("initial: expected a probability vector of length 2")
    with _field("theta_schedule"):
        th = np.asarray(sched(np.arange(N)), dtype=float)
        if np.any((th <= 0) | (th >= 1)):
            raise ConfigError("theta_schedule: values must lie strictly in (0, 1)")

    def run(seeds, threads):
        r = winkler_counterexample(sched, N, f, init)
        rows = [(n, float(r.tv_to_pi[n]), float(r.second_moment[n]), float(r.marginals[n, 1]))
                for n in range(N + 1)]
        return {"winkler.csv": (("n", "tv_l1", "second_moment", "p_x1"), rows)}

    return run


def _prepare_coupling_test(raw):
    cfg = _Block(raw, "", COMMON | {"pairs", "draws"})
    pairs = cfg.get("pairs", [{"mu": [0.5, 0.5], "nu": [0.5, 0.5]},
                              {"mu": [0.5, 0.5], "nu": [1.0, 0.0]},
                              {"mu": [1.0, 0.0], "nu": [0.0, 1.0]}])
    if not isinstance(pairs, list) or not pairs:
        raise ConfigError("pairs: expected a non-empty list")
    parsed = []
    for i, p in enumerate(pairs):
        b = _Block(p, f"pairs[{i}]", {"mu", "nu"})
        mu, nu = b.get("mu", required=True, kind=list), b.get("nu", required=True, kind=list)
        with _field(f"pairs[{i}]"):
            d = tv_distance(mu, nu).sup
        parsed.append((np.array(mu), np.array(nu), d))
    draws = cfg.get("draws", 10**6, int)
    if draws < 1:
        raise ConfigError("draws: must be >= 1")

    def run(seeds, threads):
        rows = []
        for i, (mu, nu, d) in enumerate(parsed):
            for s in seeds:
                x, y, met = maximal_coupling_samples(mu, nu, draws, np.random.Generator(np.random.PCG64(s)))
                freq = float(met.mean())
                sd = math.sqrt(d * (1 - d) / draws)
                rows.append((i, s, d, freq, 1.0 - d, sd, _chi2_p(x, mu), _chi2_p(y, nu)))
        return {"coupling.csv": (("pair", "seed", "d", "meet_freq", "expected", "sd",
                                  "chi2_p_x", "chi2_p_y"), rows)}

    return run


def _chi2_p(samples: np.ndarray, p: np.ndarray) -> float:
    """Chi-square goodness-of-fit p-value over the support of ``p``."""
    counts = np.bincount(samples, minlength=p.size)
    supp = p > 0
    if np.any(counts[~supp]):
        return 0.0
    if supp.sum() < 2:
        return 1.0
    return float(stats.chisquare(counts[supp], p[supp] * samples.size).pvalue)


SUBCOMMANDS = {
    "toy-exact": _prepare_toy_exact,
    "toy-simulate": _prepare_toy_simulate,
    "am-run": _prepare_am_run,
    "drift-check": _prepare_drift_check,
    "resolvent-check": _prepare_resolvent_check,
    "winkler": _prepare_winkler,
    "coupling-test": _prepare_coupling_test,
}


# --------------------------------------------------------------------------
# plumbing


def _map(fn, seeds, threads):
    if threads <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, seeds))


def _u64(v, name: str) -> int:
    try:
        s = int(v)
        if isinstance(v, float) and not v.is_integer():
            raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: invalid seed {v!r}") from None
    if not 0 <= s < U64:
        raise ConfigError(f"{name}: seed must be an unsigned 64-bit integer")
    return s


def resolve_seeds(config: dict, cli_seed=None, env=None) -> tuple[int, list[int], str | None]:
    """Base seed, replicate seeds and the override source (``None`` if none)."""
    env = os.environ if env is None else env
    source = None
    if cli_seed is not None:
        base, source = _u64(cli_seed, "--seed"), "cli"
    elif env.get(SEED_ENV) not in (None, ""):
        base, source = _u64(env[SEED_ENV], SEED_ENV), "env"
    else:
        base = _u64(config.get("seed", 0), "seed")
    explicit = config.get("seeds")
    if explicit is not None:
        if not isinstance(explicit, list) or not explicit:
            raise ConfigError("seeds: expected a non-empty list")
        explicit = [_u64(s, "seeds") for s in explicit]
    n = _u64(config.get("replicates", len(explicit) if explicit else 1), "replicates")
    if n < 1:
        raise ConfigError("replicates: must be >= 1")
    if explicit and "replicates" in config and n != len(explicit):
        raise ConfigError("replicates: does not match the length of seeds")
    seeds = explicit if explicit and source is None else spawn_seeds(base, n)
    return base, seeds, source


def config_hash(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header_line: str, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header_line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run_experiment(subcommand: str, config: dict, out: Path, cli_seed=None, threads: int = 1,
                   env=None) -> list[Path]:
    """Validate ``config``, run ``subcommand`` and write its CSV files to ``out``."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"subcommand: unknown {subcommand!r}")
    if not isinstance(config, dict):
        raise ConfigError("config: expected a JSON object")
    named = config.get("subcommand")
    if named is not None and named != subcommand:
        raise ConfigError(f"subcommand: config is for {named!r}, not {subcommand!r}")
    if threads < 1:
        raise ConfigError("--threads: must be >= 1")
    base, seeds, source = resolve_seeds(config, cli_seed, env)
    job = SUBCOMMANDS[subcommand](config)

    effective = {k: v for k, v in config.items() if k not in ("seed", "seeds", "replicates")}
    effective.update(subcommand=subcommand, seed=base, seeds=seeds)
    if source:
        effective["seed_override"] = source
    header = f"# config_hash={config_hash(effective)} seed={base} version={__version__}"

    tables = job(seeds, threads)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (cols, rows) in tables.items():
        p = out / name
        write_csv(p, header, cols, rows)
        paths.append(p)
    return paths


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptive-mcmc", description=__doc__.split("\n\n")[0])
    ap.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    ap.add_argument("--config", type=Path, help="JSON experiment config (default: all defaults)")
    ap.add_argument("--out", type=Path, required=True, help="output directory")
    ap.add_argument("--seed", help="base seed override (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, default=1, help="replicates run concurrently")
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            config = {}
        else:
            try:
                config = json.loads(args.config.read_text())
            except OSError as exc:
                raise ConfigError(f"--config: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--config: invalid JSON ({exc})") from None
        paths = run_experiment(args.subcommand, config, args.out, args.seed, args.threads)
    except ConfigError as exc:
        print(f"adaptive-mcmc: invalid config: {exc}", file=sys.stderr)
        return 2
    except AdaptiveMCMCError as exc:
        print(f"adaptive-mcmc: {args.subcommand} failed: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
