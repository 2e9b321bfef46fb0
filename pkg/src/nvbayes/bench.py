"""Monte Carlo MSE sweeps and the paired SNR experiment.

Every trial draws its counts from its own PCG64 stream seeded with
``(seed, point, trial)``. Sweeps whose points are nested views of one
physical readout (readout time, bin width, grid size) reuse the same
stream for every point (common random numbers), so adjacent points differ
only by the swept quantity. All methods see the same traces.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .bounds import fisher_information
from .csvio import write_csv
from .dynamics import RateParameters, ReadoutSchedule, fluorescence_coefficients, readout_schedule, uniform_times
from .errors import InvalidParameterError, NVBayesError
from .estimators import (
    DEFAULT_GRID_POINTS,
    grid_posterior_batch,
    log_prior_weights,
    posterior_means,
    ps_estimate_batch,
    rho_grid,
)
from .priors import Prior, PriorKind
from .rabi import SpinParameters, rho_for_mw_time

SWEEPS = ("dt", "grid_points", "readout_time", "pumping_rate")
METHODS = ("PS", "BayesFlat", "BayesJeffreys", "BayesConjugate")
CSV_COLUMNS = ("sweep_var", "value", "method", "mse", "stderr", "trials", "seed")


@dataclass
class SweepConfig:
    swept_variable: str
    values: Sequence[float]
    params: RateParameters
    dt: float = 1.0
    readout_time: float = 600.0
    trials_per_point: int = 100
    true_rho: Union[float, Sequence[float]] = 0.5
    methods: Sequence[str] = ("PS", "BayesFlat")
    seed: int = 0
    grid_points: int = DEFAULT_GRID_POINTS
    conjugate_multiplier: float = 4.0
    noiseless: bool = False
    # readout time for the pumping-rate sweep; None picks the PS optimum
    pumping_readout_time: float = None

    def __post_init__(self):
        if self.swept_variable not in SWEEPS:
            raise InvalidParameterError(f"unknown sweep {self.swept_variable!r}; choose from {SWEEPS}")
        if self.trials_per_point < 1:
            raise InvalidParameterError("trials_per_point must be >= 1")
        if len(self.values) == 0:
            raise InvalidParameterError("sweep values must be nonempty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise InvalidParameterError(f"unknown methods {sorted(unknown)}")
        rhos = np.atleast_1d(np.asarray(self.true_rho, dtype=float))
        if np.any((rhos < 0) | (rhos > 1)):
            raise InvalidParameterError("true_rho must lie in [0, 1]")


@dataclass
class SweepRow:
    value: float
    method: str
    mse: float
    stderr: float
    trials: int
    failures: int = 0


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list
    summary: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def series(self, method):
        rows = [r for r in self.rows if r.method == method]
        return (np.array([r.value for r in rows]), np.array([r.mse for r in rows]),
                np.array([r.stderr for r in rows]))

    def to_csv(self, path=None, header=None):
        cfg = self.config
        rows = [(cfg.swept_variable, r.value, r.method, r.mse, r.stderr, r.trials, cfg.seed) for r in self.rows]
        footer = [f"summary {k}={v}" for k, v in self.summary.items()]
        return write_csv(path, CSV_COLUMNS, rows, header=header, footer=footer)


def _rho_per_trial(true_rho, trials):
    rhos = np.atleast_1d(np.asarray(true_rho, dtype=float))
    return rhos[np.arange(trials) % len(rhos)]


def _draw(schedule: ReadoutSchedule, rhos, seed, point, noiseless):
    means = schedule.A * rhos[:, None] + schedule.B
    if noiseless:
        return np.round(means)
    counts = np.empty(means.shape, dtype=np.int64)
    for t in range(len(rhos)):
        counts[t] = np.random.default_rng([seed, point, t]).poisson(means[t])
    return counts


def _bayes_prior(method, schedule, rhos, grid, multiplier):
    kind = {"BayesFlat": PriorKind.FLAT, "BayesJeffreys": PriorKind.JEFFREYS,
            "BayesConjugate": PriorKind.CONJUGATE}[method]
    if kind is not PriorKind.CONJUGATE:
        return Prior(kind)
    # Gaussian prior centred on each trial's true rho, variance multiplier * CRLB
    uniq = np.unique(rhos)
    table = {}
    for rho in uniq:
        sigma0_sq = multiplier / fisher_information(schedule, rho)
        table[rho] = log_prior_weights(Prior.conjugate(rho, sigma0_sq), grid)
    return np.array([table[r] for r in rhos])


def _estimate(method, counts, schedule, rhos, k, multiplier):
    """Estimates for every trial; NaN marks a failed trial."""
    if method == "PS":
        return ps_estimate_batch(counts, schedule)
    grid = rho_grid(k)
    prior = _bayes_prior(method, schedule, rhos, grid, multiplier)
    try:
        grid, lw = grid_posterior_batch(counts, schedule, prior, k)
        return posterior_means(grid, lw)
    except NVBayesError:
        out = np.full(len(counts), np.nan)
        for t in range(len(counts)):
            p = prior if isinstance(prior, Prior) else prior[t]
            try:
                g, lw = grid_posterior_batch(counts[t:t + 1], schedule, p, k)
                out[t] = posterior_means(g, lw)[0]
            except NVBayesError:
                pass
        return out


def _row(value, method, est, rhos):
    ok = np.isfinite(est)
    sq = (est[ok] - rhos[ok]) ** 2
    n = int(ok.sum())
    mse = float(sq.mean()) if n else float("nan")
    se = float(sq.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return SweepRow(float(value), method, mse, se, n, int((~ok).sum()))


def ps_optimal_readout_time(params: RateParameters, dt: float, rho: float, max_time: float) -> float:
    """Readout time minimizing the analytic PS variance over prefixes of the window."""
    sched = readout_schedule(params, max_time, dt)
    cum_a = np.cumsum(sched.A)
    cum_mean = np.cumsum(sched.A * rho + sched.B)
    with np.errstate(divide="ignore", invalid="ignore"):
        var = np.where(cum_a > 0, cum_mean / cum_a**2, np.inf)
    return float(sched.times[int(np.argmin(var))])


def run_mse_sweep(config: SweepConfig) -> SweepResult:
    """MSE <(rho_e - rho)^2> with standard error for each swept value and method."""
    cfg = config
    T = cfg.trials_per_point
    rhos = _rho_per_trial(cfg.true_rho, T)
    k, mult = cfg.grid_points, cfg.conjugate_multiplier
    rows, timings = [], {}
    var = cfg.swept_variable

    def record(value, method, counts, schedule, k_=k):
        start = time.perf_counter()
        est = _estimate(method, counts, schedule, rhos, k_, mult)
        timings[(value, method)] = time.perf_counter() - start
        rows.append(_row(value, method, est, rhos))

    if var == "readout_time":
        full = readout_schedule(cfg.params, max(cfg.values), cfg.dt)
        counts = _draw(full, rhos, cfg.seed, 0, cfg.noiseless)
        for value in cfg.values:
            n = len(uniform_times(value, cfg.dt))
            for method in cfg.methods:
                record(value, method, counts[:, :n], full.truncate(n))
    elif var == "grid_points":
        sched = readout_schedule(cfg.params, cfg.readout_time, cfg.dt)
        counts = _draw(sched, rhos, cfg.seed, 0, cfg.noiseless)
        for value in cfg.values:
            for method in cfg.methods:
                record(value, method, counts, sched, int(value))
    elif var == "dt":
        # photons are recorded at the base resolution cfg.dt; Bayesian methods see
        # them re-binned to the coarser value, PS always uses the base resolution
        fine = readout_schedule(cfg.params, cfg.readout_time, cfg.dt)
        counts = _draw(fine, rhos, cfg.seed, 0, cfg.noiseless)
        for value in cfg.values:
            m = int(round(value / cfg.dt))
            if m < 1 or abs(m * cfg.dt - value) > 1e-9 * value:
                raise InvalidParameterError(f"dt={value} is not a multiple of the base dt {cfg.dt}")
            nb = len(fine) // m
            if nb < 1:
                raise InvalidParameterError(f"dt={value} exceeds the readout window")
            coarse_counts = counts[:, :nb * m].reshape(T, nb, m).sum(axis=-1)
            coarse = fluorescence_coefficients(cfg.params, value * np.arange(1, nb + 1), value)
            for method in cfg.methods:
                if method == "PS":
                    record(value, method, counts, fine)
                else:
                    record(value, method, coarse_counts, coarse)
    else:  # pumping_rate
        readout = cfg.pumping_readout_time
        if readout is None:
            rho_ref = float(np.mean(np.atleast_1d(cfg.true_rho)))
            readout = ps_optimal_readout_time(cfg.params, cfg.dt, rho_ref, max(5000.0, cfg.readout_time))
        for point, value in enumerate(cfg.values):
            sched = readout_schedule(cfg.params.replace(L=float(value)), readout, cfg.dt)
            counts = _draw(sched, rhos, cfg.seed, point, cfg.noiseless)
            for method in cfg.methods:
                record(value, method, counts, sched)

    result = SweepResult(cfg, rows, timings=timings)
    result.summary = summarize(result)
    if var == "pumping_rate":
        result.summary["readout_time"] = readout
    return result


def interior_minimum(values, mse):
    """Index of the minimum if it is not at either end of the sweep, else None."""
    i = int(np.nanargmin(mse))
    return i if 0 < i < len(mse) - 1 else None


def non_increasing(mse, stderr, n_sigma=2.0) -> bool:
    """Each point is at most ``n_sigma`` combined standard errors above its predecessor."""
    mse, stderr = np.asarray(mse), np.asarray(stderr)
    slack = n_sigma * np.sqrt(stderr[1:] ** 2 + stderr[:-1] ** 2)
    return bool(np.all(mse[1:] <= mse[:-1] + slack))


def dt_crossover(dts, bayes_mse, ps_mse):
    """Smallest bin width at which the Bayesian MSE exceeds the PS MSE (None if never)."""
    for value, b, p in zip(dts, bayes_mse, ps_mse):
        if b > p:
            return float(value)
    return None


def summarize(result: SweepResult) -> dict:
    summary = {}
    var = result.config.swept_variable
    methods = list(dict.fromkeys(r.method for r in result.rows))
    if var == "readout_time":
        for method in methods:
            values, mse, se = result.series(method)
            i = interior_minimum(values, mse)
            summary[f"{method}.interior_minimum"] = "none" if i is None else float(values[i])
            summary[f"{method}.non_increasing"] = non_increasing(mse, se)
    elif var == "dt" and "PS" in methods:
        _, ps_mse, _ = result.series("PS")
        for method in methods:
            if method != "PS":
                values, mse, _ = result.series(method)
                cross = dt_crossover(values, mse, ps_mse)
                summary[f"{method}.crossover_dt"] = "none" if cross is None else cross
    return summary


# ---------------------------------------------------------------- SNR


@dataclass(frozen=True)
class SNRResult:
    snr_ps: float
    snr_bayes: float
    rho_pi: float
    rho_ref: float


def _snr(a, b):
    noise = np.sqrt((np.var(a, ddof=1) + np.var(b, ddof=1)) / 2.0)
    signal = abs(np.mean(a) - np.mean(b))
    if noise == 0:
        return float("inf") if signal > 0 else float("nan")
    return float(signal / noise)


def run_snr_experiment(schedule: ReadoutSchedule, spin_params: SpinParameters, trials: int, seed: int,
                       multiplier: float = 4.0, k: int = DEFAULT_GRID_POINTS, noiseless: bool = False,
                       rho_pi: float = None, rho_ref: float = None) -> SNRResult:
    """Paired SNR of PS and conjugate-prior Bayes readout.

    The first half of the trials follow a pi pulse, the second half no pulse.
    SNR is the difference of the two group means over the pooled standard
    deviation; both methods process identical traces. Zero noise gives
    ``inf``.
    """
    if trials < 4 or trials % 2:
        raise InvalidParameterError("trials must be even and >= 4")
    if rho_pi is None:
        rho_pi = rho_for_mw_time(spin_params, spin_params.pi_time)
    if rho_ref is None:
        rho_ref = rho_for_mw_time(spin_params, 0.0)
    half = trials // 2
    rhos = np.concatenate([np.full(half, rho_pi), np.full(half, rho_ref)])
    if noiseless:
        counts = schedule.A * rhos[:, None] + schedule.B
    else:
        counts = _draw(schedule, rhos, seed, 0, False)
    ps = ps_estimate_batch(counts, schedule)
    bayes = _estimate("BayesConjugate", counts, schedule, rhos, k, multiplier)
    return SNRResult(_snr(ps[:half], ps[half:]), _snr(bayes[:half], bayes[half:]), float(rho_pi), float(rho_ref))
