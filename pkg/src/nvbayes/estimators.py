"""Readout estimators.

* photon summation (PS): invert the summed linear model;
* grid Bayes: sequential posterior over a uniform rho grid in log space,
  reported as the posterior mean with an equal-tail credible interval;
* closed-form MAP approximations for the flat, Jeffreys and Gaussian priors.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import norm

from .bounds import fisher_information, ps_variance
from .dynamics import ReadoutSchedule
from .errors import (
    DegeneratePriorError,
    DegenerateScheduleError,
    InvalidParameterError,
    PosteriorUnderflowError,
    SingularBinError,
)
from .photon import FluorescenceTrace, log_likelihood
from .priors import Prior, PriorKind

DEFAULT_GRID_POINTS = 400
DEFAULT_LEVEL = 0.9
# stands in for log(0) so that 0 * log(0) stays 0 inside matrix products
_LOG_ZERO = -1e300


@dataclass(frozen=True)
class EstimateResult:
    rho_e: float
    ci_low: float
    ci_high: float
    n_updates: int
    method: str = ""
    seed: object = None
    in_range: bool = True

    COLUMNS = ("rho_e", "ci_low", "ci_high", "n_updates", "method", "seed")

    def row(self):
        return [self.rho_e, self.ci_low, self.ci_high, self.n_updates, self.method,
                "" if self.seed is None else self.seed]


# ---------------------------------------------------------------- photon summation


def ps_estimate_batch(counts, schedule: ReadoutSchedule) -> np.ndarray:
    """Unclamped PS estimates for a ``(..., N)`` stack of count traces."""
    total_a = float(np.sum(schedule.A))
    if total_a == 0:
        raise DegenerateScheduleError("sum of A_n is zero; photon summation is undefined")
    counts = np.asarray(counts, dtype=float)
    return (counts.sum(axis=-1) - np.sum(schedule.B)) / total_a


def ps_estimate(trace: FluorescenceTrace, level: float = DEFAULT_LEVEL) -> EstimateResult:
    """Photon-summation estimate (sum f - sum B) / sum A.

    The raw value is kept even outside [0, 1] (``in_range`` flags it). The
    interval is the Gaussian one implied by the PS variance at the clipped
    estimate, clipped to [0, 1].
    """
    rho = float(ps_estimate_batch(trace.counts, trace.schedule))
    sigma = np.sqrt(ps_variance(trace.schedule, float(np.clip(rho, 0.0, 1.0))))
    z = norm.ppf(0.5 + level / 2.0)
    lo = float(np.clip(rho - z * sigma, 0.0, 1.0))
    hi = float(np.clip(rho + z * sigma, 0.0, 1.0))
    return EstimateResult(rho, lo, hi, len(trace), "PS", trace.seed, 0.0 <= rho <= 1.0)


# ---------------------------------------------------------------- grid posterior


def rho_grid(k: int) -> np.ndarray:
    if k < 2:
        raise InvalidParameterError(f"grid needs at least 2 points, got {k}")
    return np.linspace(0.0, 1.0, k)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.zeros_like(grid)
    d = np.diff(grid)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def log_prior_weights(prior: Prior, grid: np.ndarray, schedule: ReadoutSchedule = None) -> np.ndarray:
    """Unnormalized log prior density on ``grid``."""
    if prior.kind is PriorKind.FLAT:
        return np.zeros_like(grid)
    if prior.kind is PriorKind.CONJUGATE:
        if np.isinf(prior.sigma0_sq):
            return np.zeros_like(grid)
        return -((grid - prior.rho0) ** 2) / (2.0 * prior.sigma0_sq)
    if schedule is None:
        raise InvalidParameterError("Jeffreys prior needs a schedule")
    # the mean is affine and >= 0 on [0, 1]; it can only vanish at an endpoint,
    # where sqrt(I) diverges integrably, so evaluate half a step inside
    rho = grid.copy()
    h = grid[1] - grid[0]
    for idx, inward in ((0, h / 2), (-1, -h / 2)):
        try:
            fisher_information(schedule, rho[idx])
        except SingularBinError:
            rho[idx] += inward
    info = fisher_information(schedule, rho)
    if np.all(info <= 0):
        raise DegeneratePriorError("Fisher information vanishes everywhere; Jeffreys prior undefined")
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(info)


def log_likelihood_matrix(counts, schedule: ReadoutSchedule, grid: np.ndarray) -> np.ndarray:
    """sum_n ln P(f_n | rho_k) for a ``(..., N)`` count stack, shape ``(..., K)``."""
    counts = np.asarray(counts, dtype=float)
    means = np.outer(schedule.A, grid) + schedule.B[:, None]  # (N, K)
    with np.errstate(divide="ignore"):
        log_means = np.log(means)
    log_means[means == 0] = _LOG_ZERO
    with np.errstate(over="ignore", invalid="ignore"):
        ll = counts @ log_means
    ll = ll - means.sum(axis=0) - gammaln(counts + 1.0).sum(axis=-1, keepdims=True)
    ll[ll < 0.5 * _LOG_ZERO] = -np.inf
    return ll


def normalize_log_weights(log_weights: np.ndarray, quad_weights: np.ndarray):
    """Return ``(normalized, log_norm)`` with sum exp(lw) * w = 1 along the last axis."""
    with np.errstate(divide="ignore"):
        log_w = np.log(quad_weights)
    log_norm = logsumexp(log_weights + log_w, axis=-1, keepdims=True)
    if np.any(~np.isfinite(log_norm)):
        raise PosteriorUnderflowError("every posterior weight underflowed to zero")
    return log_weights - log_norm, np.squeeze(log_norm, -1)


def posterior_means(grid, log_weights, quad_weights=None) -> np.ndarray:
    if quad_weights is None:
        quad_weights = trapezoid_weights(grid)
    return np.sum(grid * np.exp(log_weights) * quad_weights, axis=-1)


def _cdf(grid, density):
    h = np.diff(grid)
    steps = (density[..., 1:] + density[..., :-1]) / 2 * h
    cdf = np.concatenate([np.zeros(density.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1)
    return cdf / cdf[..., -1:]


def _quantile(grid, cdf, q):
    idx = int(np.searchsorted(cdf, q, side="left"))
    if idx <= 0:
        return float(grid[0])
    if idx >= len(grid):
        return float(grid[-1])
    lo, hi = cdf[idx - 1], cdf[idx]
    frac = 0.0 if hi == lo else (q - lo) / (hi - lo)
    return float(grid[idx - 1] + frac * (grid[idx] - grid[idx - 1]))


def credible_intervals(grid, log_weights, level=DEFAULT_LEVEL) -> np.ndarray:
    """Equal-tail intervals for a ``(..., K)`` stack; returns ``(..., 2)``."""
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level={level!r} must be in (0, 1)")
    lw = np.asarray(log_weights)
    cdf = _cdf(grid, np.exp(lw))
    flat = cdf.reshape(-1, cdf.shape[-1])
    out = np.array(
        [[_quantile(grid, c, (1 - level) / 2), _quantile(grid, c, (1 + level) / 2)] for c in flat]
    )
    return out.reshape(lw.shape[:-1] + (2,))


@dataclass
class Posterior:
    """Discretized posterior density over rho in [0, 1].

    ``log_weights`` are log density values at the grid points; after
    normalization sum(exp(log_weights) * quad_weights) == 1.
    ``log_evidence`` accumulates the log normalization constants of all
    updates, i.e. ln P(f_1..f_n) up to quadrature error.
    """

    grid: np.ndarray
    log_weights: np.ndarray
    schedule: ReadoutSchedule = None
    normalized: bool = False
    n_updates: int = 0
    log_evidence: float = 0.0
    quad_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.log_weights = np.asarray(self.log_weights, dtype=float)
        if len(self.grid) < 2 or np.any(np.diff(self.grid) <= 0):
            raise InvalidParameterError("grid needs >= 2 strictly increasing points")
        if self.log_weights.shape != self.grid.shape:
            raise InvalidParameterError("log_weights must match grid")
        if self.quad_weights is None:
            self.quad_weights = trapezoid_weights(self.grid)

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def normalize(self) -> "Posterior":
        lw, log_norm = normalize_log_weights(self.log_weights, self.quad_weights)
        return replace(self, log_weights=lw, normalized=True, log_evidence=self.log_evidence + float(log_norm))


def posterior_init(prior: Prior, k: int = DEFAULT_GRID_POINTS, schedule: ReadoutSchedule = None) -> Posterior:
    grid = rho_grid(k)
    post = Posterior(grid, log_prior_weights(prior, grid, schedule), schedule=schedule)
    post = post.normalize()
    return replace(post, log_evidence=0.0)


def posterior_update(post: Posterior, f, n: int) -> Posterior:
    """Multiply in the Poisson likelihood of count ``f`` in bin ``n`` and renormalize."""
    sched = post.schedule
    if sched is None:
        raise InvalidParameterError("posterior has no schedule attached")
    if not 0 <= n < len(sched):
        raise IndexError(f"bin index {n} out of range for {len(sched)} bins")
    means = sched.A[n] * post.grid + sched.B[n]
    lw = post.log_weights + log_likelihood(f, means)
    if np.all(np.isneginf(lw)):
        raise PosteriorUnderflowError(f"count {f} in bin {n} is impossible at every grid point")
    updated = replace(post, log_weights=lw, n_updates=post.n_updates + 1)
    return updated.normalize()


def posterior_update_batch(post: Posterior, counts, indices=None) -> Posterior:
    """Single-pass update with the summed log-likelihood of several bins."""
    sched = post.schedule
    idx = np.arange(len(counts)) if indices is None else np.asarray(indices)
    sub = ReadoutSchedule(sched.times[idx], sched.dt, sched.A[idx], sched.B[idx]) if indices is not None \
        else sched.truncate(len(counts))
    lw = post.log_weights + log_likelihood_matrix(counts, sub, post.grid)
    if np.all(np.isneginf(lw)):
        raise PosteriorUnderflowError("trace is impossible at every grid point")
    return replace(post, log_weights=lw, n_updates=post.n_updates + len(idx)).normalize()


def posterior_estimate(post: Posterior) -> float:
    """Posterior mean (quadrature expectation)."""
    return float(np.clip(posterior_means(post.grid, post.log_weights, post.quad_weights), 0.0, 1.0))


def confidence_interval(post: Posterior, level: float = DEFAULT_LEVEL):
    lo, hi = credible_intervals(post.grid, post.log_weights, level)
    return float(lo), float(hi)


def iter_updates(post: Posterior, trace: FluorescenceTrace):
    """Yield the posterior after each bin of ``trace`` (the real-time protocol)."""
    for n, f in enumerate(trace.counts):
        post = posterior_update(post, f, n)
        yield post


def bayes_estimate(
    trace: FluorescenceTrace,
    prior: Prior = Prior(),
    k: int = DEFAULT_GRID_POINTS,
    level: float = DEFAULT_LEVEL,
    sequential: bool = False,
) -> EstimateResult:
    """Grid-posterior estimate of rho from a full trace.

    ``sequential=True`` performs one update per bin; the default folds all
    bins into one update, which gives the same posterior.
    """
    post = posterior_init(prior, k, trace.schedule)
    if sequential:
        for post in iter_updates(post, trace):
            pass
    else:
        post = posterior_update_batch(post, trace.counts)
    lo, hi = confidence_interval(post, level)
    name = "Bayes" + prior.kind.value.capitalize()
    return EstimateResult(posterior_estimate(post), lo, hi, post.n_updates, name, trace.seed)


def grid_posterior_batch(counts, schedule: ReadoutSchedule, prior=Prior(), k: int = DEFAULT_GRID_POINTS):
    """Normalized log posteriors for a ``(T, N)`` stack of traces.

    ``prior`` is a :class:`Prior` or an explicit ``(T, K)``/``(K,)`` array of
    log prior weights. Returns ``(grid, log_weights)``.
    """
    grid = rho_grid(k)
    if isinstance(prior, Prior):
        log_prior = log_prior_weights(prior, grid, schedule)
    else:
        log_prior = np.asarray(prior, dtype=float)
    lw = log_prior + log_likelihood_matrix(counts, schedule, grid)
    lw, _ = normalize_log_weights(lw, trapezoid_weights(grid))
    return grid, lw


# ---------------------------------------------------------------- closed forms


def _closed_form(counts, schedule, prior: Prior, rho_lin: float) -> float:
    A, B = schedule.A, schedule.B
    counts = np.asarray(counts, dtype=float)
    denom = A * rho_lin + B
    informative = A != 0
    if np.any(denom[informative] == 0):
        raise SingularBinError(f"A_n rho_lin + B_n vanishes at rho_lin={rho_lin!r}")
    A, B, counts, denom = A[informative], B[informative], counts[informative], denom[informative]
    w = A / denom
    resid = counts - B
    if prior.kind is PriorKind.JEFFREYS:
        resid = resid - 0.5
    num = np.sum(w * resid)
    den = np.sum(w * A)
    if prior.kind is PriorKind.CONJUGATE and not np.isinf(prior.sigma0_sq):
        num += prior.rho0 / prior.sigma0_sq
        den += 1.0 / prior.sigma0_sq
    if den == 0:
        raise DegenerateScheduleError("no informative bins")
    return float(num / den)


def closed_form_estimate(trace: FluorescenceTrace, prior: Prior = Prior(), rho_lin: float = None) -> float:
    """Linearized MAP estimate for the flat, Jeffreys or Gaussian prior.

    The weights A_n / (A_n rho + B_n) are evaluated at ``rho_lin``. When it is
    omitted, one fixed-point step is taken: the flat-prior estimate at
    rho_lin = 0.5, clipped to [0, 1], becomes the linearization point.
    """
    if rho_lin is None:
        start = _closed_form(trace.counts, trace.schedule, Prior.flat(), 0.5)
        rho_lin = float(np.clip(start, 0.0, 1.0))
    elif not 0.0 <= rho_lin <= 1.0:
        raise InvalidParameterError(f"rho_lin={rho_lin!r} outside [0, 1]")
    return _closed_form(trace.counts, trace.schedule, prior, rho_lin)
