"""Poisson count model: likelihood and noisy trace simulation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from .csvio import read_csv, write_csv
from .dynamics import ReadoutSchedule
from .errors import InvalidParameterError


def log_likelihood(f, mean):
    """ln P(f | mean) for a Poisson count, elementwise.

    At ``mean == 0`` the result is 0 for ``f == 0`` and ``-inf`` otherwise.
    """
    f = np.asarray(f, dtype=float)
    mean = np.asarray(mean, dtype=float)
    with np.errstate(divide="ignore"):
        out = xlogy(f, mean) - mean - gammaln(f + 1.0)
    return out if out.ndim else float(out)


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int, a sequence of ints, or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class FluorescenceTrace:
    """Counts ``f_n`` aligned with a :class:`ReadoutSchedule`.

    Counts are normally integers. Noiseless oracle traces may carry the
    expected (non-integer) counts instead; estimators accept both.
    """

    counts: np.ndarray
    schedule: ReadoutSchedule
    seed: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (len(self.schedule),):
            raise InvalidParameterError(
                f"{self.counts.shape[0] if self.counts.ndim else 0} counts for {len(self.schedule)} bins"
            )
        if np.any(self.counts < 0):
            raise InvalidParameterError("counts must be >= 0")

    def __len__(self):
        return len(self.counts)

    def truncate(self, n: int) -> "FluorescenceTrace":
        return FluorescenceTrace(self.counts[:n], self.schedule.truncate(n), self.seed, dict(self.meta))

    def to_csv(self, path=None, header=None):
        """Columns ``t_ns, f_count``; the header records dt and seed."""
        head = {"dt": float(self.schedule.dt), "seed": self.seed}
        head.update(header or {})
        rows = zip((float(t) for t in self.schedule.times), (_count_value(c) for c in self.counts))
        return write_csv(path, ["t_ns", "f_count"], rows, header=head)


def _count_value(c):
    c = c.item() if hasattr(c, "item") else c
    if isinstance(c, float) and c.is_integer():
        return int(c)
    return c


def read_trace_csv(path):
    """Return ``(times, dt, counts, header)`` from a trace CSV.

    The coefficients are not stored in the file; rebuild the schedule from the
    rate parameters with :func:`nvbayes.dynamics.fluorescence_coefficients`.
    """
    header, columns, rows = read_csv(path)
    if columns[:2] != ["t_ns", "f_count"]:
        raise InvalidParameterError(f"{path}: expected columns t_ns,f_count")
    times = np.array([float(r[0]) for r in rows])
    counts = np.array([float(r[1]) for r in rows])
    if np.all(counts == np.round(counts)):
        counts = counts.astype(np.int64)
    return times, float(header["dt"]), counts, header


def sample_trace(schedule: ReadoutSchedule, rho: float, rng_seed) -> FluorescenceTrace:
    """Draw f_n ~ Poisson(A_n rho + B_n) independently for every bin."""
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho={rho!r} outside [0, 1]")
    means = schedule.means(rho)
    if np.any(means < 0):
        raise InvalidParameterError("negative Poisson mean in schedule")
    rng = make_rng(rng_seed)
    counts = rng.poisson(means)
    seed = rng_seed if not isinstance(rng_seed, np.random.Generator) else None
    return FluorescenceTrace(counts, schedule, seed=seed, meta={"rho": rho})


def noiseless_trace(schedule: ReadoutSchedule, rho: float) -> FluorescenceTrace:
    """Trace whose counts equal the expected counts (oracle mode)."""
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho={rho!r} outside [0, 1]")
    return FluorescenceTrace(schedule.means(rho), schedule, meta={"rho": rho, "noiseless": True})
