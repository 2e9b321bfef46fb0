"""Five-level NV rate model and the linear fluorescence model A(t) rho + B(t).

Levels (0-based index in every array):
    0  |g, ms=0>     1  |g, ms=+-1>
    2  |e, ms=0>     3  |e, ms=+-1>
    4  metastable singlet

Time is in ns and every rate in 1/ns. Use :func:`mhz` to convert from the
MHz values quoted in configs.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError

N_LEVELS = 5
EXCITED = np.array([0.0, 0.0, 1.0, 1.0, 0.0])

_TAYLOR_MAX_TERMS = 60


def mhz(value):
    """Convert a rate in MHz (1/us) to 1/ns."""
    return value * 1e-3


@dataclass(frozen=True)
class RateParameters:
    """Physical constants of the five-level model.

    ``L`` is the dimensionless relative pumping rate (pump rate is ``L*r``),
    the rates are in 1/ns and ``lam`` is the fluorescence scale factor in
    expected counts per unit excited population per ns.
    """

    L: float
    r: float
    r35: float
    r45: float
    r51: float
    r52: float
    r12: float
    lam: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("r", "r35", "r45", "r51", "r52", "r12"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidParameterError(f"rate {name}={value!r} must be finite and >= 0")
        if not 0.0 <= self.L <= 1.0:
            raise InvalidParameterError(f"L={self.L!r} outside [0, 1]")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidParameterError(f"lambda={self.lam!r} must be > 0")

    def replace(self, **changes) -> "RateParameters":
        return dataclasses.replace(self, **changes)


def build_rate_matrix(params: RateParameters) -> np.ndarray:
    """Return the 5x5 generator M with dp/dt = M p."""
    params.validate()
    L, r = params.L, params.r
    r35, r45, r51, r52, r12 = params.r35, params.r45, params.r51, params.r52, params.r12
    pump = L * r
    return np.array(
        [
            [-pump - r12, r12, r, 0.0, r51],
            [r12, -pump - r12, 0.0, r, r52],
            [pump, 0.0, -r - r35, 0.0, 0.0],
            [0.0, pump, 0.0, -r - r45, 0.0],
            [0.0, 0.0, r35, r45, -r51 - r52],
        ]
    )


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    Accepts a single square matrix or a stack ``(..., n, n)``; the whole stack
    shares one scaling exponent. The series is summed until the next term is
    below machine precision relative to the partial sum.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidParameterError("expm needs square matrices")
    if not np.all(np.isfinite(a)):
        raise NumericalFailureError("non-finite entries in exponent")
    norm = float(np.max(np.abs(a).sum(axis=-2))) if a.size else 0.0
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    scaled = a / 2.0**s

    eye = np.broadcast_to(np.eye(a.shape[-1]), a.shape)
    total = eye.copy()
    term = eye.copy()
    eps = np.finfo(float).eps
    for k in range(1, _TAYLOR_MAX_TERMS + 1):
        term = term @ scaled / k
        total = total + term
        if np.max(np.abs(term)) <= eps * np.max(np.abs(total)):
            break
    else:
        raise NumericalFailureError(f"Taylor series did not converge in {_TAYLOR_MAX_TERMS} terms")

    for _ in range(s):
        total = total @ total
    if not np.all(np.isfinite(total)):
        raise NumericalFailureError("matrix exponential overflowed")
    return total


def check_populations(p, tol=1e-9) -> np.ndarray:
    """Validate a population vector and return it as an array."""
    p = np.asarray(p, dtype=float)
    if p.shape != (N_LEVELS,):
        raise InvalidParameterError(f"population vector must have {N_LEVELS} entries")
    if np.any(p < -tol) or np.any(p > 1 + tol):
        raise InvalidParameterError("populations must lie in [0, 1]")
    if abs(p.sum() - 1.0) > tol:
        raise InvalidParameterError(f"populations sum to {p.sum()!r}, expected 1")
    return p


def initial_populations(rho: float) -> np.ndarray:
    """Ground-state populations (rho, 1 - rho, 0, 0, 0) at the start of readout."""
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho={rho!r} outside [0, 1]")
    return np.array([rho, 1.0 - rho, 0.0, 0.0, 0.0])


def evolve_populations(m: np.ndarray, p0, t: float) -> np.ndarray:
    """Propagate ``p0`` for time ``t`` ns: returns exp(M t) p0."""
    if t < 0:
        raise InvalidParameterError(f"t={t!r} must be >= 0")
    p0 = check_populations(p0)
    if t == 0:
        return p0.copy()
    return expm(np.asarray(m) * t) @ p0


def steady_state(m: np.ndarray) -> np.ndarray:
    """Normalized fixed point of dp/dt = M p (eigenvector of the zero eigenvalue)."""
    w, v = np.linalg.eig(np.asarray(m))
    k = int(np.argmin(np.abs(w)))
    vec = np.real(v[:, k])
    total = vec.sum()
    if abs(total) < 1e-300:
        raise NumericalFailureError("rate matrix has no normalizable steady state")
    vec = vec / total
    if np.any(vec < -1e-9):
        raise NumericalFailureError("steady state is not a valid population vector")
    return np.clip(vec, 0.0, None)


@dataclass(frozen=True)
class ReadoutSchedule:
    """Bin end times ``times`` (ns), bin width ``dt`` and per-bin coefficients.

    The expected count in bin n is ``A[n] * rho + B[n]``.
    """

    times: np.ndarray
    dt: float
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if not (times.ndim == A.ndim == B.ndim == 1) or not (len(times) == len(A) == len(B)):
            raise InvalidParameterError("times, A and B must be 1-D arrays of equal length")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise InvalidParameterError("schedule times must be strictly increasing")
        if not self.dt > 0:
            raise InvalidParameterError(f"dt={self.dt!r} must be > 0")
        if np.any(B < 0) or np.any(A + B < 0):
            raise InvalidParameterError("coefficients give a negative mean for some rho in [0, 1]")
        for name, value in (("times", times), ("A", A), ("B", B)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_coefficients(cls, A, B, dt=1.0, times=None) -> "ReadoutSchedule":
        A = np.atleast_1d(np.asarray(A, dtype=float))
        if times is None:
            times = dt * np.arange(1, len(A) + 1)
        return cls(times=times, dt=dt, A=A, B=np.atleast_1d(np.asarray(B, dtype=float)))

    def __len__(self):
        return len(self.times)

    @property
    def coeffs(self) -> np.ndarray:
        """``(N, 2)`` array of (A_n, B_n) pairs."""
        return np.column_stack([self.A, self.B])

    def means(self, rho) -> np.ndarray:
        """Expected counts for every bin. ``rho`` may be an array (broadcast on a new last axis)."""
        rho = np.asarray(rho, dtype=float)
        return self.A * rho[..., None] + self.B if rho.ndim else self.A * rho + self.B

    def truncate(self, n: int) -> "ReadoutSchedule":
        """First ``n`` bins."""
        return ReadoutSchedule(self.times[:n], self.dt, self.A[:n], self.B[:n])


def uniform_times(readout_time: float, dt: float) -> np.ndarray:
    """Bin end times dt, 2 dt, ..., N dt covering ``readout_time``."""
    if dt <= 0 or readout_time <= 0:
        raise InvalidParameterError("readout_time and dt must be > 0")
    n = int(round(readout_time / dt))
    if n < 1:
        raise InvalidParameterError("readout window shorter than one bin")
    return dt * np.arange(1, n + 1)


def fluorescence_coefficients(params: RateParameters, times, dt: float) -> ReadoutSchedule:
    """Coefficients of the expected counts <f_n> = A_n rho + B_n.

    The excited population is taken at the bin end time and multiplied by
    ``dt`` (rectangle rule), scaled by ``params.lam``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise InvalidParameterError("schedule times must be >= 0")
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise InvalidParameterError("schedule times must be strictly increasing")
    if not dt > 0:
        raise InvalidParameterError(f"dt={dt!r} must be > 0")
    m = build_rate_matrix(params)
    props = expm(m[None, :, :] * times[:, None, None])
    # excited-state rows applied to the ms=0 and ms=+-1 initial columns
    from_ms0 = props[:, 2, 0] + props[:, 3, 0]
    from_ms1 = props[:, 2, 1] + props[:, 3, 1]
    scale = params.lam * dt
    # roundoff can leave -1e-18 populations at t ~ 0
    from_ms0 = np.clip(from_ms0, 0.0, None)
    from_ms1 = np.clip(from_ms1, 0.0, None)
    A = scale * (from_ms0 - from_ms1)
    B = scale * from_ms1
    return ReadoutSchedule(times=times, dt=float(dt), A=A, B=B)


def readout_schedule(params: RateParameters, readout_time: float, dt: float) -> ReadoutSchedule:
    """Uniformly binned schedule over ``readout_time`` ns."""
    return fluorescence_coefficients(params, uniform_times(readout_time, dt), dt)


def expected_fluorescence(schedule: ReadoutSchedule, n: int, rho: float) -> float:
    """Expected counts A_n rho + B_n of bin ``n``."""
    if not 0 <= n < len(schedule):
        raise IndexError(f"bin index {n} out of range for {len(schedule)} bins")
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho={rho!r} outside [0, 1]")
    return float(schedule.A[n] * rho + schedule.B[n])
