"""Two-level spin dynamics under a microwave drive, used to predict the
readout population rho after a pulse of length t_mw and to build Gaussian
priors for Rabi experiments.

State vector order is (p12, p21, p1, p2); p1 is the ms=0 population.
Angular frequencies are in rad/ns, times in ns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import fisher_information
from .dynamics import ReadoutSchedule
from .errors import IntegrationError, InvalidParameterError, ZeroInformationError
from .priors import Prior

TWO_PI = 2.0 * np.pi
DEFAULT_DIVISIONS = 1000
_DRIFT_TOL = 1e-9
_DRIFT_FAIL = 1e-6
_MAX_REFINEMENTS = 4


@dataclass(frozen=True)
class SpinParameters:
    omega: float
    f_mw: float
    resonance: float
    t2_star: float
    t1: float

    def __post_init__(self):
        if not (self.t2_star > 0 and self.t1 > 0):
            raise InvalidParameterError("t2_star and t1 must be > 0")
        if not self.omega >= 0:
            raise InvalidParameterError("omega must be >= 0")

    @property
    def detuning(self) -> float:
        return self.f_mw - self.resonance

    @classmethod
    def from_mhz(cls, omega_mhz, t2_star, t1, detuning_mhz=0.0, resonance_mhz=2870.0):
        """Frequencies given in cyclic MHz, converted to rad/ns."""
        to_rad_ns = TWO_PI * 1e-3
        resonance = resonance_mhz * to_rad_ns
        return cls(
            omega=omega_mhz * to_rad_ns,
            f_mw=resonance + detuning_mhz * to_rad_ns,
            resonance=resonance,
            t2_star=float(t2_star),
            t1=float(t1),
        )

    @classmethod
    def from_config(cls, spin_cfg: dict):
        return cls.from_mhz(
            spin_cfg["omega_mhz"],
            spin_cfg["t2_star"],
            spin_cfg["t1"],
            detuning_mhz=spin_cfg.get("detuning_mhz", 0.0),
        )

    @property
    def pi_time(self) -> float:
        """Duration of an on-resonance pi pulse."""
        if self.omega == 0:
            raise InvalidParameterError("no pi pulse without drive")
        return np.pi / self.omega


@dataclass(frozen=True)
class SpinState:
    p1: float = 1.0
    p2: float = 0.0
    p12: complex = 0j
    p21: complex = 0j

    def __post_init__(self):
        if abs(self.p1 + self.p2 - 1.0) > _DRIFT_TOL:
            raise InvalidParameterError("p1 + p2 must equal 1")
        if abs(self.p21 - np.conj(self.p12)) > _DRIFT_TOL:
            raise InvalidParameterError("p21 must be the conjugate of p12")

    def vector(self) -> np.ndarray:
        return np.array([self.p12, self.p21, self.p1, self.p2], dtype=complex)


def spin_generator(params: SpinParameters) -> np.ndarray:
    """Linear generator G with dx/dt = G x for x = (p12, p21, p1, p2).

    The p21 row uses -i*detuning so that p21 stays the conjugate of p12.
    """
    g2 = 1.0 / params.t2_star
    g1 = 1.0 / params.t1
    d = params.detuning
    h = 0.5j * params.omega
    return np.array(
        [
            [-g2 + 1j * d, 0, h, -h],
            [0, -g2 - 1j * d, -h, h],
            [h, -h, -g1, g1],
            [-h, h, g1, -g1],
        ],
        dtype=complex,
    )


def default_step(params: SpinParameters, divisions: int = DEFAULT_DIVISIONS) -> float:
    scales = [params.t2_star, params.t1]
    if params.omega > 0:
        scales.append(TWO_PI / params.omega)
    if params.detuning != 0:
        scales.append(TWO_PI / abs(params.detuning))
    return min(scales) / divisions


def _rk4_step_matrix(g: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for dx/dt = G x, applied to every basis vector."""
    x = np.eye(g.shape[0], dtype=complex)
    k1 = g @ x
    k2 = g @ (x + 0.5 * h * k1)
    k3 = g @ (x + 0.5 * h * k2)
    k4 = g @ (x + h * k3)
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def spin_drift(x: np.ndarray) -> float:
    """Largest violation of trace, Hermiticity and real populations in a raw state vector."""
    return max(abs(x[2] + x[3] - 1.0), abs(x[1] - np.conj(x[0])), abs(x[2].imag), abs(x[3].imag))


def propagate_spin(params: SpinParameters, t_mw: float, initial: SpinState = SpinState(),
                   step: float = None) -> np.ndarray:
    """Raw RK4 state vector (p12, p21, p1, p2) at time ``t_mw``.

    The step defaults to ``min(T2*, T1, 2 pi/Omega, 2 pi/|detuning|) / 1000``
    and is shrunk so that an integer number of steps lands on ``t_mw``. If the
    trace or Hermiticity drift exceeds 1e-9 the step is halved (up to four
    times); drift above 1e-6 after that raises :class:`IntegrationError`.
    """
    if t_mw < 0:
        raise InvalidParameterError(f"t_mw={t_mw!r} must be >= 0")
    x0 = initial.vector()
    if t_mw == 0:
        return x0
    g = spin_generator(params)
    h0 = default_step(params) if step is None else float(step)
    for _ in range(_MAX_REFINEMENTS + 1):
        n = max(1, int(np.ceil(t_mw / h0 - 1e-9)))
        x = np.linalg.matrix_power(_rk4_step_matrix(g, t_mw / n), n) @ x0
        drift = spin_drift(x)
        if drift <= _DRIFT_TOL:
            break
        h0 /= 2
    if not np.all(np.isfinite(x)) or drift > _DRIFT_FAIL:
        raise IntegrationError(f"invariant drift {drift:.3g} at t_mw={t_mw}")
    return x


def integrate_spin(params: SpinParameters, t_mw: float, initial: SpinState = SpinState(),
                   step: float = None) -> SpinState:
    """Spin state after a pulse of length ``t_mw`` (see :func:`propagate_spin`)."""
    if t_mw == 0:
        return initial
    x = propagate_spin(params, t_mw, initial, step)
    p12 = complex(x[0])
    p1 = float(x[2].real)
    return SpinState(p1=p1, p2=1.0 - p1, p12=p12, p21=p12.conjugate())


def rho_for_mw_time(params: SpinParameters, t_mw: float, initial: SpinState = SpinState()) -> float:
    """Predicted ms=0 population after a pulse of length ``t_mw``, clipped to [0, 1]."""
    return float(np.clip(integrate_spin(params, t_mw, initial).p1, 0.0, 1.0))


def conjugate_prior_for(params: SpinParameters, t_mw: float, schedule: ReadoutSchedule,
                        multiplier: float = 4.0, initial: SpinState = SpinState()) -> Prior:
    """Gaussian prior centred on the predicted rho with variance ``multiplier`` x CRLB."""
    if not multiplier > 0:
        raise InvalidParameterError("multiplier must be > 0")
    rho0 = rho_for_mw_time(params, t_mw, initial)
    info = fisher_information(schedule, rho0)
    if info <= 0:
        raise ZeroInformationError("schedule carries no information about rho")
    return Prior.conjugate(rho0, multiplier / info)


def rabi_sweep(params: SpinParameters, t_values, schedule: ReadoutSchedule, multiplier: float = 4.0):
    """Rows ``(t_mw_ns, rho0, sigma0_sq)`` for each pulse length."""
    rows = []
    for t in np.asarray(t_values, dtype=float):
        prior = conjugate_prior_for(params, t, schedule, multiplier)
        rows.append((float(t), prior.rho0, prior.sigma0_sq))
    return rows
