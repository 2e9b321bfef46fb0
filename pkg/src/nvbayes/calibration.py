"""Calibration of the likelihood parameters lambda and L from reference traces.

lambda comes from the ratio of the observed steady-state tail to the model's
steady-state excited population. L is then lowered from a deliberately large
starting value until the model's rho=1 transient, widened by a noise margin,
no longer contains the observed transient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import RateParameters, build_rate_matrix, fluorescence_coefficients, steady_state
from .errors import InvalidParameterError, NoFeasibleLError, NoSteadyStateError
from .photon import FluorescenceTrace

MAX_REL_SLOPE_PER_US = 0.01


def _tail(trace: FluorescenceTrace, tail_fraction: float):
    if not 0 < tail_fraction <= 1:
        raise InvalidParameterError("tail_fraction must be in (0, 1]")
    n = max(2, int(np.ceil(tail_fraction * len(trace))))
    if n > len(trace):
        raise NoSteadyStateError("reference trace too short for a steady-state tail")
    return trace.schedule.times[-n:], np.asarray(trace.counts[-n:], dtype=float)


def tail_statistics(trace: FluorescenceTrace, tail_fraction: float = 0.2):
    """Mean of the tail counts and its fitted relative slope (per us) with standard error."""
    t, f = _tail(trace, tail_fraction)
    mean = f.mean()
    if mean <= 0:
        raise NoSteadyStateError("reference tail carries no signal")
    tc = t - t.mean()
    sxx = np.sum(tc**2)
    slope = np.sum(tc * (f - mean)) / sxx
    # Poisson noise: var(f) ~ mean
    slope_se = np.sqrt(mean / sxx)
    return mean, slope * 1e3 / mean, slope_se * 1e3 / mean


def estimate_lambda(reference: FluorescenceTrace, params: RateParameters, tail_fraction: float = 0.2,
                    max_rel_slope: float = MAX_REL_SLOPE_PER_US) -> float:
    """lambda = tail mean / (steady-state excited population * dt).

    ``params.lam`` is ignored. Raises :class:`NoSteadyStateError` when the
    tail drifts by more than ``max_rel_slope`` per us beyond three standard
    errors of the fitted slope.
    """
    mean, rel_slope, rel_se = tail_statistics(reference, tail_fraction)
    if abs(rel_slope) - 3 * rel_se > max_rel_slope:
        raise NoSteadyStateError(f"tail is still drifting ({rel_slope:.3g} per us)")
    pss = steady_state(build_rate_matrix(params.replace(lam=1.0)))
    excited = pss[2] + pss[3]
    if excited <= 0:
        raise NoSteadyStateError("model has no steady-state fluorescence")
    return float(mean / (excited * reference.schedule.dt))


def rho1_curve(params: RateParameters, times, dt: float, L: float) -> np.ndarray:
    """Expected counts of a fully polarized (rho = 1) readout at pumping ``L``."""
    sched = fluorescence_coefficients(params.replace(L=L), times, dt)
    return sched.A + sched.B


def contains(observed, curve, margin: float) -> bool:
    envelope = curve + margin * np.sqrt(curve)
    return bool(np.all(envelope >= observed - 1e-12 * (1.0 + np.abs(observed))))


def is_monotone_in_L(params: RateParameters, times, dt: float, L_values) -> bool:
    """True when the rho=1 curve does not decrease with L at any bin."""
    curves = np.array([rho1_curve(params, times, dt, L) for L in sorted(L_values)])
    return bool(np.all(np.diff(curves, axis=0) >= -1e-12 * np.abs(curves[1:]).max()))


def estimate_L(reference: FluorescenceTrace, params: RateParameters, l_init: float = 1.0,
               margin: float = 3.0, step: float = 0.02, resolution: float = 1e-3) -> float:
    """Smallest L whose rho=1 curve plus ``margin`` noise SDs bounds the trace.

    Scans down from ``l_init`` in steps of ``step`` until containment fails,
    then bisects to ``resolution``. ``params.lam`` must already be calibrated.
    """
    if not 0 < l_init <= 1:
        raise InvalidParameterError("l_init must be in (0, 1]")
    if margin < 0:
        raise InvalidParameterError("margin must be >= 0")
    times, dt = reference.schedule.times, reference.schedule.dt
    obs = np.asarray(reference.counts, dtype=float)

    def ok(L):
        return contains(obs, rho1_curve(params, times, dt, L), margin)

    if not ok(l_init):
        raise NoFeasibleLError(f"rho=1 curve at L={l_init} does not contain the trace")
    hi = l_init
    lo = None
    L = l_init
    while L > 0:
        L = max(0.0, L - step)
        if ok(L):
            hi = L
        else:
            lo = L
            break
    if lo is None:
        return hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


@dataclass(frozen=True)
class CalibrationReport:
    lam: float
    L: float
    tail_mean: float
    margin: float
    residual: float

    COLUMNS = ("lambda", "L", "tail_mean", "margin", "residual")

    def row(self):
        return [self.lam, self.L, self.tail_mean, self.margin, self.residual]


def calibrate(reference: FluorescenceTrace, params: RateParameters, l_init: float = 1.0,
              margin: float = 3.0, tail_fraction: float = 0.2) -> CalibrationReport:
    """lambda from the tail (using ``params.L``), then L with that lambda.

    ``residual`` is the RMS of (observed - model) / sqrt(model) for the
    calibrated rho=1 curve.
    """
    lam = estimate_lambda(reference, params, tail_fraction)
    calibrated = params.replace(lam=lam)
    L = estimate_L(reference, calibrated, l_init=l_init, margin=margin)
    times, dt = reference.schedule.times, reference.schedule.dt
    curve = rho1_curve(calibrated, times, dt, L)
    obs = np.asarray(reference.counts, dtype=float)
    good = curve > 0
    residual = float(np.sqrt(np.mean(((obs[good] - curve[good]) / np.sqrt(curve[good])) ** 2)))
    tail_mean = tail_statistics(reference, tail_fraction)[0]
    return CalibrationReport(lam, L, float(tail_mean), float(margin), residual)
