"""Analytic readout variances: Fisher information, CRLB, photon summation and
the prior-specific MAP variances."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .dynamics import ReadoutSchedule
from .errors import DegenerateScheduleError, InvalidParameterError, SingularBinError, ZeroInformationError
from .priors import Prior, PriorKind


def fisher_information(schedule: ReadoutSchedule, rho):
    """I(rho) = sum_n A_n^2 / (A_n rho + B_n) for independent Poisson bins.

    ``rho`` may be an array. Bins with A_n == 0 carry no information and are
    skipped, so empty (A = B = 0) bins are legal.
    """
    rho_arr = np.asarray(rho, dtype=float)
    A = schedule.A
    informative = A != 0
    A = A[informative]
    B = schedule.B[informative]
    means = A * rho_arr[..., None] + B
    if np.any(means <= 0):
        raise SingularBinError("bin with A != 0 has zero expected counts")
    info = np.sum(A**2 / means, axis=-1)
    return info if rho_arr.ndim else float(info)


def ps_variance(schedule: ReadoutSchedule, rho: float) -> float:
    """Variance of the photon-summation estimate: sum(A rho + B) / (sum A)^2."""
    total_a = float(np.sum(schedule.A))
    if total_a == 0:
        raise DegenerateScheduleError("sum of A_n is zero; photon summation is undefined")
    return float(np.sum(schedule.A * rho + schedule.B)) / total_a**2


def conjugate_variance(fisher: float, sigma0_sq: float) -> float:
    """1 / (I + 2/s^2 + 1/(s^4 I)) for a Gaussian prior of variance s^2."""
    if fisher <= 0:
        raise ZeroInformationError("Fisher information must be > 0")
    if not sigma0_sq > 0:
        raise InvalidParameterError("sigma0_sq must be > 0")
    if np.isinf(sigma0_sq):
        return 1.0 / fisher
    return 1.0 / (fisher + 2.0 / sigma0_sq + 1.0 / (sigma0_sq**2 * fisher))


def prior_variance(schedule: ReadoutSchedule, rho: float, prior: Prior) -> float:
    """Large-count variance of the MAP estimate under ``prior``.

    Flat and Jeffreys priors both give the CRLB 1/I(rho).
    """
    info = fisher_information(schedule, rho)
    if info <= 0:
        raise ZeroInformationError("schedule carries no information about rho")
    if prior.kind is PriorKind.CONJUGATE:
        return conjugate_variance(info, prior.sigma0_sq)
    return 1.0 / info


def crlb_exceedance(crlb: float, sigma0_sq: float) -> float:
    """How far a Gaussian prior pushes the variance below the CRLB.

    Equals (1 - 1/(k+1)^2) * crlb with k = crlb / sigma0_sq, evaluated as
    k(k+2)/(k+1)^2 to avoid cancellation at small k.
    """
    if not (crlb > 0 and sigma0_sq > 0):
        raise InvalidParameterError("crlb and sigma0_sq must be > 0")
    k = crlb / sigma0_sq
    return k * (k + 2.0) / (k + 1.0) ** 2 * crlb


@dataclass(frozen=True)
class VarianceReport:
    rho: float
    fisher: float
    crlb: float
    ps: float
    flat: float
    jeffreys: float
    conjugate: Optional[float] = None
    k_ratio: Optional[float] = None

    COLUMNS = ("rho", "fisher", "crlb", "ps", "flat", "jeffreys", "conjugate", "k_ratio")

    def row(self):
        d = asdict(self)
        return ["" if d[c] is None else d[c] for c in self.COLUMNS]


def variance_report(schedule: ReadoutSchedule, rho: float, sigma0_sq: Optional[float] = None) -> VarianceReport:
    info = fisher_information(schedule, rho)
    if info <= 0:
        raise ZeroInformationError("schedule carries no information about rho")
    crlb = 1.0 / info
    conj = k = None
    if sigma0_sq is not None:
        conj = conjugate_variance(info, sigma0_sq)
        k = crlb / sigma0_sq
    return VarianceReport(
        rho=float(rho),
        fisher=info,
        crlb=crlb,
        ps=ps_variance(schedule, rho),
        flat=prior_variance(schedule, rho, Prior.flat()),
        jeffreys=prior_variance(schedule, rho, Prior.jeffreys()),
        conjugate=conj,
        k_ratio=k,
    )
