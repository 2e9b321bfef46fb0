"""Bayesian spin-state readout of NV-center fluorescence.

Simulates Poisson-noisy readout traces from the five-level rate model and
estimates the initial ms=0 population with photon summation, a grid
posterior, or the closed-form prior-specific estimators.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    RateParameters,
    ReadoutSchedule,
    build_rate_matrix,
    evolve_populations,
    expected_fluorescence,
    fluorescence_coefficients,
    readout_schedule,
)
from .photon import FluorescenceTrace, log_likelihood, noiseless_trace, sample_trace  # noqa: E402
from .config import load_config, rate_parameters  # noqa: E402
from .estimators import (  # noqa: E402
    EstimateResult,
    Posterior,
    Prior,
    closed_form_estimate,
    confidence_interval,
    posterior_estimate,
    posterior_init,
    posterior_update,
    ps_estimate,
    bayes_estimate,
)
from .bounds import (  # noqa: E402
    VarianceReport,
    crlb_exceedance,
    fisher_information,
    prior_variance,
    ps_variance,
    variance_report,
)

__all__ = [
    "RateParameters",
    "ReadoutSchedule",
    "build_rate_matrix",
    "evolve_populations",
    "expected_fluorescence",
    "fluorescence_coefficients",
    "readout_schedule",
    "FluorescenceTrace",
    "log_likelihood",
    "sample_trace",
    "noiseless_trace",
    "load_config",
    "rate_parameters",
    "EstimateResult",
    "Posterior",
    "Prior",
    "closed_form_estimate",
    "confidence_interval",
    "posterior_estimate",
    "posterior_init",
    "posterior_update",
    "ps_estimate",
    "bayes_estimate",
    "VarianceReport",
    "crlb_exceedance",
    "fisher_information",
    "prior_variance",
    "ps_variance",
    "variance_report",
]
