"""Exception hierarchy shared by every module.

Each class maps to its own CLI exit code (see ``nvbayes.cli``).
"""


class NVBayesError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(NVBayesError, ValueError):
    pass


class NumericalFailureError(NVBayesError, ArithmeticError):
    pass


class DegenerateScheduleError(NVBayesError, ValueError):
    """Sum of the rho-dependent coefficients vanishes."""


class SingularBinError(NVBayesError, ZeroDivisionError):
    """A bin carries rho information (A != 0) but has zero expected counts."""


class ZeroInformationError(NVBayesError, ValueError):
    pass


class DegeneratePriorError(NVBayesError, ValueError):
    pass


class PosteriorUnderflowError(NVBayesError, ArithmeticError):
    pass


class NoSteadyStateError(NVBayesError, ValueError):
    pass


class NoFeasibleLError(NVBayesError, ValueError):
    pass


class IntegrationError(NVBayesError, ArithmeticError):
    pass


class ConfigError(NVBayesError, ValueError):
    pass
