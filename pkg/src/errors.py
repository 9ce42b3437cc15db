"""
Exception hierarchy for the simulator
"""


class QbmSimError(Exception):
    """Base class for all simulator errors"""


class NumericalError(QbmSimError):
    """A computation could not produce a trustworthy result"""


class TruncationError(NumericalError):
    """Fock truncation too small for the requested state or evolution"""


class StepFailure(NumericalError):
    """ODE integrator failed to advance"""


class NonAdiabatic(NumericalError):
    """Gate evolution left the coherent-state code space"""


class DegeneracyError(NumericalError):
    """Instantaneous spectrum has an unexpected near-degeneracy"""


class InvalidRates(NumericalError):
    """A Lindblad rate would be negative"""


class BelowThreshold(NumericalError):
    """Pump rate below the oscillation threshold"""


class TooLarge(NumericalError):
    """Problem size exceeds what the exact method can handle"""


class DimensionMismatch(QbmSimError):
    """Operator and state dimensions disagree"""


class UnitError(QbmSimError):
    """Unknown or inconsistent physical unit"""


class ConfigError(QbmSimError):
    """Experiment configuration is malformed or incomplete"""


class RegimeWarning(UserWarning):
    """Parameters outside the regime where an approximation is trusted"""
