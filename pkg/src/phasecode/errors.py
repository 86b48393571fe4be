class PhaseCodeError(Exception):
    """Base class for errors raised by phasecode."""


class ValidationError(PhaseCodeError, ValueError):
    """An input violates a documented precondition."""


class UnresolvableError(PhaseCodeError):
    """The physical configuration cannot resolve even one phase level.

    This is a legitimate physics outcome (SNR never reaches one), not a
    numerical failure.
    """


class BelowThresholdError(UnresolvableError):
    """No allocation of the photon budget resolves a phase level."""
