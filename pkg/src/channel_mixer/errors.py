"""Exception types raised across the package."""


class ChannelMixerError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(ChannelMixerError, ValueError):
    pass


class InvalidState(ChannelMixerError, ValueError):
    pass


class NegativeTime(ChannelMixerError, ValueError):
    pass


class DomainViolation(ChannelMixerError, ValueError):
    pass


class SingularEigenvalue(ChannelMixerError, ArithmeticError):
    """A Pauli eigenvalue vanished, so the time-local generator is undefined."""


class EtaOutOfRange(ChannelMixerError, ValueError):
    pass


class ProbOutOfRange(ChannelMixerError, ValueError):
    pass


class DegenerateDenominator(ChannelMixerError, ArithmeticError):
    pass


class NonPositiveInput(ChannelMixerError, ValueError):
    pass


class ConfigError(ChannelMixerError, ValueError):
    pass
