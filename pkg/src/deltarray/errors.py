"""Exception hierarchy shared by the engine and the command-line front end."""


class DeltarrayError(ValueError):
    """Base class for all errors raised by deltarray."""


class DomainError(DeltarrayError):
    """A physically meaningless input, e.g. a nonpositive energy or wave number."""


class ConfigError(DeltarrayError):
    """A malformed or inconsistent experiment description."""
