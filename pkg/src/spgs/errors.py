"""Exception types shared across the solver."""


class SpgsError(Exception):
    """Base class for solver errors."""


class ZeroFieldError(SpgsError):
    """Raised when an operation needs a nonzero field (C = 0)."""


class NonCoerciveError(SpgsError):
    """Raised when the quadratic form fails coercivity (A1 <= 0, or the
    potential fails its coercivity gate)."""


class NoDescentError(SpgsError):
    """Raised when backtracking hits its step floor without an energy
    decrease."""


class ConfigError(SpgsError):
    """Raised on malformed run configuration; message carries the key path."""
