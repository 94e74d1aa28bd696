"""Exception hierarchy shared across the package."""


class PrebError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PrebError):
    """Malformed or inconsistent run configuration."""


class NoUniqueNessError(PrebError):
    """The one-cycle map has no unique fixed point (spectral radius >= 1)."""


class NumericsError(PrebError):
    """A numerical procedure failed (decoupled chain, lost orthogonality, no convergence)."""
