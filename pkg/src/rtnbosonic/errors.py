"""Exceptions and warnings raised across the package."""


class NotCompletelyPositive(ValueError):
    """Choi matrix has an eigenvalue below the positivity tolerance."""


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class DegeneratePrimitive(ValueError):
    """A primitive state has no support on one of the two codeword sectors."""


class NotConverged(RuntimeError):
    """An iterative or truncated-horizon computation did not reach its tolerance."""


class GridTooSmall(ValueError):
    """A phase-space grid does not cover the support of the Wigner function."""


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class TruncationWarning(UserWarning):
    """Population close to the Fock cutoff exceeds the truncation threshold."""
