"""Exception types raised across the package."""


class SeqNWError(Exception):
    """Base class for all package errors."""


class DomainError(SeqNWError, ValueError):
    """An argument lies outside the domain of a function."""


class GridTooLarge(SeqNWError):
    """A covering grid would exceed the configured cardinality cap."""


class ZeroSmallBall(SeqNWError):
    """No Monte Carlo draw landed inside the ellipsoid; increase h or n_mc."""


class InsufficientHits(SeqNWError):
    """The empirical small-ball proportion is zero at some bandwidth."""


class QuadratureFailure(SeqNWError):
    """A numerical integral did not converge to the requested tolerance."""


class ZetaAbsent(SeqNWError):
    """The Laplace-transform constant zeta does not exist for a distribution."""


class NonSummable(SeqNWError):
    """A coefficient sequence failed the summability heuristic."""


class ContractionViolated(SeqNWError):
    """Contraction coefficients sum to more than one."""


class ConfigError(SeqNWError):
    """An experiment configuration is malformed."""
