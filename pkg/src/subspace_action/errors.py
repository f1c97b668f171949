"""Exception types shared across the package."""


class SubspaceActionError(Exception):
    """Base class for all library errors."""


class RankDeficientError(SubspaceActionError):
    """Input columns/vectors are not linearly independent up to tolerance."""


class NotSymmetricError(SubspaceActionError):
    """Matrix is not symmetric within tolerance."""


class NoConvergenceError(SubspaceActionError):
    """Iterative eigensolver failed to converge."""


class DomainError(SubspaceActionError):
    """Argument outside the mathematical domain of a special function."""


class DimensionMismatchError(SubspaceActionError):
    """Vector/matrix shapes are inconsistent."""


class ToleranceNotReachedError(SubspaceActionError):
    """Adaptive quadrature exhausted its refinement budget."""


class NotAFrameError(SubspaceActionError):
    """Subspace system has no positive lower frame bound."""


class MixedDimensionsError(SubspaceActionError):
    """Subspaces of different dimensions where a common dimension is required."""


class NotUnitVectorError(SubspaceActionError):
    """Vector is not unit norm within tolerance."""


class UnsupportedVariantError(SubspaceActionError):
    """Operation not defined for this distribution variant."""


class InvalidParameterError(SubspaceActionError):
    """Parameter outside the documented range."""


class ConfigError(SubspaceActionError):
    """Malformed experiment configuration or CLI input."""
