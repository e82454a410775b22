"""Exception and warning types shared across the toolkit."""


class PcoKdeError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(PcoKdeError):
    """Inputs whose dimensions do not agree (data vs bandwidth vs density)."""


class UnsupportedDimension(PcoKdeError):
    """Dimension outside the supported range 1..4."""


class UnsupportedKernelDimension(PcoKdeError):
    """Non-Gaussian kernel requested for multivariate data."""


class NotPositiveDefinite(PcoKdeError):
    """A matrix required to be SPD has a non-positive eigenvalue."""


class InsufficientData(PcoKdeError):
    """Too few observations for the requested statistic."""


class EmptyGrid(PcoKdeError):
    """A bandwidth grid with no members was passed to a selector."""


class DegenerateSample(PcoKdeError):
    """Sample with no spread (zero standard deviation and zero IQR)."""


class QuadratureNotConverged(PcoKdeError):
    """Monte-Carlo/QMC integration did not reach the required accuracy."""


class UnpairedReports(PcoKdeError):
    """Risk reports combined for ratio statistics do not share trial seeds."""


class DegenerateCovarianceWarning(UserWarning):
    """Empirical covariance needed eigenvalue clamping."""


class ClampedCovarianceWarning(UserWarning):
    """A benchmark-density covariance decoded non-SPD and was projected."""


class SelectorFallbackWarning(UserWarning):
    """A selector hit a degenerate case and fell back to another rule."""


class IndefiniteQuadraticFormWarning(UserWarning):
    """The plug-in AMISE quadratic form was negative at some grid member."""
