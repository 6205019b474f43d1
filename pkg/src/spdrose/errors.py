"""Exception types shared across the library.

Every error raised on purpose by this package derives from
:class:`SpdRoseError`, so callers can catch the whole family with one
``except`` clause.  The command line maps configuration errors to exit
code 2 and data errors to exit code 3.
"""


class SpdRoseError(Exception):
    """Base class for all library-specific errors."""


class NotSquare(SpdRoseError):
    """Input matrix is not square."""


class AsymmetryExceedsTolerance(SpdRoseError):
    """Matrix asymmetry exceeds the accepted relative tolerance."""


class NotPositiveDefinite(SpdRoseError):
    """Matrix is not positive definite (or too ill-conditioned to treat as such)."""

    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class DimensionMismatch(SpdRoseError):
    """Operands have incompatible dimensions."""


class IndefiniteKernel(SpdRoseError):
    """Kernel Gram matrix has a significantly negative eigenvalue under strict policy."""

    def __init__(self, message, smallest_eigenvalue=None, sigma=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue
        self.sigma = sigma


class EmptyInput(SpdRoseError):
    """An operation received fewer input points than it requires."""


class NonConvergence(SpdRoseError):
    """Iteration hit its step limit before meeting the stopping rule.

    Carries the last iterate and the final residual so the caller can
    decide whether the partial result is still usable.
    """

    def __init__(self, message, iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations


class DegenerateDirection(SpdRoseError):
    """A sampled direction point coincides with the pole."""


class TSampleTooLarge(SpdRoseError):
    """Requested exemplar subset size exceeds the reference pool."""


class ImageTooSmall(SpdRoseError):
    """Image is smaller than an operation's minimum support."""


class RegionTooSmall(SpdRoseError):
    """Region holds fewer pixels than a covariance estimate needs."""


class GridTooFine(SpdRoseError):
    """Requested grid produces cells below the minimum region size."""


class SingleClass(SpdRoseError):
    """Training data contains only one class."""


class EmptyData(SpdRoseError):
    """A dataset or evaluation set is empty."""


class EmptyTrain(SpdRoseError):
    """A training set is empty."""


class ParseError(SpdRoseError):
    """A file could not be parsed; the message names the offending path."""


class DimensionInconsistency(SpdRoseError):
    """Descriptors in one dataset do not share a common dimension."""


class ExclusionExceedsClasses(SpdRoseError):
    """A degradation study asked to exclude at least as many classes as exist."""


class ConfigError(SpdRoseError):
    """An experiment configuration or manifest is invalid."""


class StageFailure(SpdRoseError):
    """A pipeline stage failed; tagged with repetition index and stage name.

    The original error is chained as ``__cause__``.
    """

    def __init__(self, message, repetition=None, stage=None):
        super().__init__(message)
        self.repetition = repetition
        self.stage = stage
