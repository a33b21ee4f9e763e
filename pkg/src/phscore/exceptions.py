"""Exception hierarchy.

Data problems and numerical failures are kept apart so callers (and the
command line tool) can react differently to them.
"""


class PHScoreError(Exception):
    """Base class for all errors raised by this package."""


class SurvivalDataError(PHScoreError, ValueError):
    """Input records are malformed or unusable."""


class NumericalError(PHScoreError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy answer."""


class SeparationError(NumericalError):
    """The partial likelihood is monotone: some coefficient runs off to infinity."""


class ConvergenceError(NumericalError):
    """Newton iterations stopped before the score vanished."""


class SingularMatrixError(NumericalError):
    """A matrix that must be positive definite is (numerically) singular."""


class DegenerateVarianceError(SingularMatrixError):
    """The variance of the non-proportionality statistic vanishes."""


class PowerStudyError(NumericalError):
    """Too many Monte Carlo replicates failed to produce a statistic."""
