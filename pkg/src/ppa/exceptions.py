"""Error and warning types shared across the package."""


class PpaError(Exception):
    """Base class for all data/model errors raised by this package."""


class InvalidDataError(PpaError):
    """Input contains non-finite values, bad shapes, or unparseable cells."""


class RankDeficiencyError(PpaError):
    """Sample covariance is numerically zero; no principal direction exists."""


class InsufficientSamplesError(PpaError):
    """Too few samples for the requested polynomial degree or split."""


class UndefinedFrameError(PpaError):
    """Curve derivative vanished; the moving frame is undefined there."""


class ConditioningWarning(UserWarning):
    """Vandermonde condition number exceeded the trust threshold."""


class DegreeCapWarning(UserWarning):
    """Candidate degrees were capped because the fit split is too small."""
