"""Exception types shared across the package."""


class TorusNlsError(ValueError):
    """Base class for all package-specific errors."""


class InvalidGridError(TorusNlsError):
    """Sample array does not match the expected interpolation grid."""


class AliasingError(TorusNlsError):
    """Field carries modes the requested grid cannot represent."""


class NotInSpaceError(TorusNlsError):
    """Field has nonzero coefficients beyond the required mode cutoff."""


class OracleCostError(TorusNlsError):
    """Direct-summation oracle refused: cubic cost too large for the request."""


class ConfigurationError(TorusNlsError):
    """Inconsistent experiment or scheme configuration."""


class DegenerateReportError(TorusNlsError):
    """Convergence-order computation needs at least two sweep rows."""
