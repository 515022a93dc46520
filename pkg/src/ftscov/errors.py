"""Exception types shared across the package."""


class FtscovError(Exception):
    """Base class for all package errors."""


class DimensionError(FtscovError, ValueError):
    """Operands live on incompatible grids or have mismatched shapes."""


class WindowError(FtscovError, ValueError):
    """Inadmissible (N, h, m, n) combination; message names the violated constraint."""


class StabilityError(FtscovError, ValueError):
    """Autoregressive specification is not contractive / causal weights diverge."""


class ModelError(FtscovError, ValueError):
    """Model specification is invalid or does not support the requested operation."""


class OracleError(FtscovError, ValueError):
    """No analytic oracle exists for the requested model kind."""


class InsufficientMomentsError(FtscovError, ValueError):
    """Coupling sequence too short for the requested window and no usable tail rule."""


class NumericError(FtscovError, RuntimeError):
    """A numerical routine (SVD, eigendecomposition) failed to converge."""


class ConfigError(FtscovError, ValueError):
    """Malformed or inadmissible configuration input."""
