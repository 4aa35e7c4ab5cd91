"""Exception types shared across the package."""


class FidsatError(Exception):
    """Base class for every error raised by this package."""


class NonUnitaryError(FidsatError):
    """A matrix failed unitarity certification."""

    def __init__(self, defect, tolerance):
        super().__init__(
            f"unitarity defect {defect:.3e} exceeds tolerance {tolerance:.3e}"
        )
        self.defect = defect
        self.tolerance = tolerance


class DecompositionFailedError(FidsatError):
    """Spectral decomposition could not reach the reconstruction tolerance."""

    def __init__(self, defect, tolerance):
        super().__init__(
            f"reconstruction defect {defect:.3e} exceeds tolerance {tolerance:.3e}"
        )
        self.defect = defect
        self.tolerance = tolerance


class DimensionMismatchError(FidsatError):
    """Operands have incompatible dimensions."""


class NotNormalizedError(FidsatError):
    """A state vector is not normalized to unit length."""


class InvalidSpinError(FidsatError):
    """Spin quantum number is not a positive integer or half-integer."""


class SymmetryBrokenError(FidsatError):
    """A map does not commute with the symmetry it is being reduced by."""


class DimensionUnexpectedError(FidsatError):
    """A symmetry eigenspace does not have the dimension the caller claimed.

    Carries the measured dimension so callers can inspect what the
    eigenspace actually looks like instead of guessing.
    """

    def __init__(self, expected, actual):
        super().__init__(
            f"odd-parity eigenspace has dimension {actual}, expected {expected}"
        )
        self.expected = expected
        self.actual = actual


class WindowOutOfRangeError(FidsatError):
    """An averaging window does not fit inside the available series."""


class InsufficientDecayError(FidsatError):
    """Too few points above the fit floor to fit a decay rate."""


class FitDivergedError(FidsatError):
    """A nonlinear fit failed to converge to a finite parameter."""


class InsufficientPointsError(FidsatError):
    """Too few curve points inside the requested fit window."""


class GridMismatchError(FidsatError):
    """Two curves do not share the same abscissa grid."""


class ExperimentError(FidsatError):
    """A sweep cell failed; carries (seed, delta) context, chains the cause."""

    def __init__(self, message, seed=None, delta=None):
        super().__init__(message)
        self.seed = seed
        self.delta = delta


class OutputExistsError(FidsatError):
    """Output directory already holds results and --resume was not given."""


class ConfigError(FidsatError):
    """Base class for experiment-config problems."""


class ConfigParseError(ConfigError):
    """Config text could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class ConfigSemanticError(ConfigError):
    """Config parsed but describes a contradictory experiment."""
