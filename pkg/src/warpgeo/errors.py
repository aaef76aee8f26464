"""Exception hierarchy shared by all warpgeo modules."""


class WarpGeoError(Exception):
    """Base class for every error raised by warpgeo."""


class InvalidArgumentError(WarpGeoError, ValueError):
    pass


class InvalidFrameError(WarpGeoError, ValueError):
    """Vectors are not tangent, not unit, not orthonormal or not co-located."""


class InvalidConfigurationError(WarpGeoError, ValueError):
    pass


class DomainError(WarpGeoError, ValueError):
    """A height lies outside the warp interval."""


class NumericError(WarpGeoError, ArithmeticError):
    pass


class InvalidSpectrumError(WarpGeoError, ValueError):
    pass


class DegenerateSpectrumError(InvalidSpectrumError):
    pass


class NoVerticalSectionError(WarpGeoError):
    """||T|| = 0: the hypersurface is tangent to the slice."""


class OutOfRangeError(WarpGeoError, ValueError):
    """psi/f(phi) left the image of the warping function."""


class NoSeedFoundError(WarpGeoError):
    def __init__(self, message, s_candidates=(), y_candidates=()):
        super().__init__(message)
        self.s_candidates = tuple(s_candidates)
        self.y_candidates = tuple(y_candidates)


class InconsistentSeedError(WarpGeoError, ValueError):
    pass


class FocalSingularityError(WarpGeoError, ArithmeticError):
    pass


class NotIdealError(WarpGeoError, ValueError):
    """beta * ||T|| vanishes on a sample."""


class NoSolutionError(WarpGeoError, ValueError):
    pass


class InvalidPartitionError(WarpGeoError, ValueError):
    pass


class MismatchError(WarpGeoError, ValueError):
    pass


class DegenerateChartError(NumericError):
    pass


class UnstableDifferencingError(NumericError):
    pass


class SceneError(WarpGeoError):
    """Scene file could not be parsed or validated."""

    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        return f"{self.line}:{self.column}: {self.args[0]}"
