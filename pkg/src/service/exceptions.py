class BaseExceptionError(Exception):
    """Base class for exceptions in this module."""

    def __init__(self, message: str = "An error occurred."):
        self.message = message

    def __str__(self):
        return repr(self.message)


# SURFACE CONSTRUCTION


class SurfaceServiceError(BaseExceptionError):
    """Base class for errors raised while building or transforming surfaces."""

    def __init__(self, message: str = "An error occurred with the Surface service."):
        super().__init__(message)


class UnglueableEdgeError(SurfaceServiceError):
    """Raised when two glued edges do not have matching vectors."""


class DegenerateTriangleError(SurfaceServiceError):
    """Raised when a triangle does not close up or has non-positive area."""


class BadConeAngleError(SurfaceServiceError):
    """Raised when a cone angle is not a positive multiple of pi."""


class SingularMatrixError(SurfaceServiceError):
    """Raised when a matrix with non-positive determinant acts on a surface."""


class TracingError(SurfaceServiceError):
    """Raised when a ray cannot leave the triangle it is in."""


# SADDLE CONNECTIONS AND TRIANGULATIONS


class BudgetExceededError(SurfaceServiceError):
    """Raised when the developed search visits more nodes than allowed."""


class NotApplicableError(SurfaceServiceError):
    """Raised when a complex cannot be enlarged by the given connection."""


class RankDeficientError(SurfaceServiceError):
    """Raised when basis holonomies do not determine the triangulation."""


# GEODESICS


class GeodesicServiceError(BaseExceptionError):
    """Base class for errors raised by the Geodesic service."""

    def __init__(self, message: str = "An error occurred with the Geodesic service."):
        super().__init__(message)


class MalformedCurveError(GeodesicServiceError):
    """Raised when a crossing word is not a closed walk through adjacent triangles."""


class NullHomotopicError(GeodesicServiceError):
    """Raised when a curve tightens to a point."""


class SharedArcUnresolvedError(GeodesicServiceError):
    """Raised when two geodesics share an arc and their linking cannot be decided."""


class WidthViolationError(GeodesicServiceError):
    """Raised when a rectangle cannot be placed around a short geodesic piece."""


class DegenerateDirectionError(GeodesicServiceError):
    """Raised when a piece has no usable direction for a staircase."""


class HorizontalPieceError(GeodesicServiceError):
    """Raised when a geodesic that must cross horizontals has a horizontal piece."""


# COLLARS


class CollarServiceError(BaseExceptionError):
    """Base class for errors raised by the Collar service."""

    def __init__(self, message: str = "An error occurred with the Collar service."):
        super().__init__(message)


class HorizontalGeodesicError(CollarServiceError):
    """Raised when a collar is requested around a geodesic with a horizontal piece."""


class HigherOrderZeroError(CollarServiceError):
    """Raised when a side panel would need a zero that is not simple."""


class DeltaOutOfRangeError(CollarServiceError):
    """Raised when the taper parameter is outside (0, ell_min_dagger / 8)."""


class QuadratureBudgetError(CollarServiceError):
    """Raised when a quadrature grid would exceed the configured point budget."""


# ERGODIC EXPERIMENTS


class ErgodicServiceError(BaseExceptionError):
    """Base class for errors raised by the Ergodic service."""

    def __init__(self, message: str = "An error occurred with the Ergodic service."):
        super().__init__(message)


class BadThresholdsError(ErgodicServiceError):
    """Raised when partition thresholds are not positive and strictly increasing."""


class PreconditionError(ErgodicServiceError):
    """Raised when experiment parameters violate the stated hypotheses."""


# TRAIN TRACKS


class TrainTrackServiceError(BaseExceptionError):
    """Base class for errors raised by the Train track service."""

    def __init__(self, message: str = "An error occurred with the Train track service."):
        super().__init__(message)


class NonIntegerWeightsError(TrainTrackServiceError):
    """Raised when a counting measure meant to carry a multicurve is not integral."""


class SwitchConditionError(TrainTrackServiceError):
    """Raised when weights do not satisfy the switch conditions."""
