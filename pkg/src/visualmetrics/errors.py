"""Exception hierarchy shared by all modules."""


class VisualMetricsError(Exception):
    """Base class for all package errors."""


class NoConvergence(VisualMetricsError):
    """An iterative solver failed to meet its tolerance."""


class OutsideTubular(VisualMetricsError):
    """Point lies outside the collar where boundary projection is unique."""


class NotInDomain(VisualMetricsError):
    """Point is not strictly inside the domain."""


class NotStrictlyPseudoconvex(VisualMetricsError):
    """Levi form fails to be positive definite on the complex tangent space."""


class DegenerateBoundary(VisualMetricsError):
    """No positive tubular radius could be certified."""


class NotTangent(VisualMetricsError):
    """Vector is not tangent to the boundary at the given point."""


class NotHorizontal(VisualMetricsError):
    """Curve has a normal-in-tangent component above tolerance."""

    def __init__(self, segment, message=None):
        self.segment = segment
        super().__init__(message or f"segment {segment} is not horizontal")


class GraphDisconnected(VisualMetricsError):
    """Boundary sampling graph is not connected."""


class TooFewPoints(VisualMetricsError):
    """Operation needs more sample points than provided."""


class HeightOutOfRange(VisualMetricsError):
    """Filling-point height is outside (0, D)."""


class NonConvergentSequence(VisualMetricsError):
    """Height-sequence limit did not stabilize after extrapolation."""


class DirectionalMismatch(VisualMetricsError):
    """Ratio limits along different directions disagree beyond tolerance."""


class InsufficientSamples(VisualMetricsError):
    """An annulus or region holds fewer samples than required."""

    def __init__(self, where, message=None):
        self.where = where
        super().__init__(message or f"not enough samples in {where}")


class NotComposable(VisualMetricsError):
    """Distortion reports do not chain (focal points mismatch)."""


class QuantifierSearchFailed(VisualMetricsError):
    """No witness radii satisfied the requested bound at max resolution."""
