"""Exception hierarchy shared by all modules."""


class ToricSFKError(Exception):
    """Base class for every error raised by this package."""


class NotDelzant(ToricSFKError):
    pass


class DegeneratePolytope(ToricSFKError):
    pass


class InvalidPolytope(ToricSFKError):
    pass


class InadmissibleNut(ToricSFKError):
    pass


class EvaluationOverflow(ToricSFKError):
    pass


class PositivityViolation(ToricSFKError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NoConvergence(ToricSFKError):
    pass


class OutsidePolytope(ToricSFKError):
    pass


class PathExitsPolytope(ToricSFKError):
    pass


class StencilExitsPolytope(ToricSFKError):
    pass


class BoundaryMismatch(ToricSFKError):
    def __init__(self, message, interval=None, residual=None):
        super().__init__(message)
        self.interval = interval
        self.residual = residual


class UnboundedResidual(ToricSFKError):
    pass


class NotACuspEdge(ToricSFKError):
    pass


class DegenerateDelta(ToricSFKError):
    pass


class AngleOutOfRange(ToricSFKError):
    pass


class FitFailure(ToricSFKError):
    def __init__(self, message, slopes=None):
        super().__init__(message)
        self.slopes = slopes
