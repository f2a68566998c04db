class SusyError(Exception):
    """Base class for errors raised by susyqm."""


class InvalidParameterError(SusyError, ValueError):
    pass


class NonConvergenceError(SusyError, RuntimeError):
    pass


class ResolutionError(SusyError, RuntimeError):
    """Grid too coarse to separate neighbouring nodes."""


class ConvergenceError(SusyError, RuntimeError):
    """Finite-difference spectrum failed its grid-doubling check."""


class SingularTransformationError(SusyError, ValueError):
    pass


class QuadratureOverflowError(SusyError, RuntimeError):
    pass


class DegenerateSeedError(SusyError, ValueError):
    pass


class CutoffError(SusyError, RuntimeError):
    pass
