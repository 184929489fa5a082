"""Exception hierarchy shared by every detmax module."""


class DetmaxError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(DetmaxError, ValueError):
    pass


class NotPsd(DetmaxError, ValueError):
    pass


class NotPositiveDefinite(DetmaxError, ValueError):
    pass


class ConvergenceFailure(DetmaxError, RuntimeError):
    pass


class OutOfRange(DetmaxError, IndexError):
    pass


class InvalidInput(DetmaxError, ValueError):
    pass


class RankDeficient(DetmaxError, ValueError):
    pass


class InvalidDistribution(DetmaxError, ValueError):
    pass


class DegeneratePotential(DetmaxError, ValueError):
    pass


class PreconditionViolated(DetmaxError, ValueError):
    pass


class BudgetExceeded(DetmaxError, RuntimeError):
    pass


class ParseError(DetmaxError, ValueError):
    pass


class IterationBudgetExceeded(DetmaxError, RuntimeError):
    """Solver ran out of iterations before certifying the target gap.

    The best design found so far is attached so callers can still round it;
    its certificate remains a valid (if looser) bound.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result
