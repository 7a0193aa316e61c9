"""Exception hierarchy shared by all engines."""


class EppaError(Exception):
    """Base class for every error raised by this package."""


class MalformedInputError(EppaError, ValueError):
    pass


class ContextError(EppaError, ValueError):
    """Two scalars over different square-free discriminants were combined."""


class TriangleViolation(MalformedInputError):
    def __init__(self, triple, message=None):
        self.triple = tuple(triple)
        super().__init__(message or f"triangle inequality fails on {self.triple}")


class PreconditionError(EppaError, ValueError):
    pass


class BudgetError(EppaError):
    """A group or search exceeded the configured size limits."""


class SeparationBudgetError(BudgetError):
    def __init__(self, last_degree, message=None):
        self.last_degree = last_degree
        super().__init__(message or f"no separating quotient up to degree {last_degree}")


class UnsupportedInstanceError(EppaError):
    pass


class CapacityError(EppaError):
    pass


class RankError(EppaError, ValueError):
    pass


class SaturationBoundError(EppaError, ValueError):
    pass


class InvariantError(EppaError, AssertionError):
    """A construction produced output that fails its own postcondition."""

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message if witness is None else f"{message}: {witness}")
