"""Exception hierarchy.

Every error carries an ``exit_code`` used by the CLI: 1 for input/IO problems,
2 for analytic infeasibility (the data loaded fine but the requested
computation cannot be carried out).
"""


class CpiPricingError(Exception):
    exit_code = 1


class InputError(CpiPricingError):
    """Malformed or inconsistent input data."""

    exit_code = 1


class AnalyticError(CpiPricingError):
    """Well-formed input on which the computation is infeasible."""

    exit_code = 2


class ParseError(InputError):
    pass


class GapError(InputError):
    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = missing


class OrderError(InputError):
    pass


class DuplicateAcronym(InputError):
    pass


class SchemaError(InputError):
    pass


class EmptyIntersection(AnalyticError):
    pass


class WindowUnavailable(AnalyticError):
    """The requested months are not covered once lags are applied.

    ``feasible`` holds the maximal feasible window (or ``None`` when nothing
    is feasible at all).
    """

    def __init__(self, message, feasible=None):
        super().__init__(message)
        self.feasible = feasible


class RankDeficient(AnalyticError):
    pass


class NoFeasibleCandidate(AnalyticError):
    pass


class SeriesTooShort(AnalyticError):
    pass


class DegenerateSeries(AnalyticError):
    """Input produces a degenerate regression (e.g. a constant series)."""


class SingularMoment(AnalyticError):
    pass


class NotDistressed(AnalyticError):
    pass
