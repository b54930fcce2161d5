"""Exception hierarchy.

Domain errors (bad input, unmet hypotheses) map to exit code 2 on the
command line; numeric failures map to exit code 3.
"""


class CubicTessError(Exception):
    exit_code = 1


class DomainError(CubicTessError):
    exit_code = 2


class NumericFailure(CubicTessError):
    exit_code = 3


class NotCoperiodic(DomainError):
    pass


class PeriodMismatch(DomainError):
    pass


class DenominatorMismatch(DomainError):
    pass


class GrandOrbitClash(DomainError):
    pass


class NoShift(DomainError):
    pass


class NoCondition(DomainError):
    pass


class OutOfTable(DomainError):
    pass


class Inconsistent(DomainError):
    pass


class ZeroParameter(DomainError):
    pass


class DegreeTooLarge(DomainError):
    pass


class NotACenter(DomainError):
    pass


class NotEscaping(DomainError):
    pass


class ChartUnavailable(DomainError):
    pass


class IterationBudgetExceeded(NumericFailure):
    pass


class TooDeep(NumericFailure):
    pass


class RootFindingFailure(NumericFailure):
    pass


class NewtonDivergence(NumericFailure):
    pass


class RayCrashed(NumericFailure):
    pass


class ClusterAmbiguous(NumericFailure):
    pass


class WallTraceFailed(NumericFailure):
    pass


class RegionEscape(NumericFailure):
    pass


class VerificationFailed(NumericFailure):
    pass


class ContinuationLost(NumericFailure):
    pass


class TraceFailure(NumericFailure):
    pass


class SampleOnEdge(NumericFailure):
    pass


class PortraitMismatch(NumericFailure):
    pass
