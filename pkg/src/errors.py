"""
Exception hierarchy for the height/discrepancy toolkit.

Every error carries the process exit code the CLI reports for it:
0 success, 1 verification failure, 2 usage or parse error, 3 data error.
"""


class HeightDiscrepancyError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 3


class ParseError(HeightDiscrepancyError):
    exit_code = 2


class DomainError(HeightDiscrepancyError):
    """A calculator was called outside the range its formula covers"""
    exit_code = 2


class SingularCurve(HeightDiscrepancyError):
    pass


class NonMinimalModel(HeightDiscrepancyError):
    pass


class NonSemistable(HeightDiscrepancyError):
    pass


class PointNotOnCurve(HeightDiscrepancyError):
    pass


class DuplicatePoints(HeightDiscrepancyError):
    pass


class CoordinateOverflowBudget(HeightDiscrepancyError):
    pass


class TauNotReal(HeightDiscrepancyError):
    pass


class PrecisionExhausted(HeightDiscrepancyError):
    pass


class TruncationBudgetExceeded(HeightDiscrepancyError):
    pass


class SingularAtOrigin(HeightDiscrepancyError):
    pass


class VerificationFailed(HeightDiscrepancyError):
    exit_code = 1
