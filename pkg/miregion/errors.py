class MiRegionError(Exception):
    """Base class for every error raised by the package.

    `exit_code` is what the CLI returns when the error escapes a command.
    """

    exit_code = 1


class PmfValidationError(MiRegionError, ValueError):
    exit_code = 3


class EmptyMatrix(PmfValidationError):
    pass


class NegativeEntry(PmfValidationError):
    pass


class MassDeviationTooLarge(PmfValidationError):
    pass


class DimensionMismatch(PmfValidationError):
    pass


class OuterBoundViolated(PmfValidationError):
    pass


class NotIndependent(PmfValidationError):
    pass


class EpsilonTooLarge(PmfValidationError):
    pass


class InvalidPath(PmfValidationError):
    pass


class InvalidCycle(PmfValidationError):
    pass


class SizeLimitError(MiRegionError, ValueError):
    exit_code = 3


class AlphabetTooLarge(SizeLimitError):
    pass


class GraphTooLarge(SizeLimitError):
    pass


class EnumerationTooLarge(SizeLimitError):
    pass


class OracleTooLarge(SizeLimitError):
    pass


class SolveError(MiRegionError):
    exit_code = 4


class Infeasible(SolveError):
    pass


class InfeasibleT(SolveError, ValueError):
    pass


class ConditionNotMet(SolveError, ValueError):
    """A construction's structural precondition does not hold.

    `predicate` names the failing check (e.g. "max_condition", "has_cycle").
    """

    def __init__(self, message: str, predicate: str = ""):
        super().__init__(message)
        self.predicate = predicate


class DegenerateRatio(SolveError, ValueError):
    pass


class ParseError(MiRegionError):
    """Input is not JSON or does not match the pmf document schema."""

    exit_code = 2
