"""Exception hierarchy shared by all pipeline stages."""


class PMGoalError(Exception):
    """Base class for every error raised by pmgoal."""


class ValidationError(PMGoalError, ValueError):
    """Input violates a documented precondition."""


class SchemaError(ValidationError):
    """A required CSV column is missing."""


class ParseError(ValidationError):
    """A cell could not be parsed as a real number."""

    def __init__(self, message, row_index=None):
        super().__init__(message)
        self.row_index = row_index


class DomainError(ValidationError):
    """Numeric argument outside its allowed range."""


class InsufficientDataError(ValidationError):
    pass


class InfeasibleError(ValidationError):
    """Requested configuration cannot be realised on the given data."""


class DiscoveryError(PMGoalError):
    pass


class AlignmentError(PMGoalError):
    pass


class OracleInfeasibleError(PMGoalError):
    """Brute-force oracle exceeded its expansion budget."""


class TuningError(PMGoalError):
    pass
