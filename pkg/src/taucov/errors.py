"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class TaucovError(Exception):
    """Base class for all errors raised by taucov."""

    exit_code = 1


class DomainError(TaucovError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class DataError(TaucovError, ValueError):
    """Malformed input data; ``row``/``column`` locate the offending cell (1-based)."""

    exit_code = 2

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NumericalError(TaucovError, ArithmeticError):
    """A computation failed numerically (singular system, non-convergence)."""

    exit_code = 3

    def __init__(self, message, condition_estimate=None):
        self.condition_estimate = condition_estimate
        if condition_estimate is not None:
            message = f"{message} (condition estimate {condition_estimate:.3e})"
        super().__init__(message)
