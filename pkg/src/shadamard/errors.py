"""Exception types shared across the package."""


class HadamardError(Exception):
    """Base class for all package errors."""


class DimensionError(HadamardError, ValueError):
    """Operands have incompatible or invalid orders."""


class CapacityError(HadamardError):
    """An enumeration or construction would exceed a configured size cap."""

    def __init__(self, message, required=None, limit=None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class PreconditionError(HadamardError, ValueError):
    """Input does not satisfy an operation's precondition."""


class SearchFailure(HadamardError, RuntimeError):
    """A stochastic construction ran out of budget.

    ``partial`` carries whatever the search produced before giving up
    (an RVS trace or the lowest-energy annealer state).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MatrixParseError(HadamardError, ValueError):
    def __init__(self, message, line, column=None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column
