"""Exception hierarchy shared across the toolkit."""


class PplpError(Exception):
    """Base class for all toolkit errors."""


class InvalidIntervalError(PplpError):
    """An integration or query interval has its bounds out of order."""


class DegenerateInputError(PplpError):
    """Input data cannot support the requested operation (too few
    distinct values, empty column, bin count out of range)."""


class ContractError(PplpError):
    """A documented precondition was violated by the caller."""


class ParseError(PplpError):
    """Syntax or semantic error in program text, with source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}" if column is not None else f"{line}: {message}"
        super().__init__(message)


class InconsistentEvidenceError(PplpError):
    """Conditioning on evidence whose probability is zero."""


class ChoiceSpaceError(PplpError):
    """The joint choice space exceeds the configured enumeration cap."""

    def __init__(self, size_estimate: float, cap: int):
        self.size_estimate = size_estimate
        self.cap = cap
        super().__init__(
            f"choice space of about {size_estimate:.3g} joint assignments "
            f"exceeds the cap of {cap}; raise the cap to force enumeration"
        )
