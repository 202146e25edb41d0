class ParameterError(ValueError):
    """Invalid argument (rank out of range, shape mismatch, bad handle...)."""


class DegenerateInputError(ValueError):
    pass


class MatrixFormatError(ValueError):
    """Malformed matrix CSV. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(RuntimeError):
    def __init__(self, message, iterations):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class EnumerationBudgetError(RuntimeError):
    """Raised when a subset enumeration would exceed its submatrix budget.

    ``partial`` holds whatever was computed before the cap was hit.
    """

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)
