"""Exception types shared across the package."""


class DigcommError(Exception):
    """Base class for all package errors."""


class ParseError(DigcommError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormatError(DigcommError):
    pass


class ParameterError(DigcommError, ValueError):
    pass


class InvalidModificationError(DigcommError, ValueError):
    pass


class NumericalFailure(DigcommError, ArithmeticError):
    """An iterative kernel did not converge.

    ``diagnostics`` carries whatever the kernel knew when it gave up
    (iteration count, last residual, last gap between iterates).
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            details = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class CapacityError(DigcommError):
    pass


class MethodInapplicable(DigcommError):
    """A centrality method cannot be evaluated on this graph (e.g. eig on a DAG)."""
