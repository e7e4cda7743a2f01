"""Custom exceptions for BoundRelax."""
from typing import Optional


class SolverException(Exception):
    """Base exception for BoundRelax."""
    pass


class ConfigurationError(SolverException):
    """Invalid configuration or command-line usage."""
    pass


class ParseError(SolverException):
    """SMT-LIB input could not be read."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class UnsupportedConstructError(ParseError):
    """Input uses a construct outside the supported SMT-LIB subset."""
    pass


class FragmentError(SolverException):
    """Exists-forall input falls outside the transformable fragment."""
    pass


class ContractViolation(SolverException):
    """An engine was called with arguments breaking its preconditions."""
    pass


class LinearizationError(SolverException):
    """A non-linear monomial cannot be covered by the chosen split variables."""
    pass


class BudgetExhausted(SolverException):
    """Cooperative time or search budget ran out."""
    pass


class OracleError(SolverException):
    """Brute-force enumeration refused the instance."""
    pass


class ExportError(SolverException):
    """Result or report formatting failed."""
    pass


class BenchError(SolverException):
    """Benchmark run could not be set up."""
    pass
