"""Exception hierarchy for the local hash counter.

Each exception family maps onto one CLI exit code, see :mod:`local_hash_counter.cli`.
"""

from __future__ import annotations


class LocalHashCounterError(Exception):
    """Base class for all errors raised by this package."""


class DimacsParseError(LocalHashCounterError, ValueError):
    """Raised when DIMACS input is malformed.

    :param message: Description of the problem.
    :type message: str
    :param line_number: 1-based line number where the problem was found.
    :type line_number: int
    """

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class VariableCountMismatchError(LocalHashCounterError, ValueError):
    """Raised when two formulas over different variable counts are combined."""


class ConfigurationError(LocalHashCounterError, ValueError):
    """Raised when counter or analysis parameters are outside their valid range."""


class SolverConfigurationError(ConfigurationError):
    """Raised when an external solver cannot be set up."""


class OracleError(LocalHashCounterError, RuntimeError):
    """Raised when a SAT oracle cannot give a definite answer."""


class ResourceCapError(LocalHashCounterError, ValueError):
    """Raised when an input exceeds an enumeration or exact-mode cap."""
