"""Custom exceptions for the neuromorphic aging simulator."""

from typing import Optional, Tuple


class AgingSimError(Exception):
    """Base exception for all simulator errors."""

    def __init__(self, message: str):
        """Initialize the exception.

        Args:
            message: Error message
        """
        self.message = message
        super().__init__(self.message)


class ConfigurationError(AgingSimError):
    """Exception raised for invalid, unknown or missing configuration values."""

    def __init__(self, message: str, field: Optional[str] = None):
        """Initialize the exception.

        Args:
            message: Error message
            field: Configuration key that failed validation
        """
        self.field = field
        field_info = f" (Field: {field})" if field else ""
        super().__init__(f"Configuration Error: {message}{field_info}")


class DomainError(AgingSimError):
    """Exception raised when an argument lies outside a function's domain."""

    def __init__(self, message: str, argument: Optional[str] = None):
        """Initialize the exception.

        Args:
            message: Error message
            argument: Name of the offending argument
        """
        self.argument = argument
        argument_info = f" (Argument: {argument})" if argument else ""
        super().__init__(f"Domain Error: {message}{argument_info}")


class StateError(AgingSimError):
    """Exception raised when an aging state would move backwards in time."""

    def __init__(self, message: str):
        super().__init__(f"State Error: {message}")


class StructuralError(AgingSimError):
    """Exception raised for out-of-range ids or mismatched neuron sets."""

    def __init__(self, message: str):
        super().__init__(f"Structural Error: {message}")


class SchedulingError(AgingSimError):
    """Exception raised when a de-stress window would overlap another one."""

    def __init__(self, message: str, tile: Optional[int] = None):
        """Initialize the exception.

        Args:
            message: Error message
            tile: Tile whose de-stress was double-booked
        """
        self.tile = tile
        tile_info = f" (Tile: {tile})" if tile is not None else ""
        super().__init__(f"Scheduling Error: {message}{tile_info}")


class TraceFormatError(AgingSimError):
    """Exception raised when a spike trace cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        """Initialize the exception.

        Args:
            message: Error message
            line_number: 1-based line number of the offending line
        """
        self.line_number = line_number
        line_info = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"Trace Error: {line_info}{message}")


class ConvergenceError(AgingSimError):
    """Exception raised when calibration fails to converge."""

    def __init__(self, message: str, bracket: Optional[Tuple[float, float]] = None):
        """Initialize the exception.

        Args:
            message: Error message
            bracket: Search bracket at the time of failure
        """
        self.bracket = bracket
        bracket_info = f" (Bracket: [{bracket[0]!r}, {bracket[1]!r}])" if bracket else ""
        super().__init__(f"Convergence Error: {message}{bracket_info}")


class InternalError(AgingSimError):
    """Exception raised when an engine invariant is violated (a bug, not user error)."""

    def __init__(self, message: str):
        super().__init__(f"Internal Error: {message}")
