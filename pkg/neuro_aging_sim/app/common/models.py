"""Common data models shared across the simulator.

Simulation time is kept in integer nanoseconds so that event ordering and
tie-breaks are exact on every platform. Seconds only appear at the edges:
configuration values, trace files and reports.
"""

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN

from .exceptions import DomainError

NS_PER_SECOND = 1_000_000_000

_NS_QUANTUM = Decimal(1)


def seconds_to_ns(value: float) -> int:
    """Convert a duration or timestamp in seconds to integer nanoseconds.

    The decimal representation of ``value`` is used, so ``0.1`` maps to
    exactly ``100_000_000`` rather than to its nearest binary neighbour.

    Args:
        value: Time in seconds

    Returns:
        Time in nanoseconds, rounded half-to-even

    Raises:
        DomainError: If value is not finite
    """
    if isinstance(value, int):
        return value * NS_PER_SECOND
    if not math.isfinite(value):
        raise DomainError(f"time must be finite, got {value!r}", argument="value")
    return int((Decimal(repr(float(value))) * NS_PER_SECOND).quantize(_NS_QUANTUM, rounding=ROUND_HALF_EVEN))


def ns_to_seconds(ns: int) -> float:
    """Convert integer nanoseconds to float seconds."""
    return ns / NS_PER_SECOND


def parse_seconds(text: str) -> int:
    """Parse a decimal seconds literal into integer nanoseconds.

    Args:
        text: Decimal literal such as ``"0.005"`` or ``"12"``

    Returns:
        Time in nanoseconds

    Raises:
        DomainError: If the literal is not a finite decimal number
    """
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise DomainError(f"not a decimal number: {text!r}", argument="time")
    if not value.is_finite():
        raise DomainError(f"time must be finite, got {text!r}", argument="time")
    return int((value * NS_PER_SECOND).quantize(_NS_QUANTUM, rounding=ROUND_HALF_EVEN))


def format_seconds(ns: int) -> str:
    """Format integer nanoseconds as a canonical seconds literal with 9 decimals."""
    sign = "-" if ns < 0 else ""
    whole, frac = divmod(abs(ns), NS_PER_SECOND)
    return f"{sign}{whole}.{frac:09d}"


@dataclass(frozen=True)
class ReportStamp:
    """Identity of a run, embedded in every report it produces."""

    config_hash: str
    seed: int

    def as_comment(self) -> str:
        """Render the stamp as a ``#``-prefixed metadata line."""
        return f"# config_hash={self.config_hash} seed={self.seed}"

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.seed}
