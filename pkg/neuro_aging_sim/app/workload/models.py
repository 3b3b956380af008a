"""Data models for spike workloads."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..common.exceptions import ConfigurationError, StructuralError
from ..common.models import NS_PER_SECOND
from ..common.utils import check_keys, coerce_float, coerce_int

RATE_DISTRIBUTIONS = ("uniform", "triangular")


class SpikeEvent(NamedTuple):
    """One spike of ``neuron`` in ``tile`` at ``time_ns``."""

    time_ns: int
    tile: int
    neuron: int

    @property
    def time(self) -> float:
        return self.time_ns / NS_PER_SECOND


@dataclass(frozen=True)
class TraceHeader:
    """Metadata carried by ``#key=value`` lines of a trace file."""

    trace_id: str = ""
    time_unit: str = "s"
    chip_hash: str = ""
    duration_ns: Optional[int] = None
    extra: Tuple[Tuple[str, str], ...] = ()

    def with_extra(self, **values: str) -> "TraceHeader":
        """Return a copy with additional metadata keys."""
        merged = dict(self.extra)
        merged.update(values)
        return TraceHeader(
            trace_id=self.trace_id,
            time_unit=self.time_unit,
            chip_hash=self.chip_hash,
            duration_ns=self.duration_ns,
            extra=tuple(sorted(merged.items())),
        )


@dataclass(frozen=True)
class SpikeTrace:
    """An ordered spike workload.

    Events are sorted by time with ties broken by tile then neuron.
    """

    header: TraceHeader = field(default_factory=TraceHeader)
    events: Tuple[SpikeEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    @property
    def duration_ns(self) -> int:
        """Declared duration, or the time of the last event when none is declared."""
        if self.header.duration_ns is not None:
            return self.header.duration_ns
        return self.events[-1].time_ns if self.events else 0

    @property
    def duration(self) -> float:
        return self.duration_ns / NS_PER_SECOND

    def neurons(self) -> List[Tuple[int, int]]:
        """Sorted (tile, neuron) pairs that fire at least once."""
        return sorted({(e.tile, e.neuron) for e in self.events})

    def times_by_neuron(self) -> Dict[Tuple[int, int], np.ndarray]:
        """Spike times in nanoseconds grouped by (tile, neuron), in firing order."""
        grouped: Dict[Tuple[int, int], List[int]] = {}
        for event in self.events:
            grouped.setdefault((event.tile, event.neuron), []).append(event.time_ns)
        return {key: np.asarray(grouped[key], dtype=np.int64) for key in sorted(grouped)}

    def validate(self, num_tiles: int, neurons_per_tile: int) -> None:
        """Check that every event addresses a neuron of the chip.

        Raises:
            StructuralError: On the first out-of-range event
        """
        for index, event in enumerate(self.events):
            if not (0 <= event.tile < num_tiles and 0 <= event.neuron < neurons_per_tile):
                raise StructuralError(
                    f"event {index} addresses ({event.tile}, {event.neuron}) "
                    f"on a chip of {num_tiles} tiles x {neurons_per_tile} neurons"
                )


@dataclass(frozen=True)
class PoissonWorkloadSpec:
    """Recipe for a synthetic Poisson workload.

    Exactly one rate source is used: a per-neuron ``rates`` table (tile-major
    order), a constant ``rate``, or a ``rate_min``/``rate_max`` range sampled
    per neuron with ``distribution``. ``rate_mean`` fixes the mode of the
    triangular distribution.
    """

    duration: float
    num_tiles: int = 12
    neurons_per_tile: int = 128
    rate: Optional[float] = None
    rates: Optional[Tuple[float, ...]] = None
    rate_min: Optional[float] = None
    rate_max: Optional[float] = None
    rate_mean: Optional[float] = None
    distribution: str = "uniform"
    seed: int = 0
    trace_id: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigurationError(f"must be > 0, got {self.duration!r}", field="workload.poisson.duration")
        if self.num_tiles < 1 or self.neurons_per_tile < 1:
            raise ConfigurationError("tile and neuron counts must be >= 1", field="workload.poisson.num_tiles")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(
                f"must be a 64-bit unsigned integer, got {self.seed!r}", field="workload.poisson.seed"
            )
        ranged = self.rate_min is not None or self.rate_max is not None
        sources = [self.rate is not None, self.rates is not None, ranged]
        if sum(sources) != 1:
            raise ConfigurationError(
                "exactly one of rate, rates or rate_min/rate_max is required", field="workload.poisson.rate"
            )
        if self.rate is not None and not (math.isfinite(self.rate) and self.rate >= 0):
            raise ConfigurationError(f"must be >= 0, got {self.rate!r}", field="workload.poisson.rate")
        if self.rates is not None:
            expected = self.num_tiles * self.neurons_per_tile
            if len(self.rates) != expected:
                raise ConfigurationError(
                    f"expected {expected} rates, got {len(self.rates)}", field="workload.poisson.rates"
                )
            if any(not (math.isfinite(r) and r >= 0) for r in self.rates):
                raise ConfigurationError("rates must be finite and >= 0", field="workload.poisson.rates")
        if ranged:
            self._check_range()

    def _check_range(self) -> None:
        if self.rate_min is None or self.rate_max is None:
            raise ConfigurationError("rate_min and rate_max go together", field="workload.poisson.rate_max")
        if not 0 <= self.rate_min <= self.rate_max < math.inf:
            raise ConfigurationError(
                f"need 0 <= rate_min <= rate_max, got ({self.rate_min!r}, {self.rate_max!r})",
                field="workload.poisson.rate_min",
            )
        if self.distribution not in RATE_DISTRIBUTIONS:
            raise ConfigurationError(
                f"unknown distribution {self.distribution!r}, expected one of {RATE_DISTRIBUTIONS}",
                field="workload.poisson.distribution",
            )
        if self.rate_mean is not None:
            if not self.rate_min <= self.rate_mean <= self.rate_max:
                raise ConfigurationError(
                    f"mean {self.rate_mean!r} outside the range", field="workload.poisson.rate_mean"
                )
            if self.distribution == "uniform" and not math.isclose(self.rate_mean, (self.rate_min + self.rate_max) / 2):
                raise ConfigurationError(
                    "a uniform range has its mean at the midpoint", field="workload.poisson.rate_mean"
                )
            if self.distribution == "triangular" and not self.rate_min <= self.triangular_mode <= self.rate_max:
                raise ConfigurationError(
                    f"mean {self.rate_mean!r} is not reachable by a triangular distribution on the range",
                    field="workload.poisson.rate_mean",
                )

    @property
    def triangular_mode(self) -> float:
        """Mode of the triangular rate distribution, derived from its mean."""
        if self.rate_mean is None:
            return (self.rate_min + self.rate_max) / 2
        return 3 * self.rate_mean - self.rate_min - self.rate_max

    @property
    def total_neurons(self) -> int:
        return self.num_tiles * self.neurons_per_tile

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PoissonWorkloadSpec":
        """Build a spec from a ``[workload.poisson]`` config table.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        check_keys("workload.poisson", data, cls.__dataclass_fields__)
        if "duration" not in data:
            raise ConfigurationError("missing required key", field="workload.poisson.duration")
        values: Dict[str, Any] = {}
        for key, value in data.items():
            name = f"workload.poisson.{key}"
            if key in ("num_tiles", "neurons_per_tile", "seed"):
                values[key] = coerce_int(name, value)
            elif key in ("distribution", "trace_id"):
                if not isinstance(value, str):
                    raise ConfigurationError(f"expected a string, got {value!r}", field=name)
                values[key] = value
            elif key == "rates":
                if not isinstance(value, list):
                    raise ConfigurationError(f"expected a list, got {value!r}", field=name)
                values[key] = tuple(coerce_float(name, v) for v in value)
            else:
                values[key] = coerce_float(name, value)
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "duration": self.duration,
            "num_tiles": self.num_tiles,
            "neurons_per_tile": self.neurons_per_tile,
            "rate": self.rate,
            "rates": list(self.rates) if self.rates is not None else None,
            "rate_min": self.rate_min,
            "rate_max": self.rate_max,
            "rate_mean": self.rate_mean,
            "distribution": self.distribution,
            "seed": self.seed,
            "trace_id": self.trace_id,
        }
        return {k: v for k, v in data.items() if v is not None}


@dataclass(frozen=True)
class NeuronRateStats:
    """Firing statistics of one neuron over fixed windows."""

    tile: int
    neuron: int
    count: int
    rate_min: float
    rate_avg: float
    rate_max: float


@dataclass(frozen=True)
class TraceStats:
    """Per-neuron and chip-level firing-rate statistics.

    An empty trace yields ``neurons == ()`` and ``None`` chip figures.
    """

    duration: float
    window: float
    neurons: Tuple[NeuronRateStats, ...] = ()
    chip_rate_min: Optional[float] = None
    chip_rate_avg: Optional[float] = None
    chip_rate_max: Optional[float] = None
    histogram_edges: Tuple[float, ...] = ()
    histogram_counts: Tuple[int, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.neurons

    @property
    def total_spikes(self) -> int:
        return sum(n.count for n in self.neurons)
