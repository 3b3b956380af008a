"""Data models for the tiled neuromorphic chip."""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..aging.models import AgingParams, Environment, NeuronAgingState
from ..common.exceptions import ConfigurationError
from ..common.models import NS_PER_SECOND
from ..common.utils import check_keys, coerce_float, coerce_int


class PumpVoltage(str, Enum):
    """Charge-pump level of a tile."""

    DESTRESS = "V_destress"
    IDLE = "V_idle"
    SPIKE = "V_spike"

    def volts(self, env: Environment) -> float:
        """Voltage of this level under ``env``."""
        if self is PumpVoltage.DESTRESS:
            return env.v_destress
        if self is PumpVoltage.IDLE:
            return env.v_idle
        return env.v_spike


@dataclass(frozen=True)
class ChipConfig:
    """Geometry and bookkeeping constants of the chip.

    ``crosspoints_per_tile`` defaults to input x output neurons.
    ``switch_bandwidth`` (events/s) is recorded but not enforced.
    """

    num_tiles: int = 12
    neurons_per_tile: int = 128
    input_neurons_per_tile: int = 128
    crosspoints_per_tile: Optional[int] = None
    counter_width_bits: int = 16
    routing_latency: float = 0.0
    switch_bandwidth: float = 1.8e9
    energy_per_spike: float = 50e-12
    energy_per_routing: float = 147e-12

    def __post_init__(self):
        for name in ("num_tiles", "neurons_per_tile", "input_neurons_per_tile"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"must be >= 1, got {getattr(self, name)!r}", field=f"chip.{name}")
        expected = self.input_neurons_per_tile * self.neurons_per_tile
        if self.crosspoints_per_tile is None:
            object.__setattr__(self, "crosspoints_per_tile", expected)
        elif self.crosspoints_per_tile != expected:
            raise ConfigurationError(
                f"crossbar of {self.input_neurons_per_tile}x{self.neurons_per_tile} has {expected} crosspoints, "
                f"got {self.crosspoints_per_tile}",
                field="chip.crosspoints_per_tile",
            )
        if not 1 <= self.counter_width_bits <= 62:
            raise ConfigurationError(
                f"must lie in [1, 62], got {self.counter_width_bits!r}", field="chip.counter_width_bits"
            )
        for name in ("routing_latency", "switch_bandwidth", "energy_per_spike", "energy_per_routing"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"must be >= 0, got {getattr(self, name)!r}", field=f"chip.{name}")

    @property
    def counter_max(self) -> int:
        """Saturation value of one spike counter."""
        return (1 << self.counter_width_bits) - 1

    @property
    def counter_storage_bits(self) -> int:
        """Total storage of the software spike counters."""
        return self.num_tiles * self.neurons_per_tile * self.counter_width_bits

    @property
    def total_neurons(self) -> int:
        return self.num_tiles * self.neurons_per_tile

    def with_num_tiles(self, num_tiles: int) -> "ChipConfig":
        """Return a copy with a different tile count."""
        return replace(self, num_tiles=num_tiles)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChipConfig":
        """Build a chip configuration from a ``[chip]`` config table.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        check_keys("chip", data, cls.__dataclass_fields__)
        ints = ("num_tiles", "neurons_per_tile", "input_neurons_per_tile", "crosspoints_per_tile", "counter_width_bits")
        values = {}
        for key, value in data.items():
            values[key] = coerce_int(f"chip.{key}", value) if key in ints else coerce_float(f"chip.{key}", value)
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class AerEvent(NamedTuple):
    """One address event: a spike of ``neuron`` in ``tile`` at ``time_ns``.

    Tuple order gives the encoder's ordering: time, then tile, then neuron.
    """

    time_ns: int
    tile: int
    neuron: int

    @property
    def time(self) -> float:
        return self.time_ns / NS_PER_SECOND


@dataclass(frozen=True)
class TileSnapshot:
    """Immutable copy of a tile's state."""

    tile_id: int
    pump_voltage: PumpVoltage
    busy_until_ns: int
    counters: Tuple[int, ...]
    aging_recoverable: Tuple[float, ...]
    aging_permanent: Tuple[float, ...]
    last_update_ns: Tuple[int, ...]

    def neuron_state(self, neuron: int) -> NeuronAgingState:
        return NeuronAgingState(
            aging_recoverable=self.aging_recoverable[neuron],
            aging_permanent=self.aging_permanent[neuron],
            last_update=self.last_update_ns[neuron] / NS_PER_SECOND,
        )

    def totals(self) -> Tuple[float, ...]:
        return tuple(r + p for r, p in zip(self.aging_recoverable, self.aging_permanent))


@dataclass(frozen=True)
class ChipSnapshot:
    """Immutable copy of the whole chip."""

    tiles: Tuple[TileSnapshot, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"tiles": [asdict(tile) for tile in self.tiles]}


class TileState:
    """Mutable state of one tile, owned by the simulation engine.

    Neuron aging is held column-wise in numpy arrays so the policy's
    per-tile view can be computed without touching every neuron object.
    ``counters`` is a row view into the chip-wide counter bank.
    """

    def __init__(self, tile_id: int, neurons: int, counters: np.ndarray):
        """Initialize an idle, unaged tile.

        Args:
            tile_id: Tile index
            neurons: Output neurons in the tile
            counters: This tile's row of the chip counter bank
        """
        self.tile_id = tile_id
        self.pump_voltage = PumpVoltage.IDLE
        self.busy_until_ns = 0
        self.last_spike_ns = -1
        self.destress_started_ns: Optional[int] = None
        self.counters = counters
        self.aging_recoverable = np.zeros(neurons, dtype=np.float64)
        self.aging_permanent = np.zeros(neurons, dtype=np.float64)
        self.last_update_ns = np.zeros(neurons, dtype=np.int64)

    @property
    def neurons(self) -> int:
        return self.aging_recoverable.shape[0]

    def is_busy(self, now_ns: int) -> bool:
        """True while the tile is offline for de-stress."""
        return now_ns < self.busy_until_ns

    def pump_at(self, now_ns: int) -> PumpVoltage:
        """Charge-pump level at ``now_ns``; V_spike holds only at the instant of an emission."""
        if self.is_busy(now_ns):
            return PumpVoltage.DESTRESS
        if now_ns == self.last_spike_ns:
            return PumpVoltage.SPIKE
        return PumpVoltage.IDLE

    def neuron_state(self, neuron: int) -> NeuronAgingState:
        return NeuronAgingState(
            aging_recoverable=float(self.aging_recoverable[neuron]),
            aging_permanent=float(self.aging_permanent[neuron]),
            last_update=int(self.last_update_ns[neuron]) / NS_PER_SECOND,
        )

    def store(self, neuron: int, state: NeuronAgingState, at_ns: int) -> None:
        """Write back a neuron's state, exact as of ``at_ns``."""
        self.aging_recoverable[neuron] = state.aging_recoverable
        self.aging_permanent[neuron] = state.aging_permanent
        self.last_update_ns[neuron] = at_ns

    def projected_totals(self, now_ns: int, params: AgingParams) -> np.ndarray:
        """Total aging of every neuron at ``now_ns``, including idle recovery since its last update."""
        gap = np.maximum(now_ns - self.last_update_ns, 0) / NS_PER_SECOND
        return self.aging_permanent + self.aging_recoverable * np.exp(-gap / params.tau_recover_idle)

    def max_total(self, now_ns: int, params: AgingParams) -> float:
        """Maximum neuron aging in the tile at ``now_ns``."""
        return float(self.projected_totals(now_ns, params).max())

    def destressed_max_total(self, now_ns: int, window_ns: int, params: AgingParams) -> float:
        """Maximum neuron aging the tile would keep after a window of ``window_ns`` started at ``now_ns``.

        Mirrors the update :func:`begin_destress` applies, without changing the tile.
        """
        gap = np.maximum(now_ns - self.last_update_ns, 0) / NS_PER_SECOND
        recoverable = self.aging_recoverable * np.exp(-gap / params.tau_recover_idle)
        converted = recoverable * -np.expm1(-gap / params.tau_convert)
        remaining = (recoverable - converted) * np.exp(-(window_ns / NS_PER_SECOND) / params.tau_recover_destress)
        return float((self.aging_permanent + converted + remaining).max())

    def snapshot(self) -> TileSnapshot:
        return TileSnapshot(
            tile_id=self.tile_id,
            pump_voltage=self.pump_voltage,
            busy_until_ns=self.busy_until_ns,
            counters=tuple(int(c) for c in self.counters),
            aging_recoverable=tuple(self.aging_recoverable.tolist()),
            aging_permanent=tuple(self.aging_permanent.tolist()),
            last_update_ns=tuple(self.last_update_ns.tolist()),
        )


class ChipState:
    """All tiles of a chip plus the shared spike-counter bank."""

    def __init__(self, config: ChipConfig):
        """Initialize a fresh chip.

        Args:
            config: Chip geometry
        """
        self.config = config
        self.counters = np.zeros((config.num_tiles, config.neurons_per_tile), dtype=np.int64)
        self.tiles: List[TileState] = [
            TileState(tile_id, config.neurons_per_tile, self.counters[tile_id]) for tile_id in range(config.num_tiles)
        ]

    def snapshot(self) -> ChipSnapshot:
        return ChipSnapshot(tiles=tuple(tile.snapshot() for tile in self.tiles))
