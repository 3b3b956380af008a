"""Data models for the discrete-event simulation engine."""

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Any, Dict, NamedTuple, Optional, Tuple

from ..aging.models import AgingParams, Environment, VthCalibration
from ..common.exceptions import ConfigurationError
from ..common.models import NS_PER_SECOND, ReportStamp
from ..common.utils import config_hash
from ..hw.models import ChipConfig, ChipSnapshot
from ..policy.models import DestressRecord, PolicyConfig, PolicyKind
from ..workload.models import SpikeTrace


class EventKind(IntEnum):
    """Event kinds; the value is the priority at equal times."""

    DESTRESS_END = 0
    SPIKE_DUE = 1
    POLICY_TICK = 2


class SimEvent(NamedTuple):
    """A scheduled event, ordered by (time, kind priority, sequence)."""

    time_ns: int
    kind: EventKind
    sequence: int
    tile: int = -1
    neuron: int = -1


class TrajectorySample(NamedTuple):
    """Aging right after one emitted spike."""

    time_ns: int
    tile: int
    neuron: int
    aging_total: float
    tile_peak: float


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulation run depends on besides the trace."""

    chip: ChipConfig = field(default_factory=ChipConfig)
    env: Environment = field(default_factory=Environment)
    aging: AgingParams = field(default_factory=AgingParams)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    calibration: VthCalibration = field(default_factory=VthCalibration)
    seed: int = 0
    sample_trajectory: bool = False
    trajectory_stride: int = 1

    def __post_init__(self):
        if self.trajectory_stride < 1:
            raise ConfigurationError(
                f"must be >= 1, got {self.trajectory_stride!r}", field="trajectory_stride"
            )

    def with_policy(self, kind: PolicyKind) -> "RunConfig":
        return replace(self, policy=self.policy.with_kind(kind))

    def with_temperature(self, temperature: float) -> "RunConfig":
        return replace(self, env=self.env.at_temperature(temperature))

    def with_num_tiles(self, num_tiles: int) -> "RunConfig":
        return replace(self, chip=self.chip.with_num_tiles(num_tiles))

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        """Configuration echo."""
        return {
            "chip": self.chip.to_dict(),
            "environment": self.env.to_dict(),
            "aging": self.aging.to_dict(),
            "policy": self.policy.to_dict(),
            "calibration": self.calibration.to_dict(),
            "seed": self.seed,
            "sample_trajectory": self.sample_trajectory,
            "trajectory_stride": self.trajectory_stride,
        }

    @property
    def config_hash(self) -> str:
        return config_hash(self.to_dict())


@dataclass(frozen=True, eq=False)
class RunResult:
    """Outcome of one simulation run.

    ``wall_clock`` is the only field that varies between identical runs; it
    is logged but never written to report files.
    """

    policy: str
    managed_trace: SpikeTrace
    destress_log: Tuple[DestressRecord, ...]
    snapshot: ChipSnapshot
    config_echo: Dict[str, Any]
    config_hash: str
    seed: int
    end_ns: int
    peak_tile_aging: Tuple[float, ...]
    event_counts: Dict[str, int]
    deferred_spikes: int
    skipped_destress: int
    energy_j: float
    trajectory: Optional[Tuple[TrajectorySample, ...]] = None
    wall_clock: float = 0.0

    @property
    def destress_count(self) -> int:
        return len(self.destress_log)

    @property
    def peak_aging(self) -> float:
        """Highest total aging any neuron reached during the run."""
        return max(self.peak_tile_aging, default=0.0)

    @property
    def end_time(self) -> float:
        return self.end_ns / NS_PER_SECOND

    @property
    def stamp(self) -> ReportStamp:
        return ReportStamp(config_hash=self.config_hash, seed=self.seed)


@dataclass(frozen=True, eq=False)
class SweepCell:
    """One point of a parameter sweep; exactly one of result and error is set."""

    policy: str
    temperature: float
    num_tiles: int
    seed: int
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def coordinates(self) -> Tuple[str, float, int, int]:
        return (self.policy, self.temperature, self.num_tiles, self.seed)
