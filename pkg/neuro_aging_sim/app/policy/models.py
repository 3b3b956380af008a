"""Data models for reliability-management policies."""

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, NamedTuple, Optional

from ..common.exceptions import ConfigurationError
from ..common.models import NS_PER_SECOND, seconds_to_ns
from ..common.utils import check_keys, coerce_float, coerce_int


class PolicyKind(str, Enum):
    """Available reliability-management strategies."""

    NONE = "none"
    FIXED_INTERVAL = "fixed_interval"
    DYNAMIC = "dynamic"


class Trigger(str, Enum):
    """Why a de-stress window was issued."""

    HARD = "hard"
    OPPORTUNISTIC = "opportunistic"
    PERIODIC = "periodic"


class ActionKind(str, Enum):
    """Decision a policy hands back to the engine."""

    NONE = "none"
    ENQUEUE = "enqueue"
    DESTRESS_NOW = "destress_now"


class Action(NamedTuple):
    """One policy decision about one tile."""

    kind: ActionKind
    tile: int
    trigger: Optional[Trigger] = None


@dataclass(frozen=True)
class PolicyConfig:
    """Policy selection and parameters.

    ``th_a``, ``soft_fraction`` and ``idle_predictor_window`` drive the
    dynamic policy; ``interval`` and ``staggered`` the fixed-interval one;
    ``tdsc`` is the de-stress window of both.
    """

    kind: PolicyKind = PolicyKind.NONE
    th_a: float = 1.0
    soft_fraction: float = 0.9
    interval: float = 0.1
    tdsc: float = 0.01
    idle_predictor_window: int = 8
    staggered: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", PolicyKind(self.kind))
        except ValueError:
            choices = ", ".join(k.value for k in PolicyKind)
            raise ConfigurationError(f"unknown policy {self.kind!r}, expected one of {choices}", field="policy.kind")
        if not self.th_a > 0:
            raise ConfigurationError(f"must be > 0, got {self.th_a!r}", field="policy.th_a")
        if not 0 < self.soft_fraction <= 1:
            raise ConfigurationError(f"must lie in (0, 1], got {self.soft_fraction!r}", field="policy.soft_fraction")
        for name in ("interval", "tdsc"):
            value = getattr(self, name)
            if not 0 < value < float("inf"):
                raise ConfigurationError(f"must be finite and > 0, got {value!r}", field=f"policy.{name}")
            if seconds_to_ns(value) < 1:
                raise ConfigurationError(f"below the 1 ns clock resolution: {value!r}", field=f"policy.{name}")
        if self.idle_predictor_window < 1:
            raise ConfigurationError(
                f"must be >= 1, got {self.idle_predictor_window!r}", field="policy.idle_predictor_window"
            )
        if self.kind is PolicyKind.FIXED_INTERVAL and not self.tdsc < self.interval:
            raise ConfigurationError(
                f"de-stress window {self.tdsc!r} s must be shorter than the interval {self.interval!r} s",
                field="policy.tdsc",
            )

    @property
    def tdsc_ns(self) -> int:
        return seconds_to_ns(self.tdsc)

    @property
    def interval_ns(self) -> int:
        return seconds_to_ns(self.interval)

    @property
    def soft_threshold(self) -> float:
        """Aging at which a tile joins the de-stress queue."""
        return self.soft_fraction * self.th_a

    def with_kind(self, kind: PolicyKind) -> "PolicyConfig":
        """Return a copy selecting another policy."""
        data = self.to_dict()
        data["kind"] = PolicyKind(kind)
        return PolicyConfig(**data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PolicyConfig":
        """Build a policy configuration from a ``[policy]`` config table.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        check_keys("policy", data, cls.__dataclass_fields__)
        values: Dict[str, Any] = {}
        for key, value in data.items():
            if key == "kind":
                values[key] = value
            elif key == "idle_predictor_window":
                values[key] = coerce_int("policy.idle_predictor_window", value)
            elif key == "staggered":
                if not isinstance(value, bool):
                    raise ConfigurationError(f"expected true or false, got {value!r}", field="policy.staggered")
                values[key] = value
            else:
                values[key] = coerce_float(f"policy.{key}", value)
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "th_a": self.th_a,
            "soft_fraction": self.soft_fraction,
            "interval": self.interval,
            "tdsc": self.tdsc,
            "idle_predictor_window": self.idle_predictor_window,
            "staggered": self.staggered,
        }


class QueueEntry(NamedTuple):
    """A tile waiting for an opportunistic de-stress window."""

    tile: int
    enqueued_ns: int
    aging_at_enqueue: float


class DestressQueue:
    """FIFO of tiles awaiting de-stress; a tile appears at most once."""

    def __init__(self):
        self._entries: deque = deque()
        self._tiles = set()

    def enqueue(self, tile: int, now_ns: int, aging: float) -> bool:
        """Append a tile unless it is already queued.

        Returns:
            True if the tile was added
        """
        if tile in self._tiles:
            return False
        self._entries.append(QueueEntry(tile, now_ns, aging))
        self._tiles.add(tile)
        return True

    def remove(self, tile: int) -> bool:
        """Drop a tile's entry; returns False if it was not queued."""
        if tile not in self._tiles:
            return False
        self._tiles.discard(tile)
        self._entries = deque(e for e in self._entries if e.tile != tile)
        return True

    def entries(self) -> List[QueueEntry]:
        """Current entries, head first."""
        return list(self._entries)

    def __contains__(self, tile: int) -> bool:
        return tile in self._tiles

    def __iter__(self) -> Iterator[QueueEntry]:
        return iter(self.entries())

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class DestressRecord:
    """One issued de-stress window."""

    time_ns: int
    tile: int
    trigger: Trigger
    aging_at_issue: float
    tdsc_ns: int

    @property
    def time(self) -> float:
        return self.time_ns / NS_PER_SECOND

    @property
    def end_ns(self) -> int:
        return self.time_ns + self.tdsc_ns
