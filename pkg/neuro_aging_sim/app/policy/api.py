"""Reliability-management policies consulted by the simulation engine.

A policy sees the chip through an :class:`AgingView` and answers with
:class:`Action` lists; the engine owns all state changes. Three strategies
are provided: no management, fixed-interval de-stress and dynamic
threshold-tracked de-stress with a de-stress queue.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import List, Optional, Protocol, Sequence, Set

import numpy as np

from ..common.exceptions import DomainError
from ..common.models import format_seconds
from .models import Action, ActionKind, DestressQueue, PolicyConfig, PolicyKind, Trigger

logger = logging.getLogger("neuro_aging_sim")


class AgingView(Protocol):
    """Read-only view of the chip offered to policies."""

    num_tiles: int

    def tile_max_aging(self, tile: int, now_ns: int) -> float:
        """Maximum total aging over the tile's neurons at ``now_ns``."""

    def destressed_max_aging(self, tile: int, now_ns: int) -> float:
        """Maximum total aging the tile would keep after a de-stress window started at ``now_ns``."""

    def is_busy(self, tile: int, now_ns: int) -> bool:
        """True while the tile is de-stressing."""

    def recent_isis(self, tile: int) -> Sequence[float]:
        """Recent ISIs (seconds) of the tile's most active neuron, oldest first.

        Among equally active neurons the one that fired last is used.
        """


def predict_idle_gap(isis: Sequence[float], window: int) -> float:
    """Predict the next idle gap as the mean of the last ``window`` ISIs.

    Args:
        isis: Instantaneous ISIs in seconds, oldest first
        window: Number of trailing ISIs averaged

    Returns:
        Predicted gap in seconds; ``math.inf`` without any ISI history

    Raises:
        DomainError: If window is below 1
    """
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window!r}", argument="window")
    if len(isis) == 0:
        return math.inf
    return float(np.mean(np.asarray(isis, dtype=np.float64)[-window:]))


class ReliabilityPolicy(ABC):
    """Interface of a run-time reliability-management strategy."""

    # When True the engine calls on_tick after every processed event.
    wants_event_ticks = False

    def __init__(self, config: PolicyConfig, num_tiles: int):
        """Initialize the policy.

        Args:
            config: Policy parameters
            num_tiles: Tiles on the chip
        """
        self.config = config
        self.num_tiles = num_tiles

    @property
    def name(self) -> str:
        """Label used in logs and reports."""
        return self.config.kind.value

    @abstractmethod
    def on_spike(self, tile: int, neuron: int, now_ns: int, view: AgingView) -> List[Action]:
        """React to an emitted spike, called after the aging update."""

    @abstractmethod
    def on_tick(self, now_ns: int, view: AgingView) -> List[Action]:
        """React to a timer tick or an event boundary."""

    def next_tick_ns(self) -> Optional[int]:
        """Earliest pending timer deadline, or None when the policy has no timer."""
        return None

    def notify_destress(self, tile: int, now_ns: int) -> None:
        """Tell the policy a de-stress window was issued for ``tile``."""


class NoManagementPolicy(ReliabilityPolicy):
    """Design-time-only baseline: never acts."""

    def on_spike(self, tile: int, neuron: int, now_ns: int, view: AgingView) -> List[Action]:
        return []

    def on_tick(self, now_ns: int, view: AgingView) -> List[Action]:
        return []


class FixedIntervalPolicy(ReliabilityPolicy):
    """Periodic de-stress of every tile.

    Tile ``t`` is de-stressed at ``k * interval + offset(t)`` for k >= 1. All
    offsets are zero unless ``staggered`` is set, in which case they spread
    the tiles evenly over one interval.
    """

    def __init__(self, config: PolicyConfig, num_tiles: int):
        super().__init__(config, num_tiles)
        interval_ns = config.interval_ns
        self._next_due = [interval_ns + self.offset_ns(tile) for tile in range(num_tiles)]

    def offset_ns(self, tile: int) -> int:
        """Phase of a tile within the interval."""
        if not self.config.staggered:
            return 0
        return tile * self.config.interval_ns // self.num_tiles

    def on_spike(self, tile: int, neuron: int, now_ns: int, view: AgingView) -> List[Action]:
        return []

    def on_tick(self, now_ns: int, view: AgingView) -> List[Action]:
        actions = []
        for tile, due in enumerate(self._next_due):
            if due <= now_ns:
                actions.append(Action(ActionKind.DESTRESS_NOW, tile, Trigger.PERIODIC))
                self._next_due[tile] = due + self.config.interval_ns
        return actions

    def next_tick_ns(self) -> Optional[int]:
        return min(self._next_due)


class DynamicPolicy(ReliabilityPolicy):
    """Threshold-tracked de-stress with a de-stress queue.

    A tile whose maximum aging reaches ``th_a`` on a spike is de-stressed at
    once. One reaching ``soft_fraction * th_a`` joins the queue and is
    de-stressed at a later event boundary when its predicted idle gap covers
    the window, or at once if it has reached ``th_a`` by then. Queued tiles
    that recover below the soft threshold leave the queue.

    A tile that would still be at or above ``th_a`` after a full window is
    worn out: de-stress cannot restore the threshold, so it gets no windows
    until idle recovery brings it back within reach.
    """

    wants_event_ticks = True

    def __init__(self, config: PolicyConfig, num_tiles: int):
        super().__init__(config, num_tiles)
        self.queue = DestressQueue()
        self.worn_out: Set[int] = set()

    def _relievable(self, tile: int, now_ns: int, view: AgingView) -> bool:
        if view.destressed_max_aging(tile, now_ns) < self.config.th_a:
            self.worn_out.discard(tile)
            return True
        if tile not in self.worn_out:
            self.worn_out.add(tile)
            logger.warning(
                f"Tile {tile} stays above th_a={self.config.th_a!r} even after de-stress; "
                f"no windows from {format_seconds(now_ns)} until it recovers"
            )
        return False

    def on_spike(self, tile: int, neuron: int, now_ns: int, view: AgingView) -> List[Action]:
        aging = view.tile_max_aging(tile, now_ns)
        if aging >= self.config.th_a:
            if not self._relievable(tile, now_ns, view):
                return []
            return [Action(ActionKind.DESTRESS_NOW, tile, Trigger.HARD)]
        if aging >= self.config.soft_threshold and self.queue.enqueue(tile, now_ns, aging):
            logger.debug(f"Tile {tile} queued at {format_seconds(now_ns)} with aging {aging!r}")
            return [Action(ActionKind.ENQUEUE, tile)]
        return []

    def on_tick(self, now_ns: int, view: AgingView) -> List[Action]:
        """Serve the de-stress queue.

        Every entry is examined in FIFO order, not only the head. A tile is
        queued at most once, so this issues the same windows as serving the
        head repeatedly, without a busy head blocking the tiles behind it.
        """
        actions = []
        tdsc = self.config.tdsc
        for entry in self.queue.entries():
            if view.is_busy(entry.tile, now_ns):
                continue
            aging = view.tile_max_aging(entry.tile, now_ns)
            if aging < self.config.soft_threshold:
                self.queue.remove(entry.tile)
                logger.debug(f"Tile {entry.tile} left the queue at {format_seconds(now_ns)} after recovering")
            elif aging >= self.config.th_a:
                if self._relievable(entry.tile, now_ns, view):
                    actions.append(Action(ActionKind.DESTRESS_NOW, entry.tile, Trigger.HARD))
                else:
                    self.queue.remove(entry.tile)
            elif predict_idle_gap(view.recent_isis(entry.tile), self.config.idle_predictor_window) >= tdsc:
                actions.append(Action(ActionKind.DESTRESS_NOW, entry.tile, Trigger.OPPORTUNISTIC))
        return actions

    def notify_destress(self, tile: int, now_ns: int) -> None:
        self.queue.remove(tile)


_POLICIES = {
    PolicyKind.NONE: NoManagementPolicy,
    PolicyKind.FIXED_INTERVAL: FixedIntervalPolicy,
    PolicyKind.DYNAMIC: DynamicPolicy,
}


def build_policy(config: PolicyConfig, num_tiles: int) -> ReliabilityPolicy:
    """Instantiate the policy selected by ``config.kind``."""
    return _POLICIES[PolicyKind(config.kind)](config, num_tiles)
