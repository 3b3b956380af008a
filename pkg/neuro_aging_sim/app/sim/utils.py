"""Event queue and run-artifact helpers for the simulation engine."""

import heapq
import logging
from pathlib import Path
from typing import Iterable, List, Optional

from ..common.models import ReportStamp, format_seconds
from ..common.utils import PathLike, write_csv
from ..workload.api import write_trace
from ..workload.models import SpikeTrace
from .models import RunResult, SimEvent, TrajectorySample

logger = logging.getLogger("neuro_aging_sim")

TRAJECTORY_HEADER = ("time", "tile", "neuron", "aging_total", "tile_peak")


class EventQueue:
    """Future event list ordered by (time, kind priority, sequence)."""

    def __init__(self, events: Optional[List[SimEvent]] = None):
        """Initialize the queue.

        Args:
            events: Initial events; a list already sorted is a valid heap
        """
        self._events: List[SimEvent] = list(events or [])
        heapq.heapify(self._events)

    def schedule(self, event: SimEvent) -> None:
        heapq.heappush(self._events, event)

    def next_event(self) -> SimEvent:
        return heapq.heappop(self._events)

    def peek(self) -> Optional[SimEvent]:
        return self._events[0] if self._events else None

    def __len__(self) -> int:
        return len(self._events)

    def __bool__(self) -> bool:
        return bool(self._events)


def annotated_log(result: RunResult, stamp: Optional[ReportStamp] = None) -> SpikeTrace:
    """The managed spike log with one ``#destress.N=time,tile,trigger`` header per window.

    A stamp adds ``#config_hash`` and ``#seed`` headers.
    """
    width = len(str(max(result.destress_count - 1, 0)))
    annotations = {
        f"destress.{index:0{width}d}": f"{format_seconds(r.time_ns)},{r.tile},{r.trigger.value}"
        for index, r in enumerate(result.destress_log)
    }
    if stamp is not None:
        annotations.update(config_hash=stamp.config_hash, seed=str(stamp.seed))
    header = result.managed_trace.header.with_extra(policy=result.policy, **annotations)
    return SpikeTrace(header=header, events=result.managed_trace.events)


def write_events_log(path: PathLike, result: RunResult, stamp: Optional[ReportStamp] = None) -> Path:
    """Write ``events.log``: the managed spike log in trace format."""
    return write_trace(path, annotated_log(result, stamp))


def write_trajectory_csv(
    path: PathLike,
    samples: Iterable[TrajectorySample],
    stamp: Optional[ReportStamp] = None,
) -> Path:
    """Write sampled per-spike aging as ``trajectory.csv``."""
    rows = ((format_seconds(s.time_ns), s.tile, s.neuron, s.aging_total, s.tile_peak) for s in samples)
    return write_csv(path, TRAJECTORY_HEADER, rows, stamp)
