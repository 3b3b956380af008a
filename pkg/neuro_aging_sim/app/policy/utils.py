"""Utility functions for de-stress decision logs."""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

from ..common.exceptions import DomainError
from ..common.models import NS_PER_SECOND, ReportStamp, format_seconds
from ..common.utils import PathLike, write_csv
from .models import DestressRecord

logger = logging.getLogger("neuro_aging_sim")

DESTRESS_LOG_HEADER = ("time", "tile", "trigger", "aging_at_issue", "tdsc")


def write_destress_log(
    path: PathLike,
    records: Iterable[DestressRecord],
    stamp: Optional[ReportStamp] = None,
) -> Path:
    """Write ``destress_log.csv``, one row per issued window."""
    rows = (
        (format_seconds(r.time_ns), r.tile, r.trigger.value, r.aging_at_issue, format_seconds(r.tdsc_ns))
        for r in records
    )
    return write_csv(path, DESTRESS_LOG_HEADER, rows, stamp)


def count_by_trigger(records: Sequence[DestressRecord]) -> Dict[str, int]:
    """Number of issued windows per trigger."""
    counts = Counter(r.trigger.value for r in records)
    return dict(sorted(counts.items()))


def mean_interval(records: Sequence[DestressRecord], span_ns: int, num_tiles: int) -> Optional[float]:
    """Mean time between de-stress windows of one tile, in seconds.

    ``span_ns`` is the simulated time the windows were issued in, the run's
    end time rather than the trace duration: windows that defer spikes
    stretch a run past its trace. Windows of one tile never overlap, so the
    result is at least the window length.

    Raises:
        DomainError: If span_ns is not positive
    """
    if not records:
        return None
    if span_ns <= 0:
        raise DomainError(f"span must be > 0, got {span_ns} ns", argument="span_ns")
    return span_ns * num_tiles / len(records) / NS_PER_SECOND
