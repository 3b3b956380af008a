"""ISI statistics, ISI distortion, aging-per-distortion and aging summaries."""

import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..aging.api import reliability, vth_shift
from ..aging.models import AgingParams, VthCalibration
from ..common.exceptions import DomainError, StructuralError
from ..common.models import NS_PER_SECOND
from ..hw.models import ChipSnapshot
from ..workload.models import SpikeTrace
from .models import AgingSummary, IsiDeltaReport, IsiStats, NeuronAging, NeuronIsi, NeuronIsiDelta

logger = logging.getLogger("neuro_aging_sim")

# Aging-per-distortion of a run whose ISIs are untouched.
NO_DISTORTION = math.inf


def isi_instantaneous(times) -> np.ndarray:
    """Consecutive differences of a spike-time series.

    Args:
        times: Strictly increasing spike times

    Returns:
        Array of ``len(times) - 1`` intervals, empty below two spikes

    Raises:
        DomainError: If the times are not strictly increasing
    """
    values = np.asarray(times)
    if values.ndim != 1:
        raise DomainError(f"expected a 1-D series, got shape {values.shape}", argument="times")
    diffs = np.diff(values)
    if (diffs <= 0).any():
        index = int(np.argmax(diffs <= 0)) + 1
        raise DomainError(f"spike times must be strictly increasing (position {index})", argument="times")
    return diffs


def compute_isi_stats(trace: SpikeTrace) -> IsiStats:
    """ISI statistics of every neuron that fires in a trace."""
    neurons = {}
    for (tile, neuron), times in trace.times_by_neuron().items():
        neurons[(tile, neuron)] = NeuronIsi(
            tile=tile,
            neuron=neuron,
            times_ns=times,
            isi=isi_instantaneous(times) / NS_PER_SECOND,
        )
    return IsiStats(neurons=neurons)


def _windows_by_tile(destress_log: Sequence) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    grouped: Dict[int, list] = {}
    for record in destress_log:
        grouped.setdefault(record.tile, []).append((record.time_ns + record.tdsc_ns, record.tdsc_ns))
    windows = {}
    for tile, entries in grouped.items():
        entries.sort()
        ends, lengths = zip(*entries)
        windows[tile] = (np.asarray(ends, dtype=np.int64), np.asarray(lengths, dtype=np.int64))
    return windows


def _delaying_windows(
    baseline_ns: np.ndarray,
    managed_ns: np.ndarray,
    windows: Optional[Tuple[np.ndarray, np.ndarray]],
) -> Tuple[int, int]:
    """Count the windows that held back at least one spike, and their total length in ns.

    A spike due at ``b`` and emitted at ``m`` waited on every window of its
    tile ending in (b, m].
    """
    if windows is None:
        return 0, 0
    ends, lengths = windows
    delayed = managed_ns > baseline_ns
    if not delayed.any():
        return 0, 0
    lo = np.searchsorted(ends, baseline_ns[delayed], side="right")
    hi = np.searchsorted(ends, managed_ns[delayed], side="right")
    marks = np.zeros(ends.size + 1, dtype=np.int64)
    np.add.at(marks, lo, 1)
    np.add.at(marks, hi, -1)
    covered = np.cumsum(marks[:-1]) > 0
    return int(covered.sum()), int(lengths[covered].sum())


def isi_delta(baseline: IsiStats, managed: IsiStats, destress_log: Sequence = ()) -> IsiDeltaReport:
    """ISI change of every neuron between an unmanaged and a managed run.

    Spikes are paired by rank per neuron, which is valid because spikes are
    neither dropped nor reordered.

    Args:
        baseline: Statistics of the unmanaged spike log
        managed: Statistics of the managed spike log
        destress_log: Records with ``tile``, ``time_ns`` and ``tdsc_ns``

    Returns:
        Per-neuron changes in (tile, neuron) order

    Raises:
        StructuralError: If the neuron sets or spike counts differ, or a spike
            was emitted before its due time
    """
    if set(baseline.keys()) != set(managed.keys()):
        odd = sorted(set(baseline.keys()) ^ set(managed.keys()))[0]
        logger.error(f"Neuron {odd} present in only one spike log")
        raise StructuralError(f"neuron sets differ, first mismatch at {odd}")
    windows = _windows_by_tile(destress_log)

    deltas = []
    for key in sorted(baseline.keys()):
        before, after = baseline[key], managed[key]
        if before.k_n != after.k_n:
            raise StructuralError(f"neuron {key} has {before.k_n} baseline spikes but {after.k_n} managed")
        delays = after.times_ns - before.times_ns
        if (delays < 0).any():
            raise StructuralError(f"neuron {key} emits a spike before it is due")
        k_n = before.k_n
        gap_changes = np.diff(delays)
        lengthened_ns = int(gap_changes[gap_changes > 0].sum())
        count, held_ns = _delaying_windows(before.times_ns, after.times_ns, windows.get(key[0]))
        closed_form = held_ns / NS_PER_SECOND / k_n
        deltas.append(
            NeuronIsiDelta(
                tile=key[0],
                neuron=key[1],
                k_n=k_n,
                isi_avg_baseline=before.isi_avg,
                isi_avg_managed=after.isi_avg,
                delta_inst=gap_changes / NS_PER_SECOND,
                delta_avg=after.isi_avg - before.isi_avg if k_n >= 2 else 0.0,
                delta_avg_per_spike=lengthened_ns / NS_PER_SECOND / k_n,
                delay_windows=count,
                delta_avg_closed_form=closed_form,
                isi_avg_literal=before.isi_avg + closed_form if before.isi_avg is not None else None,
            )
        )
    return IsiDeltaReport(neurons=tuple(deltas))


def aging_per_isi_distortion(max_aging: float, delta_isi_avg: float) -> float:
    """Aging per unit of ISI distortion.

    Args:
        max_aging: Maximum aging in aging units
        delta_isi_avg: Average ISI distortion in seconds

    Returns:
        ``max_aging / delta_isi_avg`` in units per second, or
        :data:`NO_DISTORTION` when the distortion is zero

    Raises:
        DomainError: On a negative input
    """
    if not max_aging >= 0:
        raise DomainError(f"aging must be >= 0, got {max_aging!r}", argument="max_aging")
    if not delta_isi_avg >= 0:
        raise DomainError(f"ISI distortion must be >= 0, got {delta_isi_avg!r}", argument="delta_isi_avg")
    if delta_isi_avg == 0:
        return NO_DISTORTION
    return max_aging / delta_isi_avg


def aging_summary(
    snapshot: ChipSnapshot,
    calibration: Optional[VthCalibration] = None,
    params: Optional[AgingParams] = None,
) -> AgingSummary:
    """Summarize the aging of a chip snapshot.

    Args:
        snapshot: Chip state at the end of a run
        calibration: V_th normalization; shifts are omitted when unset
        params: Aging parameters for the reliability column

    Returns:
        Per-neuron figures in (tile, neuron) order, per-tile maxima and the chip maximum
    """
    params = params or AgingParams()
    calibrated = calibration is not None and calibration.is_set
    neurons = []
    tile_max = []
    for tile in snapshot.tiles:
        highest = 0.0
        for index, (recoverable, permanent) in enumerate(zip(tile.aging_recoverable, tile.aging_permanent)):
            total = recoverable + permanent
            highest = max(highest, total)
            neurons.append(
                NeuronAging(
                    tile=tile.tile_id,
                    neuron=index,
                    aging_recoverable=recoverable,
                    aging_permanent=permanent,
                    aging_total=total,
                    vth_shift_pct=vth_shift(total, calibration) if calibrated else None,
                    reliability=reliability(total, params),
                )
            )
        tile_max.append(highest)
    chip_max = max(tile_max, default=0.0)
    return AgingSummary(
        neurons=tuple(neurons),
        tile_max=tuple(tile_max),
        chip_max=chip_max,
        chip_vth_shift_pct=vth_shift(chip_max, calibration) if calibrated else None,
    )
