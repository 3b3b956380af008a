"""Workload operations: trace parsing and emission, synthetic generators, statistics and remapping."""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..common.exceptions import DomainError, StructuralError, TraceFormatError
from ..common.models import NS_PER_SECOND, format_seconds, parse_seconds, seconds_to_ns
from .models import NeuronRateStats, PoissonWorkloadSpec, SpikeEvent, SpikeTrace, TraceHeader, TraceStats
from .utils import geometry_hash, rate_table

logger = logging.getLogger("neuro_aging_sim")

COLUMN_HEADER = "time,tile,neuron"

_KNOWN_HEADERS = ("trace_id", "time_unit", "chip_hash", "duration")


def _parse_id(name: str, text: str, line_number: int, bound: Optional[int]) -> int:
    text = text.strip()
    if not (text.isascii() and text.isdigit()):
        raise TraceFormatError(f"{name} must be a non-negative integer, got {text!r}", line_number)
    value = int(text)
    if bound is not None and value >= bound:
        raise TraceFormatError(f"{name} {value} out of range (chip has {bound})", line_number)
    return value


def _build_header(headers: Dict[str, Tuple[str, int]]) -> TraceHeader:
    time_unit, line_number = headers.get("time_unit", ("s", None))
    if time_unit != "s":
        raise TraceFormatError(f"unsupported time unit {time_unit!r}, expected 's'", line_number)
    duration_ns = None
    if "duration" in headers:
        text, line_number = headers["duration"]
        try:
            duration_ns = parse_seconds(text)
        except DomainError:
            raise TraceFormatError(f"bad duration {text!r}", line_number)
        if duration_ns < 0:
            raise TraceFormatError(f"duration must be >= 0, got {text!r}", line_number)
    extra = tuple(sorted((k, v) for k, (v, _) in headers.items() if k not in _KNOWN_HEADERS))
    return TraceHeader(
        trace_id=headers.get("trace_id", ("", None))[0],
        time_unit="s",
        chip_hash=headers.get("chip_hash", ("", None))[0],
        duration_ns=duration_ns,
        extra=extra,
    )


def parse_trace(
    data: Union[bytes, str],
    num_tiles: Optional[int] = None,
    neurons_per_tile: Optional[int] = None,
) -> SpikeTrace:
    """Parse a trace file.

    The format is line oriented: ``#key=value`` header lines, an optional
    ``time,tile,neuron`` column line, then one ``time,tile,neuron`` event per
    line with the time in decimal seconds. Events must be strictly
    increasing in (time, tile, neuron) order.

    Args:
        data: File contents
        num_tiles: Chip tile count; tile ids are checked against it when given
        neurons_per_tile: Chip neuron count; neuron ids are checked against it when given

    Returns:
        Validated trace

    Raises:
        TraceFormatError: On the first malformed, out-of-range or out-of-order line
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceFormatError(f"trace is not UTF-8 text ({exc.reason} at byte {exc.start})")

    headers: Dict[str, Tuple[str, int]] = {}
    events: List[SpikeEvent] = []
    last_line = None
    for line_number, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            key = key.strip()
            if not sep or not key:
                raise TraceFormatError(f"header must read '#key=value', got {line!r}", line_number)
            if key in headers:
                raise TraceFormatError(f"duplicate header {key!r}", line_number)
            headers[key] = (value.strip(), line_number)
            continue
        if line == COLUMN_HEADER and not events:
            continue

        fields = line.split(",")
        if len(fields) != 3:
            raise TraceFormatError(f"expected '{COLUMN_HEADER}', got {line!r}", line_number)
        try:
            time_ns = parse_seconds(fields[0])
        except DomainError:
            raise TraceFormatError(f"bad time {fields[0].strip()!r}", line_number)
        if time_ns < 0:
            raise TraceFormatError(f"time must be >= 0, got {fields[0].strip()!r}", line_number)
        event = SpikeEvent(
            time_ns,
            _parse_id("tile", fields[1], line_number, num_tiles),
            _parse_id("neuron", fields[2], line_number, neurons_per_tile),
        )
        if events and event <= events[-1]:
            reason = "duplicate event" if event == events[-1] else "time regression"
            raise TraceFormatError(f"{reason}: {line!r} follows {format_seconds(events[-1].time_ns)}", line_number)
        events.append(event)
        last_line = line_number

    header = _build_header(headers)
    if header.duration_ns is not None and events and events[-1].time_ns > header.duration_ns:
        raise TraceFormatError(
            f"event at {format_seconds(events[-1].time_ns)} "
            f"beyond declared duration {format_seconds(header.duration_ns)}",
            last_line,
        )
    return SpikeTrace(header=header, events=tuple(events))


def emit_trace(trace: SpikeTrace) -> bytes:
    """Serialize a trace in canonical form.

    Headers come in a fixed order followed by extra keys sorted by name;
    times are written with nine decimals.
    """
    header = trace.header
    lines = [f"#trace_id={header.trace_id}", f"#time_unit={header.time_unit}"]
    if header.chip_hash:
        lines.append(f"#chip_hash={header.chip_hash}")
    if header.duration_ns is not None:
        lines.append(f"#duration={format_seconds(header.duration_ns)}")
    lines.extend(f"#{key}={value}" for key, value in header.extra)
    lines.extend(f"{format_seconds(e.time_ns)},{e.tile},{e.neuron}" for e in trace.events)
    return ("\n".join(lines) + "\n").encode("utf-8")


def build_trace(
    times_ns: np.ndarray,
    tiles: np.ndarray,
    neurons: np.ndarray,
    header: TraceHeader,
) -> SpikeTrace:
    """Sort parallel event columns into a trace."""
    order = np.lexsort((neurons, tiles, times_ns))
    columns = zip(times_ns[order].tolist(), tiles[order].tolist(), neurons[order].tolist())
    return SpikeTrace(header=header, events=tuple(map(SpikeEvent._make, columns)))


def _poisson_times(rate: float, duration_ns: int, seed: int, tile: int, neuron: int) -> np.ndarray:
    """Spike times of one homogeneous Poisson neuron, strictly increasing in ns."""
    if rate <= 0:
        return np.empty(0, dtype=np.int64)
    # One counter-based stream per neuron, independent of generation order.
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tile, neuron])))
    horizon = duration_ns / NS_PER_SECOND
    expected = rate * horizon
    chunk = int(expected + 6 * math.sqrt(expected) + 16)
    blocks = []
    clock = 0.0
    while clock < horizon:
        gaps = -np.log1p(-rng.random(chunk)) / rate
        arrivals = clock + np.cumsum(gaps)
        blocks.append(arrivals)
        clock = float(arrivals[-1])
    times_ns = np.floor(np.concatenate(blocks) * NS_PER_SECOND).astype(np.int64)
    times_ns = times_ns[times_ns < duration_ns]
    steps = np.arange(times_ns.size, dtype=np.int64)
    times_ns = np.maximum.accumulate(times_ns - steps) + steps
    return times_ns[times_ns < duration_ns]


def generate_poisson(spec: PoissonWorkloadSpec) -> SpikeTrace:
    """Generate a Poisson workload.

    Each neuron fires as a homogeneous Poisson process at its rate, with
    exponential inter-arrival times drawn by inverse CDF from a Philox stream
    keyed on (seed, tile, neuron). The result depends only on ``spec``.

    Args:
        spec: Workload recipe

    Returns:
        Trace covering [0, spec.duration)
    """
    duration_ns = seconds_to_ns(spec.duration)
    rates = rate_table(spec)
    times, tiles, neurons = [], [], []
    for index, rate in enumerate(rates.tolist()):
        tile, neuron = divmod(index, spec.neurons_per_tile)
        spikes = _poisson_times(rate, duration_ns, spec.seed, tile, neuron)
        if spikes.size:
            times.append(spikes)
            tiles.append(np.full(spikes.size, tile, dtype=np.int64))
            neurons.append(np.full(spikes.size, neuron, dtype=np.int64))

    header = TraceHeader(
        trace_id=spec.trace_id or f"poisson-seed{spec.seed}",
        chip_hash=geometry_hash(spec.num_tiles, spec.neurons_per_tile),
        duration_ns=duration_ns,
    )
    if not times:
        logger.info(f"Generated empty trace {header.trace_id}")
        return SpikeTrace(header=header)
    trace = build_trace(np.concatenate(times), np.concatenate(tiles), np.concatenate(neurons), header)
    logger.info(f"Generated {len(trace)} spikes over {spec.duration} s for {spec.total_neurons} neurons")
    return trace


def generate_regular(
    duration: float,
    rate: float,
    num_tiles: int = 1,
    neurons_per_tile: int = 1,
    offset: float = 0.0,
    trace_id: str = "",
) -> SpikeTrace:
    """Generate constant-rate spike trains, every neuron firing in lockstep.

    Args:
        duration: Trace length in seconds
        rate: Firing rate in hertz (0 gives an empty trace)
        num_tiles: Tiles populated
        neurons_per_tile: Neurons populated per tile
        offset: Time of the first spike in seconds

    Returns:
        Trace with spikes at offset + k / rate for every k with a time below duration

    Raises:
        DomainError: On a non-positive duration or a negative rate or offset
    """
    if not duration > 0:
        raise DomainError(f"duration must be > 0, got {duration!r}", argument="duration")
    if not (math.isfinite(rate) and rate >= 0):
        raise DomainError(f"rate must be >= 0, got {rate!r}", argument="rate")
    if not offset >= 0:
        raise DomainError(f"offset must be >= 0, got {offset!r}", argument="offset")
    duration_ns = seconds_to_ns(duration)
    header = TraceHeader(
        trace_id=trace_id or f"regular-{rate!r}hz",
        chip_hash=geometry_hash(num_tiles, neurons_per_tile),
        duration_ns=duration_ns,
    )
    if rate == 0:
        return SpikeTrace(header=header)
    period_ns = seconds_to_ns(1.0 / rate)
    offset_ns = seconds_to_ns(offset)
    if period_ns <= 0:
        raise DomainError(f"rate {rate!r} Hz exceeds the nanosecond clock", argument="rate")
    spike_times = np.arange(offset_ns, duration_ns, period_ns, dtype=np.int64)
    count = num_tiles * neurons_per_tile
    ids = np.arange(count, dtype=np.int64)
    times = np.repeat(spike_times, count)
    tiles = np.tile(ids // neurons_per_tile, spike_times.size)
    neurons = np.tile(ids % neurons_per_tile, spike_times.size)
    return build_trace(times, tiles, neurons, header)


def trace_stats(
    trace: SpikeTrace,
    window: float = 1.0,
    bins: Union[int, Sequence[float]] = 10,
) -> TraceStats:
    """Firing-rate statistics of a trace.

    Per neuron, rates are measured over consecutive windows of ``window``
    seconds (the last one possibly shorter); the average rate is the count
    over the trace duration. Chip figures are the min/avg/max of the
    per-neuron average rates, with a histogram of those rates.

    Args:
        trace: Spike trace
        window: Window length in seconds
        bins: Histogram bin count or explicit bin edges

    Returns:
        Statistics; empty when the trace has no events, with zero rates when
        its spikes span zero time and no duration is declared

    Raises:
        DomainError: If the window is not positive
    """
    if not window > 0:
        raise DomainError(f"window must be > 0, got {window!r}", argument="window")
    if not trace.events:
        return TraceStats(duration=trace.duration, window=window)
    duration_ns = trace.duration_ns
    if duration_ns <= 0:
        logger.warning(f"Trace {trace.header.trace_id!r} spans zero time; reporting zero rates")
        neurons = [
            NeuronRateStats(tile=tile, neuron=neuron, count=int(times.size), rate_min=0.0, rate_avg=0.0, rate_max=0.0)
            for (tile, neuron), times in trace.times_by_neuron().items()
        ]
        return _rate_summary(0.0, window, neurons, bins)

    window_ns = seconds_to_ns(window)
    n_windows = -(-duration_ns // window_ns)
    lengths = np.minimum(window_ns, duration_ns - np.arange(n_windows, dtype=np.int64) * window_ns) / NS_PER_SECOND
    duration = duration_ns / NS_PER_SECOND

    neurons = []
    for (tile, neuron), times in trace.times_by_neuron().items():
        index = np.minimum(times // window_ns, n_windows - 1)
        rates = np.bincount(index, minlength=n_windows) / lengths
        neurons.append(
            NeuronRateStats(
                tile=tile,
                neuron=neuron,
                count=int(times.size),
                rate_min=float(rates.min()),
                rate_avg=times.size / duration,
                rate_max=float(rates.max()),
            )
        )
    return _rate_summary(duration, window, neurons, bins)


def _rate_summary(
    duration: float,
    window: float,
    neurons: Sequence[NeuronRateStats],
    bins: Union[int, Sequence[float]],
) -> TraceStats:
    averages = np.array([n.rate_avg for n in neurons])
    counts, edges = np.histogram(averages, bins=bins)
    return TraceStats(
        duration=duration,
        window=window,
        neurons=tuple(neurons),
        chip_rate_min=float(averages.min()),
        chip_rate_avg=float(averages.mean()),
        chip_rate_max=float(averages.max()),
        histogram_edges=tuple(edges.tolist()),
        histogram_counts=tuple(int(c) for c in counts),
    )


def remap_uniform(
    trace: SpikeTrace,
    new_num_tiles: int,
    neurons_per_tile: Optional[int] = None,
) -> SpikeTrace:
    """Redistribute the firing neurons of a trace round-robin over a new tile count.

    The i-th firing neuron in (tile, neuron) order moves to tile
    ``i % new_num_tiles`` as neuron ``i // new_num_tiles``. Spike times are
    unchanged.

    Raises:
        DomainError: If new_num_tiles is not positive
        StructuralError: If a tile would need more than ``neurons_per_tile`` neurons
    """
    if new_num_tiles < 1:
        raise DomainError(f"tile count must be >= 1, got {new_num_tiles!r}", argument="new_num_tiles")
    sources = trace.neurons()
    needed = -(-len(sources) // new_num_tiles)
    if neurons_per_tile is not None and needed > neurons_per_tile:
        raise StructuralError(
            f"{len(sources)} neurons do not fit {new_num_tiles} tiles of {neurons_per_tile} neurons"
        )
    mapping = {source: divmod(i, new_num_tiles)[::-1] for i, source in enumerate(sources)}
    times = np.fromiter((e.time_ns for e in trace.events), dtype=np.int64, count=len(trace))
    targets = [mapping[(e.tile, e.neuron)] for e in trace.events]
    tiles = np.fromiter((t for t, _ in targets), dtype=np.int64, count=len(targets))
    neurons = np.fromiter((n for _, n in targets), dtype=np.int64, count=len(targets))
    header = trace.header.with_extra(remapped_tiles=str(new_num_tiles))
    return build_trace(times, tiles, neurons, header)


def read_trace(
    path: Union[str, Path],
    num_tiles: Optional[int] = None,
    neurons_per_tile: Optional[int] = None,
) -> SpikeTrace:
    """Read and parse a trace file.

    Raises:
        FileNotFoundError: If the file does not exist
        TraceFormatError: If the contents do not parse
    """
    path = Path(path)
    logger.debug(f"Reading trace {path}")
    return parse_trace(path.read_bytes(), num_tiles, neurons_per_tile)


def write_trace(path: Union[str, Path], trace: SpikeTrace) -> Path:
    """Write a trace file in canonical form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(emit_trace(trace))
    logger.info(f"Wrote {len(trace)} spikes to {path}")
    return path
