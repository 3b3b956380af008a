"""Spike workloads: the trace format, synthetic generators and rate statistics."""

from .api import (
    COLUMN_HEADER,
    build_trace,
    emit_trace,
    generate_poisson,
    generate_regular,
    parse_trace,
    read_trace,
    remap_uniform,
    trace_stats,
    write_trace,
)
from .models import NeuronRateStats, PoissonWorkloadSpec, SpikeEvent, SpikeTrace, TraceHeader, TraceStats
from .utils import STATS_HEADER, geometry_hash, rate_table, write_histogram_csv, write_stats_csv

__all__ = [
    "COLUMN_HEADER",
    "build_trace",
    "emit_trace",
    "generate_poisson",
    "generate_regular",
    "parse_trace",
    "read_trace",
    "remap_uniform",
    "trace_stats",
    "write_trace",
    "NeuronRateStats",
    "PoissonWorkloadSpec",
    "SpikeEvent",
    "SpikeTrace",
    "TraceHeader",
    "TraceStats",
    "STATS_HEADER",
    "geometry_hash",
    "rate_table",
    "write_histogram_csv",
    "write_stats_csv",
]
