"""Utility functions for working with spike workloads."""

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ..common.models import ReportStamp
from ..common.utils import PathLike, config_hash, write_csv
from .models import PoissonWorkloadSpec, TraceStats

logger = logging.getLogger("neuro_aging_sim")

STATS_HEADER = ("neuron", "tile", "count", "rate_min", "rate_avg", "rate_max")

# Stream key for per-neuron rate draws, kept apart from the (tile, neuron) spike streams.
_RATE_STREAM = 2**32 - 1


def geometry_hash(num_tiles: int, neurons_per_tile: int) -> str:
    """Hash of the chip geometry a trace was generated for."""
    return config_hash({"num_tiles": num_tiles, "neurons_per_tile": neurons_per_tile})


def rate_table(spec: PoissonWorkloadSpec) -> np.ndarray:
    """Per-neuron firing rates of a workload spec, in tile-major order.

    Args:
        spec: Workload recipe

    Returns:
        Array of ``spec.total_neurons`` rates in hertz
    """
    size = spec.total_neurons
    if spec.rates is not None:
        return np.asarray(spec.rates, dtype=np.float64)
    if spec.rate is not None:
        return np.full(size, spec.rate, dtype=np.float64)
    if spec.rate_min == spec.rate_max:
        return np.full(size, spec.rate_min, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, _RATE_STREAM])))
    if spec.distribution == "triangular":
        return rng.triangular(spec.rate_min, spec.triangular_mode, spec.rate_max, size=size)
    return rng.uniform(spec.rate_min, spec.rate_max, size=size)


def write_stats_csv(path: PathLike, stats: TraceStats, stamp: Optional[ReportStamp] = None) -> Path:
    """Write per-neuron rate statistics as CSV.

    Args:
        path: Output file
        stats: Trace statistics
        stamp: Run identity for the metadata line

    Returns:
        Path of the written file
    """
    rows = ((n.neuron, n.tile, n.count, n.rate_min, n.rate_avg, n.rate_max) for n in stats.neurons)
    logger.debug(f"Writing rate statistics for {len(stats.neurons)} neurons")
    return write_csv(path, STATS_HEADER, rows, stamp)


def write_histogram_csv(path: PathLike, stats: TraceStats, stamp: Optional[ReportStamp] = None) -> Path:
    """Write the firing-rate histogram as ``bin_low,bin_high,count`` rows."""
    edges = stats.histogram_edges
    rows = ((edges[i], edges[i + 1], count) for i, count in enumerate(stats.histogram_counts))
    return write_csv(path, ("bin_low", "bin_high", "count"), rows, stamp)
