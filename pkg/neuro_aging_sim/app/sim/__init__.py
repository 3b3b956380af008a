"""
Simulation module for the neuromorphic aging simulator.

This module provides the deterministic discrete-event engine, single runs
and parameter sweeps, and the run artifacts they produce.
"""

from .api import ChipView, Simulator, run, run_sweep
from .models import EventKind, RunConfig, RunResult, SimEvent, SweepCell, TrajectorySample
from .utils import TRAJECTORY_HEADER, EventQueue, annotated_log, write_events_log, write_trajectory_csv

__all__ = [
    "ChipView",
    "Simulator",
    "run",
    "run_sweep",
    "EventKind",
    "RunConfig",
    "RunResult",
    "SimEvent",
    "SweepCell",
    "TrajectorySample",
    "TRAJECTORY_HEADER",
    "EventQueue",
    "annotated_log",
    "write_events_log",
    "write_trajectory_csv",
]
