"""
App module for the neuromorphic aging simulator.

This module contains the aging model, chip model, workloads, policies,
simulation engine and metrics.
"""

from .aging import AgingParams, Environment, VthCalibration, calibrate_a_fit
from .hw import ChipConfig
from .metrics import aging_summary, compute_isi_stats, isi_delta
from .policy import PolicyConfig, PolicyKind, ReliabilityPolicy
from .sim import RunConfig, RunResult, Simulator, run, run_sweep
from .workload import PoissonWorkloadSpec, SpikeTrace, generate_poisson, generate_regular, read_trace

__all__ = [
    "AgingParams", "Environment", "VthCalibration", "calibrate_a_fit",
    "ChipConfig",
    "aging_summary", "compute_isi_stats", "isi_delta",
    "PolicyConfig", "PolicyKind", "ReliabilityPolicy",
    "RunConfig", "RunResult", "Simulator", "run", "run_sweep",
    "PoissonWorkloadSpec", "SpikeTrace", "generate_poisson", "generate_regular", "read_trace",
]
