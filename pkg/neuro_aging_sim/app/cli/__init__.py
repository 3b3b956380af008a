"""Command-line experiment runner."""

from .api import (
    RunReport,
    calibrate_experiment,
    cmd_calibrate,
    cmd_compare,
    cmd_gen,
    cmd_run,
    cmd_stats,
    cmd_sweep,
    compare_policies,
    compare_rows,
    load_workload,
    load_workload_spec,
    run_experiment,
    summarize_run,
    sweep_rows,
    sweep_traces,
)
from .main import build_arg_parser, main
from .models import ExperimentConfig, SweepAxes, WorkloadSource, load_config

__all__ = [
    "RunReport",
    "calibrate_experiment",
    "cmd_calibrate",
    "cmd_compare",
    "cmd_gen",
    "cmd_run",
    "cmd_stats",
    "cmd_sweep",
    "compare_policies",
    "compare_rows",
    "load_workload",
    "load_workload_spec",
    "run_experiment",
    "summarize_run",
    "sweep_rows",
    "sweep_traces",
    "build_arg_parser",
    "main",
    "ExperimentConfig",
    "SweepAxes",
    "WorkloadSource",
    "load_config",
]
