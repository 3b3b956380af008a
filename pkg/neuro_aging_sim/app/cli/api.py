"""Experiment commands: run, compare, gen, calibrate, stats and sweep.

Each ``cmd_*`` function is a thin wrapper returning a process exit code;
the work is done by the library functions next to them, which can be used
without the command line.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..aging.api import vth_shift
from ..aging.models import AgingParams, VthCalibration
from ..aging.utils import calibrate_a_fit, calibrated_vth
from ..common.exceptions import ConfigurationError
from ..common.utils import PathLike, write_csv, write_json
from ..metrics.api import aging_per_isi_distortion, aging_summary, compute_isi_stats, isi_delta
from ..metrics.models import AgingSummary, IsiDeltaReport
from ..metrics.utils import ratio_value, write_aging_csv, write_isi_csv, write_run_summary
from ..policy.models import PolicyKind, Trigger
from ..policy.utils import count_by_trigger, mean_interval, write_destress_log
from ..sim.api import run, run_sweep
from ..sim.models import RunConfig, RunResult, SweepCell
from ..sim.utils import write_events_log, write_trajectory_csv
from ..workload.api import generate_poisson, read_trace, remap_uniform, trace_stats, write_trace
from ..workload.models import PoissonWorkloadSpec, SpikeTrace
from ..workload.utils import write_histogram_csv, write_stats_csv
from .models import ExperimentConfig, load_config
from .utils import EXIT_OK, command, read_document

logger = logging.getLogger("neuro_aging_sim")

COMPARE_HEADER = (
    "policy",
    "chip_max_aging",
    "final_chip_max_aging",
    "vth_shift_pct",
    "mean_delta_isi",
    "aging_per_isi_distortion",
    "destress_count",
    "aging_change_pct",
    "isi_change_pct",
)

SWEEP_HEADER = (
    "policy",
    "temperature",
    "num_tiles",
    "seed",
    "status",
    "chip_max_aging",
    "final_chip_max_aging",
    "mean_delta_isi",
    "destress_count",
    "max_tile_spikes",
)

FAILED_HEADER = ("policy", "temperature", "num_tiles", "seed", "error")


@dataclass(frozen=True, eq=False)
class RunReport:
    """A run result together with the metrics derived from it."""

    result: RunResult
    aging: AgingSummary
    isi: IsiDeltaReport
    summary: Dict[str, Any]


def load_workload(experiment: ExperimentConfig) -> SpikeTrace:
    """Read or generate the experiment's input trace.

    Raises:
        ConfigurationError: If the experiment names no workload
        FileNotFoundError: If the trace file is missing
        TraceFormatError: If the trace file does not parse
    """
    workload = experiment.workload
    if workload is None:
        logger.error("Experiment config has no [workload] section")
        raise ConfigurationError("no workload configured", field="workload")
    chip = experiment.run.chip
    if workload.trace is not None:
        return read_trace(workload.trace, chip.num_tiles, chip.neurons_per_tile)
    return generate_poisson(workload.poisson)


def _baseline_isi_mean(report: IsiDeltaReport) -> Optional[float]:
    values = [n.isi_avg_baseline for n in report.neurons if n.isi_avg_baseline is not None]
    return float(np.mean(values)) if values else None


def summarize_run(
    result: RunResult,
    trace: SpikeTrace,
    calibration: Optional[VthCalibration] = None,
    params: Optional[AgingParams] = None,
) -> RunReport:
    """Derive aging and ISI metrics of a run against its unmanaged input trace.

    The input trace is what the unmanaged baseline emits, so ISI changes are
    measured against it directly. ``chip_max_aging`` is the highest total
    aging any neuron reached during the run, the figure a policy is judged
    by; ``final_chip_max_aging`` is the chip maximum at the end of the run.

    Args:
        result: Simulation result
        trace: The trace the run consumed
        calibration: V_th normalization, optional
        params: Aging parameters for the reliability column

    Returns:
        Run report with a flat summary dictionary
    """
    aging = aging_summary(result.snapshot, calibration, params)
    chip_max = result.peak_aging
    calibrated = calibration is not None and calibration.is_set
    isi = isi_delta(compute_isi_stats(trace), compute_isi_stats(result.managed_trace), result.destress_log)
    distortion = isi.mean_delta_per_spike
    triggers = count_by_trigger(result.destress_log)
    summary = {
        "policy": result.policy,
        "spikes": len(result.managed_trace),
        "end_time": result.end_time,
        "chip_max_aging": chip_max,
        "final_chip_max_aging": aging.chip_max,
        "chip_vth_shift_pct": vth_shift(chip_max, calibration) if calibrated else None,
        "mean_delta_isi": distortion,
        "mean_delta_isi_avg": isi.mean_delta_avg,
        "delayed_neurons": isi.delayed_neurons,
        "aging_per_isi_distortion": ratio_value(aging_per_isi_distortion(chip_max, distortion)),
        "destress_count": result.destress_count,
        "mean_destress_interval": mean_interval(result.destress_log, result.end_ns, len(result.snapshot.tiles)),
        "deferred_spikes": result.deferred_spikes,
        "skipped_destress": result.skipped_destress,
        "energy_j": result.energy_j,
    }
    for trigger in Trigger:
        summary[f"destress_{trigger.value}"] = triggers.get(trigger.value, 0)
    return RunReport(result=result, aging=aging, isi=isi, summary=summary)


def run_experiment(experiment: ExperimentConfig, trace: Optional[SpikeTrace] = None) -> RunReport:
    """Run the configured policy and write every per-run report.

    Files written to ``experiment.output_dir``: ``config.json``,
    ``aging_summary.csv``, ``isi_per_neuron.csv``, ``destress_log.csv``,
    ``run_summary.json``, ``events.log`` and, when sampling is on,
    ``trajectory.csv``.
    """
    trace = trace if trace is not None else load_workload(experiment)
    config = experiment.run
    report = summarize_run(run(config, trace), trace, config.calibration, config.aging)
    result = report.result
    out = experiment.output_dir
    stamp = experiment.stamp

    echo = experiment.echo()
    echo.update(stamp.to_dict())
    write_json(out / "config.json", echo)
    write_aging_csv(out / "aging_summary.csv", report.aging, stamp)
    write_isi_csv(out / "isi_per_neuron.csv", report.isi, stamp)
    write_destress_log(out / "destress_log.csv", result.destress_log, stamp)
    write_run_summary(out / "run_summary.json", report.summary, stamp)
    write_events_log(out / "events.log", result, stamp)
    if result.trajectory is not None:
        write_trajectory_csv(out / "trajectory.csv", result.trajectory, stamp)
    logger.info(f"Reports for policy {result.policy} written to {out}")
    return report


def compare_policies(
    experiment: ExperimentConfig,
    policies: Sequence[PolicyKind],
    trace: Optional[SpikeTrace] = None,
    match_budget: bool = False,
) -> List[RunReport]:
    """Run several policies on one trace and seed.

    With ``match_budget`` the fixed-interval policy is given the mean
    per-tile interval between the windows the dynamic policy issued, so
    both spend the same de-stress budget.

    Raises:
        ConfigurationError: If fewer than two policies are given, or a budget
            match is requested without both policies or without any dynamic
            de-stress
    """
    policies = [PolicyKind(p) for p in policies]
    if len(policies) < 2:
        raise ConfigurationError(f"at least two policies are needed, got {len(policies)}", field="policies")
    trace = trace if trace is not None else load_workload(experiment)
    config = experiment.run

    dynamic: Optional[RunReport] = None
    if match_budget:
        if PolicyKind.DYNAMIC not in policies or PolicyKind.FIXED_INTERVAL not in policies:
            raise ConfigurationError("budget matching needs both dynamic and fixed_interval", field="policies")
        result = run(config.with_policy(PolicyKind.DYNAMIC), trace)
        dynamic = summarize_run(result, trace, config.calibration, config.aging)
        interval = dynamic.summary["mean_destress_interval"]
        if interval is None:
            raise ConfigurationError("the dynamic policy issued no de-stress to match", field="policies")
        logger.info(f"Matching fixed-interval budget: interval {interval!r} s")

    reports = []
    for kind in policies:
        if kind is PolicyKind.DYNAMIC and dynamic is not None:
            reports.append(dynamic)
            continue
        run_config = config.with_policy(kind)
        if kind is PolicyKind.FIXED_INTERVAL and dynamic is not None:
            interval = dynamic.summary["mean_destress_interval"]
            run_config = replace(run_config, policy=replace(run_config.policy, interval=interval))
        reports.append(summarize_run(run(run_config, trace), trace, config.calibration, config.aging))
    return reports


def _change_pct(value: Optional[float], reference: Optional[float]) -> Optional[float]:
    if value is None or reference is None or reference == 0:
        return None
    return 100.0 * (value - reference) / reference


def compare_rows(reports: Sequence[RunReport]) -> List[Tuple[Any, ...]]:
    """Rows of ``compare.csv``; relative changes are taken against the no-management run when present."""
    reference = next((r for r in reports if r.result.policy == PolicyKind.NONE.value), None)
    rows = []
    for report in reports:
        summary = report.summary
        aging_change = isi_change = None
        if reference is not None:
            aging_change = _change_pct(summary["chip_max_aging"], reference.summary["chip_max_aging"])
            baseline_isi = _baseline_isi_mean(report.isi)
            isi_change = 100.0 * report.isi.mean_delta_avg / baseline_isi if baseline_isi else None
        rows.append(
            (
                summary["policy"],
                summary["chip_max_aging"],
                summary["final_chip_max_aging"],
                summary["chip_vth_shift_pct"],
                summary["mean_delta_isi"],
                summary["aging_per_isi_distortion"],
                summary["destress_count"],
                aging_change,
                isi_change,
            )
        )
    return rows


def calibrate_experiment(experiment: ExperimentConfig) -> ExperimentConfig:
    """Fit ``a_fit`` to the reference lifetime and record the V_th baseline.

    The reference workload fires at ``calibration.reference_rate`` for
    ``calibration.reference_years`` with recovery disabled, which the
    closed-form aging covers exactly.

    Raises:
        ConvergenceError: If the fit does not converge
    """
    config = experiment.run
    target = config.calibration
    result = calibrate_a_fit(config.aging, config.env, rate=target.reference_rate, years=target.reference_years)
    calibration = calibrated_vth(result, target.end_of_life_shift_pct)
    run_config = replace(config, aging=config.aging.with_a_fit(result.a_fit), calibration=calibration)
    return replace(experiment, run=run_config)


def sweep_traces(experiment: ExperimentConfig, seeds: Sequence[int]) -> Dict[int, SpikeTrace]:
    """Input trace per seed: a fresh Poisson draw per seed, or the one trace file for all."""
    workload = experiment.workload
    if workload is not None and workload.poisson is not None:
        return {seed: generate_poisson(replace(workload.poisson, seed=seed)) for seed in seeds}
    trace = load_workload(experiment)
    return {seed: trace for seed in seeds}


def sweep_rows(
    experiment: ExperimentConfig,
    cells: Sequence[SweepCell],
    traces: Dict[int, SpikeTrace],
) -> Tuple[List[Tuple[Any, ...]], List[Tuple[Any, ...]]]:
    """Rows of ``sweep.csv`` and of ``sweep_failed.csv``."""
    base = experiment.run.chip
    remapped: Dict[Tuple[int, int], SpikeTrace] = {}
    rows, failed = [], []
    for cell in cells:
        if not cell.ok:
            rows.append(cell.coordinates + ("failed", None, None, None, None, None))
            failed.append(cell.coordinates + (cell.error,))
            continue
        trace = traces[cell.seed]
        if cell.num_tiles != base.num_tiles:
            key = (cell.seed, cell.num_tiles)
            if key not in remapped:
                remapped[key] = remap_uniform(trace, cell.num_tiles, base.neurons_per_tile)
            trace = remapped[key]
        report = summarize_run(cell.result, trace, experiment.run.calibration, experiment.run.aging)
        tiles = np.fromiter((e.tile for e in trace.events), dtype=np.int64, count=len(trace))
        max_spikes = int(np.bincount(tiles, minlength=1).max())
        rows.append(
            cell.coordinates
            + (
                "ok",
                report.summary["chip_max_aging"],
                report.summary["final_chip_max_aging"],
                report.summary["mean_delta_isi"],
                report.summary["destress_count"],
                max_spikes,
            )
        )
    return rows, failed


def _load(config_path: PathLike, out: Optional[PathLike], seed: Optional[int]) -> ExperimentConfig:
    experiment = load_config(config_path)
    if seed is not None:
        experiment = experiment.with_seed(seed)
    if out is not None:
        experiment = experiment.with_output_dir(out)
    return experiment


@command
def cmd_run(
    config_path: PathLike,
    out: Optional[PathLike] = None,
    seed: Optional[int] = None,
    sample_trajectory: bool = False,
) -> int:
    """Run one experiment and write its reports."""
    experiment = _load(config_path, out, seed)
    if sample_trajectory:
        experiment = replace(experiment, run=replace(experiment.run, sample_trajectory=True))
    report = run_experiment(experiment)
    logger.info(
        f"Run complete: chip max aging {report.summary['chip_max_aging']!r}, "
        f"{report.summary['destress_count']} de-stress windows"
    )
    return EXIT_OK


@command
def cmd_compare(
    config_path: PathLike,
    policies: Sequence[str],
    out: Optional[PathLike] = None,
    seed: Optional[int] = None,
    match_budget: bool = False,
) -> int:
    """Compare policies on one trace and write ``compare.csv``."""
    experiment = _load(config_path, out, seed)
    try:
        kinds = [PolicyKind(p) for p in policies]
    except ValueError as exc:
        raise ConfigurationError(str(exc), field="policies") from exc
    reports = compare_policies(experiment, kinds, match_budget=match_budget)
    stamp = experiment.stamp
    write_csv(experiment.output_dir / "compare.csv", COMPARE_HEADER, compare_rows(reports), stamp)
    logger.info(f"Compared {len(reports)} policies in {experiment.output_dir}")
    return EXIT_OK


def load_workload_spec(path: PathLike, seed: Optional[int] = None) -> PoissonWorkloadSpec:
    """Read a Poisson workload spec from a bare spec file or an experiment config.

    Raises:
        ConfigurationError: If the file holds no Poisson workload or it is invalid
    """
    data = read_document(path)
    if "workload" in data:
        experiment = ExperimentConfig.from_dict(data, base_dir=Path(path).parent)
        if experiment.workload is None or experiment.workload.poisson is None:
            raise ConfigurationError("config has no Poisson workload", field="workload.poisson")
        spec = experiment.workload.poisson
    else:
        spec = PoissonWorkloadSpec.from_dict(data)
    return replace(spec, seed=seed) if seed is not None else spec


@command
def cmd_gen(spec_path: PathLike, out: PathLike, seed: Optional[int] = None) -> int:
    """Generate a Poisson trace file."""
    trace = generate_poisson(load_workload_spec(spec_path, seed))
    write_trace(out, trace)
    return EXIT_OK


@command
def cmd_calibrate(config_path: PathLike, out: Optional[PathLike] = None) -> int:
    """Calibrate ``a_fit`` and write ``calibrated_config.json``."""
    experiment = _load(config_path, out, None)
    calibrated = calibrate_experiment(experiment)
    run_config: RunConfig = calibrated.run
    out_dir = experiment.output_dir
    document = calibrated.to_dict()
    document.update(calibrated.stamp.to_dict())
    write_json(out_dir / "calibrated_config.json", document)
    logger.info(
        f"Calibrated a_fit={run_config.aging.a_fit!r}, "
        f"baseline aging {run_config.calibration.baseline_aging!r}, written to {out_dir}"
    )
    return EXIT_OK


@command
def cmd_stats(trace_path: PathLike, out: PathLike, window: float = 1.0, bins: int = 10) -> int:
    """Write firing-rate statistics of a trace file."""
    stats = trace_stats(read_trace(trace_path), window=window, bins=bins)
    out = Path(out)
    write_stats_csv(out / "trace_stats.csv", stats)
    write_histogram_csv(out / "rate_histogram.csv", stats)
    write_json(
        out / "trace_stats.json",
        {
            "duration": stats.duration,
            "window": stats.window,
            "neurons": len(stats.neurons),
            "spikes": stats.total_spikes,
            "chip_rate_min": stats.chip_rate_min,
            "chip_rate_avg": stats.chip_rate_avg,
            "chip_rate_max": stats.chip_rate_max,
        },
    )
    logger.info(f"Rates of {len(stats.neurons)} neurons: avg {stats.chip_rate_avg!r} Hz")
    return EXIT_OK


@command
def cmd_sweep(
    config_path: PathLike,
    out: Optional[PathLike] = None,
    workers: Optional[int] = None,
) -> int:
    """Run the ``[sweep]`` grid and write ``sweep.csv`` and ``sweep_failed.csv``."""
    experiment = _load(config_path, out, None)
    axes = experiment.sweep
    if axes is None:
        raise ConfigurationError("no [sweep] section", field="sweep")
    seeds = list(axes.seeds) or [experiment.run.seed]
    traces = sweep_traces(experiment, seeds)
    cells = run_sweep(
        experiment.run,
        traces,
        policies=axes.policies,
        temperatures=axes.temperatures,
        num_tiles=axes.num_tiles,
        seeds=seeds,
        workers=experiment.workers if workers is None else workers,
    )
    rows, failed = sweep_rows(experiment, cells, traces)
    stamp = experiment.stamp
    write_csv(experiment.output_dir / "sweep.csv", SWEEP_HEADER, rows, stamp)
    write_csv(experiment.output_dir / "sweep_failed.csv", FAILED_HEADER, failed, stamp)
    return EXIT_OK
