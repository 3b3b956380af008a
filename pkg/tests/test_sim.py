"""
Tests for the discrete-event engine and parameter sweeps.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from neuro_aging_sim.app.aging import AgingParams
from neuro_aging_sim.app.common.exceptions import StructuralError
from neuro_aging_sim.app.hw import ChipConfig, PumpVoltage
from neuro_aging_sim.app.metrics import compute_isi_stats, isi_delta
from neuro_aging_sim.app.policy import (
    Action,
    ActionKind,
    NoManagementPolicy,
    PolicyConfig,
    Trigger,
)
from neuro_aging_sim.app.sim import (
    EventKind,
    EventQueue,
    RunConfig,
    SimEvent,
    Simulator,
    run,
    run_sweep,
    write_events_log,
    write_trajectory_csv,
)
from neuro_aging_sim.app.workload import (
    PoissonWorkloadSpec,
    SpikeTrace,
    TraceHeader,
    generate_poisson,
    generate_regular,
    read_trace,
)

MS = 1_000_000


class DestressOnNeuronZero(NoManagementPolicy):
    """Issues a hard de-stress of tile 0 whenever neuron (0, 0) fires."""

    def __init__(self, config, num_tiles, repeats=1):
        super().__init__(config, num_tiles)
        self.repeats = repeats

    def on_spike(self, tile, neuron, now_ns, view):
        if (tile, neuron) == (0, 0):
            return [Action(ActionKind.DESTRESS_NOW, 0, Trigger.HARD)] * self.repeats
        return []


def chip_max(result):
    return max(max(tile.totals()) for tile in result.snapshot.tiles)


def emitted_times(result, tile=0, neuron=0):
    return [e.time_ns for e in result.managed_trace.events if (e.tile, e.neuron) == (tile, neuron)]


@pytest.fixture
def one_neuron_chip():
    return ChipConfig(num_tiles=1, neurons_per_tile=1, input_neurons_per_tile=1)


def test_event_queue_priority():
    """Test that equal-time events pop as de-stress end, spike, then tick"""
    queue = EventQueue()
    queue.schedule(SimEvent(5, EventKind.POLICY_TICK, 0))
    queue.schedule(SimEvent(5, EventKind.SPIKE_DUE, 2, 0, 1))
    queue.schedule(SimEvent(5, EventKind.SPIKE_DUE, 1, 0, 0))
    queue.schedule(SimEvent(5, EventKind.DESTRESS_END, 3, 0))
    queue.schedule(SimEvent(4, EventKind.POLICY_TICK, 4))
    order = [queue.next_event() for _ in range(len(queue))]
    assert [(e.time_ns, e.kind, e.sequence) for e in order] == [
        (4, EventKind.POLICY_TICK, 4),
        (5, EventKind.DESTRESS_END, 3),
        (5, EventKind.SPIKE_DUE, 1),
        (5, EventKind.SPIKE_DUE, 2),
        (5, EventKind.POLICY_TICK, 0),
    ]
    assert not queue


def test_unmanaged_run_accumulates_aging(unit_aging, one_neuron_chip):
    """Test that 50 spikes of 0.01 units each age a neuron by 0.5 without management"""
    trace = generate_regular(1.0, 50.0)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging), trace)
    assert result.managed_trace.events == trace.events
    assert chip_max(result) == pytest.approx(0.5)
    assert result.peak_aging == pytest.approx(0.5)
    assert result.destress_count == 0
    assert result.deferred_spikes == 0
    assert result.end_ns == 1_000_000_000
    assert result.event_counts["spike_due"] == 50
    assert result.energy_j == pytest.approx(50 * (50e-12 + 147e-12))
    assert result.policy == "none"


def test_single_window_delays_one_spike(recovering_aging, small_chip, make_trace):
    """Test that one 10 ms window adds 2 ms per spike to a neuron firing five times"""
    trace = make_trace([(t, 0, 1) for t in (0.0, 0.02, 0.04, 0.06, 0.08)] + [(0.04, 0, 0)], duration=0.1)
    config = RunConfig(chip=small_chip, aging=recovering_aging, policy=PolicyConfig(tdsc=0.01))
    result = Simulator(config, trace, DestressOnNeuronZero(config.policy, 1)).run()

    assert result.destress_count == 1
    assert result.destress_log[0].time_ns == 40 * MS
    assert result.deferred_spikes == 1
    assert emitted_times(result, 0, 1) == [0, 20 * MS, 50 * MS, 60 * MS, 80 * MS]
    assert emitted_times(result, 0, 0) == [40 * MS]

    report = isi_delta(compute_isi_stats(trace), compute_isi_stats(result.managed_trace), result.destress_log)
    delayed = report.neurons[1]
    assert delayed.delta_avg_per_spike == pytest.approx(0.002, rel=1e-12)
    assert delayed.delta_avg_closed_form == pytest.approx(0.002, rel=1e-12)
    assert delayed.isi_avg_literal == pytest.approx(0.022)


def test_fixed_interval_defers_spike(unit_aging, one_neuron_chip, make_trace):
    """Test that a spike due inside a window is emitted when the window ends"""
    trace = make_trace([(0.005, 0, 0), (0.011, 0, 0)], duration=0.015)
    policy = PolicyConfig(kind="fixed_interval", interval=0.01, tdsc=0.002)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=policy), trace)

    assert emitted_times(result) == [5 * MS, 12 * MS]
    assert result.deferred_spikes == 1
    assert [(r.time_ns, r.trigger) for r in result.destress_log] == [(10 * MS, Trigger.PERIODIC)]
    assert result.event_counts["policy_tick"] == 1
    assert result.event_counts["destress_end"] == 1
    assert result.event_counts["spike_due"] == 3
    assert result.end_ns == 15 * MS


def test_released_spikes_of_one_neuron_are_serialized(unit_aging, one_neuron_chip, make_trace):
    """Test that two spikes held by one window leave one nanosecond apart"""
    trace = make_trace([(0.011, 0, 0), (0.012, 0, 0)], duration=0.015)
    policy = PolicyConfig(kind="fixed_interval", interval=0.01, tdsc=0.005)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=policy), trace)

    assert emitted_times(result) == [15_000_000, 15_000_001]
    assert result.deferred_spikes == 2
    assert result.managed_trace.header.duration_ns == 15_000_001
    assert result.end_ns == 15_000_001


def test_spike_at_tick_time_goes_first(unit_aging, one_neuron_chip, make_trace):
    """Test that a spike due at a tick is emitted before the window opens"""
    trace = make_trace([(0.01, 0, 0)], duration=0.015)
    policy = PolicyConfig(kind="fixed_interval", interval=0.01, tdsc=0.002)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=policy), trace)
    assert emitted_times(result) == [10 * MS]
    assert result.deferred_spikes == 0


def test_fixed_interval_on_empty_trace(unit_aging, one_neuron_chip):
    """Test that windows are issued on schedule with no spikes at all"""
    trace = SpikeTrace(header=TraceHeader(trace_id="empty", duration_ns=300 * MS))
    policy = PolicyConfig(kind="fixed_interval", interval=0.1, tdsc=0.01)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=policy), trace)
    assert [r.time_ns for r in result.destress_log] == [100 * MS, 200 * MS, 300 * MS]
    assert result.end_ns == 310 * MS
    assert chip_max(result) == 0.0
    assert len(result.managed_trace) == 0


def test_more_frequent_destress_ages_less(recovering_aging, one_neuron_chip):
    """Test that shorter de-stress intervals leave less aging behind"""
    trace = generate_regular(10.0, 50.0)
    base = RunConfig(chip=one_neuron_chip, aging=recovering_aging)
    none = run(base, trace)
    slow = run(replace(base, policy=PolicyConfig(kind="fixed_interval", interval=1.0, tdsc=0.01)), trace)
    fast = run(replace(base, policy=PolicyConfig(kind="fixed_interval", interval=0.1, tdsc=0.01)), trace)

    assert chip_max(none) > chip_max(slow) > chip_max(fast)
    assert none.peak_aging > slow.peak_aging > fast.peak_aging
    assert slow.destress_count == 10
    assert fast.destress_count == 100
    assert fast.deferred_spikes == 0


def test_dynamic_avoids_needless_windows(unit_aging, one_neuron_chip, make_trace):
    """Test that a lightly loaded neuron is left alone by the dynamic policy but not by a timer"""
    trace = make_trace([(0.010, 0, 0), (0.105, 0, 0), (0.150, 0, 0), (0.250, 0, 0)], duration=0.3)
    dynamic = PolicyConfig(kind="dynamic", th_a=0.05, tdsc=0.01)
    fixed = PolicyConfig(kind="fixed_interval", interval=0.1, tdsc=0.01)
    dynamic_result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=dynamic), trace)
    fixed_result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=fixed), trace)

    assert dynamic_result.destress_count == 0
    assert dynamic_result.managed_trace.events == trace.events
    assert fixed_result.destress_count == 3
    assert fixed_result.deferred_spikes == 1
    assert emitted_times(fixed_result)[1] == 110 * MS

    baseline = compute_isi_stats(trace)
    assert isi_delta(baseline, compute_isi_stats(dynamic_result.managed_trace)).mean_delta_per_spike == 0.0
    fixed_delta = isi_delta(baseline, compute_isi_stats(fixed_result.managed_trace), fixed_result.destress_log)
    assert fixed_delta.mean_delta_per_spike == pytest.approx(0.005 / 4)


def test_dynamic_hard_trigger(recoverable_only_aging, one_neuron_chip, make_trace):
    """Test that crossing th_a on a spike opens a window at once"""
    trace = make_trace([(0.0, 0, 0), (0.01, 0, 0), (0.02, 0, 0)], duration=0.05)
    policy = PolicyConfig(kind="dynamic", th_a=0.025, tdsc=0.01)
    result = run(RunConfig(chip=one_neuron_chip, aging=recoverable_only_aging, policy=policy), trace)

    at_issue = 0.01 * (1 + math.exp(-0.02) + math.exp(-0.04))
    assert [(r.time_ns, r.trigger) for r in result.destress_log] == [(20 * MS, Trigger.HARD)]
    assert result.destress_log[0].aging_at_issue == pytest.approx(at_issue)
    assert result.peak_aging == pytest.approx(at_issue)
    assert chip_max(result) == pytest.approx(at_issue * math.exp(-0.2) * math.exp(-0.04))
    assert result.end_ns == 50 * MS


def test_dynamic_opportunistic_trigger(recoverable_only_aging, one_neuron_chip, make_trace):
    """Test that a queued tile is de-stressed once its predicted idle gap covers the window"""
    trace = make_trace([(0.0, 0, 0), (0.01, 0, 0), (0.02, 0, 0)], duration=0.05)
    policy = PolicyConfig(kind="dynamic", th_a=0.05, soft_fraction=0.5, tdsc=0.005)
    result = run(RunConfig(chip=one_neuron_chip, aging=recoverable_only_aging, policy=policy), trace)

    assert [(r.time_ns, r.trigger) for r in result.destress_log] == [(20 * MS, Trigger.OPPORTUNISTIC)]
    assert result.event_counts["enqueued"] == 1


def test_dynamic_skips_windows_that_cannot_help(one_neuron_chip, make_trace):
    """Test that purely permanent aging past th_a opens no windows"""
    aging = AgingParams(a_fit=0.1, gamma=0.0, e_a=0.0, beta=1.0, rho_recoverable=0.0, tau_convert=math.inf)
    trace = make_trace([(0.01 * k, 0, 0) for k in range(1, 6)], duration=0.06)
    policy = PolicyConfig(kind="dynamic", th_a=0.025, tdsc=0.01)
    result = run(RunConfig(chip=one_neuron_chip, aging=aging, policy=policy), trace)

    assert result.destress_count == 0
    assert result.deferred_spikes == 0
    assert result.managed_trace.events == trace.events
    assert result.peak_aging == pytest.approx(0.05)


def test_idle_prediction_follows_the_latest_of_equally_busy_neurons(unit_aging, small_chip, make_trace):
    """Test that equally active neurons are resolved toward the one that fired last"""
    trace = make_trace([(0.0, 0, 0), (0.01, 0, 0), (0.02, 0, 1), (0.05, 0, 1)], duration=0.1)
    simulator = Simulator(RunConfig(chip=small_chip, aging=unit_aging), trace)
    simulator.run()
    assert list(simulator.chip.counters[0]) == [2, 2]
    assert simulator.view.recent_isis(0) == pytest.approx((0.03,))


def test_pump_ends_at_the_level_of_the_last_instant(unit_aging, small_chip, make_trace):
    """Test that the pump is at V_spike only when the run ends on an emission"""
    spikes = [(0.01, 0, 0), (0.02, 0, 1)]
    idle = run(RunConfig(chip=small_chip, aging=unit_aging), make_trace(spikes, duration=0.05))
    assert idle.snapshot.tiles[0].pump_voltage is PumpVoltage.IDLE
    spiking = run(RunConfig(chip=small_chip, aging=unit_aging), make_trace(spikes))
    assert spiking.snapshot.tiles[0].pump_voltage is PumpVoltage.SPIKE


def test_double_booked_destress_is_skipped(unit_aging, small_chip, make_trace):
    """Test that a second window requested for a busy tile is dropped and counted"""
    trace = make_trace([(0.01, 0, 0)], duration=0.05)
    config = RunConfig(chip=small_chip, aging=unit_aging, policy=PolicyConfig(tdsc=0.01))
    result = Simulator(config, trace, DestressOnNeuronZero(config.policy, 1, repeats=2)).run()
    assert result.destress_count == 1
    assert result.skipped_destress == 1


def test_trace_outside_chip_is_rejected(unit_aging, small_chip, make_trace):
    """Test that events addressing missing neurons fail before the run"""
    with pytest.raises(StructuralError):
        run(RunConfig(chip=small_chip, aging=unit_aging), make_trace([(0.0, 0, 5)]))


def test_trajectory_sampling(tmp_path, unit_aging, one_neuron_chip):
    """Test that every stride-th emission is sampled"""
    trace = generate_regular(0.1, 50.0)
    config = RunConfig(chip=one_neuron_chip, aging=unit_aging, sample_trajectory=True, trajectory_stride=2)
    result = run(config, trace)
    assert [s.time_ns for s in result.trajectory] == [0, 40 * MS, 80 * MS]
    assert [s.aging_total for s in result.trajectory] == pytest.approx([0.01, 0.03, 0.05])
    assert run(RunConfig(chip=one_neuron_chip, aging=unit_aging), trace).trajectory is None

    lines = write_trajectory_csv(tmp_path / "trajectory.csv", result.trajectory).read_text().splitlines()
    assert lines[0] == "time,tile,neuron,aging_total,tile_peak"
    assert lines[1].startswith("0.000000000,0,0,")


def test_runs_are_deterministic(recovering_aging):
    """Test that identical inputs give identical results"""
    trace = generate_poisson(PoissonWorkloadSpec(duration=1.0, num_tiles=2, neurons_per_tile=4, rate=80.0, seed=2))
    config = RunConfig(
        chip=ChipConfig(num_tiles=2, neurons_per_tile=4, input_neurons_per_tile=4),
        aging=recovering_aging,
        policy=PolicyConfig(kind="dynamic", th_a=0.05, tdsc=0.01),
    )
    first, second = run(config, trace), run(config, trace)
    assert first.managed_trace == second.managed_trace
    assert first.destress_log == second.destress_log
    assert first.snapshot == second.snapshot
    assert first.config_hash == second.config_hash


def test_events_log_round_trip(tmp_path, unit_aging, one_neuron_chip, make_trace):
    """Test that the events log parses back to the managed spikes with window annotations"""
    trace = make_trace([(0.005, 0, 0), (0.011, 0, 0)], duration=0.015)
    policy = PolicyConfig(kind="fixed_interval", interval=0.01, tdsc=0.002)
    result = run(RunConfig(chip=one_neuron_chip, aging=unit_aging, policy=policy), trace)
    parsed = read_trace(write_events_log(tmp_path / "events.log", result))
    assert parsed.events == result.managed_trace.events
    extra = dict(parsed.header.extra)
    assert extra["policy"] == "fixed_interval"
    assert extra["destress.0"] == "0.010000000,0,periodic"


@pytest.fixture
def sweep_trace():
    """96 neurons at a constant 20 Hz on 12 tiles."""
    return generate_poisson(PoissonWorkloadSpec(duration=2.0, num_tiles=12, neurons_per_tile=8, rate=20.0, seed=1))


@pytest.fixture
def sweep_base(unit_aging):
    return RunConfig(chip=ChipConfig(num_tiles=12, neurons_per_tile=8, input_neurons_per_tile=8), aging=unit_aging)


def test_sweep_over_tile_counts(sweep_trace, sweep_base):
    """Test that spreading a workload over more tiles keeps neuron aging and thins out tiles"""
    cells = run_sweep(sweep_base, {0: sweep_trace}, num_tiles=[12, 16, 32])
    assert [cell.num_tiles for cell in cells] == [12, 16, 32]
    assert all(cell.ok for cell in cells)

    maxima = [chip_max(cell.result) for cell in cells]
    assert maxima[0] == maxima[1] == maxima[2]
    busiest = [
        int(np.bincount([e.tile for e in cell.result.managed_trace.events], minlength=1).max()) for cell in cells
    ]
    assert busiest[0] >= busiest[1] >= busiest[2]


def test_sweep_over_temperatures(sweep_trace, sweep_base):
    """Test that aging grows with temperature when the activation energy is positive"""
    aging = AgingParams(a_fit=0.1, gamma=0.0, e_a=0.1, beta=1.0).without_recovery()
    base = RunConfig(chip=sweep_base.chip, aging=aging)
    cells = run_sweep(base, {0: sweep_trace}, temperatures=[300.0, 320.0, 340.0])
    maxima = [chip_max(cell.result) for cell in cells]
    assert maxima[0] < maxima[1] < maxima[2]

    warmer = run_sweep(base, {0: sweep_trace}, temperatures=[301.0])[0]
    assert chip_max(warmer.result) > maxima[0]


def test_sweep_records_failed_cells(sweep_trace, sweep_base):
    """Test that invalid cells are reported without stopping the sweep"""
    base = RunConfig(chip=sweep_base.chip, aging=sweep_base.aging, policy=PolicyConfig(interval=0.01, tdsc=0.02))
    cells = run_sweep(base, {0: sweep_trace}, policies=["none", "fixed_interval"], num_tiles=[12, 1])
    assert [(cell.policy, cell.num_tiles) for cell in cells] == [
        ("none", 12),
        ("none", 1),
        ("fixed_interval", 12),
        ("fixed_interval", 1),
    ]
    assert [cell.ok for cell in cells] == [True, False, False, False]
    assert "Structural Error" in cells[1].error
    assert "Configuration Error" in cells[2].error


def test_sweep_in_worker_processes(sweep_trace, sweep_base):
    """Test that worker processes reproduce the in-process results"""
    axes = {"policies": ["none", "dynamic"], "temperatures": [300.0, 340.0]}
    serial = run_sweep(sweep_base, {0: sweep_trace}, workers=1, **axes)
    parallel = run_sweep(sweep_base, {0: sweep_trace}, workers=2, **axes)
    assert [c.coordinates for c in serial] == [c.coordinates for c in parallel]
    for a, b in zip(serial, parallel):
        assert a.result.snapshot == b.result.snapshot
        assert a.result.destress_log == b.result.destress_log
