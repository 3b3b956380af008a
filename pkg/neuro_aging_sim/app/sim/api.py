"""Deterministic discrete-event engine and parameter sweeps.

One run walks a strict event order: de-stress ends, then due spikes (in
trace order), then policy timer ticks at equal times. Neuron aging is
updated lazily, on the neuron's own spikes and on de-stress boundaries of
its tile, which is exact because recovery and conversion compose in closed
form over idle gaps.
"""

import logging
import os
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from itertools import count, product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..aging.api import apply_recovery, apply_stress
from ..aging.models import RecoveryMode
from ..common.exceptions import AgingSimError, InternalError
from ..common.models import NS_PER_SECOND, format_seconds
from ..hw.api import aer_encode, begin_destress, end_destress, fire_spike, settle_tile, snoop_count
from ..hw.models import AerEvent, ChipState
from ..policy.api import ReliabilityPolicy, build_policy
from ..policy.models import Action, ActionKind, DestressRecord, PolicyKind
from ..workload.api import remap_uniform
from ..workload.models import SpikeEvent, SpikeTrace
from .models import EventKind, RunConfig, RunResult, SimEvent, SweepCell, TrajectorySample
from .utils import EventQueue

logger = logging.getLogger("neuro_aging_sim")


class ChipView:
    """Read-only chip view handed to policies."""

    def __init__(self, simulator: "Simulator"):
        self._sim = simulator
        self.num_tiles = simulator.chip.config.num_tiles

    def tile_max_aging(self, tile: int, now_ns: int) -> float:
        return self._sim.chip.tiles[tile].max_total(now_ns, self._sim.config.aging)

    def destressed_max_aging(self, tile: int, now_ns: int) -> float:
        sim = self._sim
        return sim.chip.tiles[tile].destressed_max_total(now_ns, sim.config.policy.tdsc_ns, sim.config.aging)

    def is_busy(self, tile: int, now_ns: int) -> bool:
        return self._sim.chip.tiles[tile].is_busy(now_ns)

    def recent_isis(self, tile: int) -> Sequence[float]:
        # Most active neuron since the last counter reset; ties go to the one that fired last.
        counts = self._sim.chip.counters[tile]
        busiest = np.flatnonzero(counts == counts.max())
        neuron = int(busiest[np.argmax(self._sim.last_emit_ns[tile, busiest])])
        return tuple(self._sim.recent_isis.get((tile, neuron), ()))


class Simulator:
    """Single-run discrete-event simulation of a chip under a reliability policy."""

    def __init__(self, config: RunConfig, trace: SpikeTrace, policy: Optional[ReliabilityPolicy] = None):
        """Prepare a run.

        Args:
            config: Run configuration
            trace: Input spike workload
            policy: Policy instance; built from ``config.policy`` when omitted

        Raises:
            StructuralError: If the trace addresses neurons outside the chip
        """
        chip = config.chip
        trace.validate(chip.num_tiles, chip.neurons_per_tile)
        self.config = config
        self.trace = trace
        self.policy = policy or build_policy(config.policy, chip.num_tiles)
        self.chip = ChipState(chip)
        self.view = ChipView(self)
        self.horizon_ns = trace.duration_ns
        self.recent_isis: Dict[Tuple[int, int], deque] = {}

        self._now = 0
        self._sequence = count(len(trace))
        self.last_emit_ns = np.full((chip.num_tiles, chip.neurons_per_tile), -1, dtype=np.int64)
        self._peak = np.zeros(chip.num_tiles, dtype=np.float64)
        self._emitted: List[Tuple[int, int, int]] = []
        self._destress_log: List[DestressRecord] = []
        self._trajectory: List[TrajectorySample] = []
        self._counts = {kind.name.lower(): 0 for kind in EventKind}
        self._counts["enqueued"] = 0
        self._deferred = 0
        self._skipped = 0
        self._queue = EventQueue(
            [SimEvent(e.time_ns, EventKind.SPIKE_DUE, i, e.tile, e.neuron) for i, e in enumerate(trace.events)]
        )
        self._schedule_tick()

    def _schedule_tick(self) -> None:
        due = self.policy.next_tick_ns()
        if due is not None and due <= self.horizon_ns:
            self._queue.schedule(SimEvent(due, EventKind.POLICY_TICK, next(self._sequence)))

    def run(self) -> RunResult:
        """Execute the run.

        Returns:
            Run result

        Raises:
            InternalError: If the event order regresses or a spike goes missing
        """
        started = time.perf_counter()
        logger.info(f"Running policy {self.policy.name} on {len(self.trace)} spikes")
        while self._queue:
            event = self._queue.next_event()
            if event.time_ns < self._now:
                raise InternalError(f"event at {format_seconds(event.time_ns)} after {format_seconds(self._now)}")
            self._now = event.time_ns
            self._counts[event.kind.name.lower()] += 1
            if event.kind is EventKind.DESTRESS_END:
                end_destress(self.chip.tiles[event.tile], self._now)
            elif event.kind is EventKind.SPIKE_DUE:
                self._spike_due(event)
            else:
                self._apply(self.policy.on_tick(self._now, self.view))
                self._schedule_tick()
            if self.policy.wants_event_ticks and event.kind is not EventKind.POLICY_TICK:
                self._apply(self.policy.on_tick(self._now, self.view))
        return self._finish(time.perf_counter() - started)

    def _spike_due(self, event: SimEvent) -> None:
        tile = self.chip.tiles[event.tile]
        if tile.is_busy(self._now):
            self._deferred += 1
            logger.debug(
                f"Spike {event.sequence} of ({event.tile}, {event.neuron}) "
                f"deferred to {format_seconds(tile.busy_until_ns)}"
            )
            self._queue.schedule(event._replace(time_ns=tile.busy_until_ns))
            return
        last = int(self.last_emit_ns[event.tile, event.neuron])
        if last >= self._now:
            # Two spikes of one neuron released by the same window go out one clock tick apart.
            self._queue.schedule(event._replace(time_ns=last + 1))
            return
        self._emit(event, last)

    def _emit(self, event: SimEvent, last_emit_ns: int) -> None:
        config = self.config
        tile_id, neuron = event.tile, event.neuron
        tile = self.chip.tiles[tile_id]
        gap_ns = self._now - int(tile.last_update_ns[neuron])
        if gap_ns < 0:
            raise InternalError(f"neuron ({tile_id}, {neuron}) updated past {format_seconds(self._now)}")
        gap = gap_ns / NS_PER_SECOND
        state = apply_recovery(tile.neuron_state(neuron), gap, RecoveryMode.IDLE, config.aging)
        state = apply_stress(state, 1, gap, config.env, config.aging)
        fire_spike(tile, self._now)
        tile.store(neuron, state, self._now)
        snoop_count(self.chip.counters, AerEvent(self._now, tile_id, neuron), config.chip.counter_max)
        self._emitted.append((tile_id, neuron, self._now))

        if last_emit_ns >= 0:
            history = self.recent_isis.get((tile_id, neuron))
            if history is None:
                history = self.recent_isis[(tile_id, neuron)] = deque(maxlen=config.policy.idle_predictor_window)
            history.append((self._now - last_emit_ns) / NS_PER_SECOND)
        self.last_emit_ns[tile_id, neuron] = self._now

        # A neuron's total peaks right after its own spikes, so this tracks the tile maximum exactly.
        if state.total > self._peak[tile_id]:
            self._peak[tile_id] = state.total
        if config.sample_trajectory and (len(self._emitted) - 1) % config.trajectory_stride == 0:
            self._trajectory.append(
                TrajectorySample(self._now, tile_id, neuron, state.total, float(self._peak[tile_id]))
            )
        self._apply(self.policy.on_spike(tile_id, neuron, self._now, self.view))

    def _apply(self, actions: List[Action]) -> None:
        for action in actions:
            if action.kind is ActionKind.ENQUEUE:
                self._counts["enqueued"] += 1
            elif action.kind is ActionKind.DESTRESS_NOW:
                self._destress(action)

    def _destress(self, action: Action) -> None:
        config = self.config
        tile = self.chip.tiles[action.tile]
        if tile.is_busy(self._now):
            self._skipped += 1
            logger.warning(
                f"Skipping de-stress of tile {action.tile} at {format_seconds(self._now)}: "
                f"busy until {format_seconds(tile.busy_until_ns)}"
            )
            return
        aging = tile.max_total(self._now, config.aging)
        tdsc_ns = config.policy.tdsc_ns
        begin_destress(tile, self._now, tdsc_ns, config.env, config.aging)
        self._destress_log.append(DestressRecord(self._now, action.tile, action.trigger, aging, tdsc_ns))
        self._queue.schedule(SimEvent(self._now + tdsc_ns, EventKind.DESTRESS_END, next(self._sequence), action.tile))
        self.policy.notify_destress(action.tile, self._now)
        logger.debug(f"De-stress of tile {action.tile} ({action.trigger.value}) at aging {aging!r}")

    def _finish(self, elapsed: float) -> RunResult:
        if len(self._emitted) != len(self.trace):
            raise InternalError(f"{len(self.trace)} spikes in, {len(self._emitted)} out")
        end_ns = max([self.horizon_ns, self._now] + [t.busy_until_ns for t in self.chip.tiles])
        for tile in self.chip.tiles:
            settle_tile(tile, end_ns, self.config.aging)

        events = tuple(SpikeEvent(*e) for e in aer_encode(self._emitted))
        last_ns = events[-1].time_ns if events else 0
        header = self.trace.header
        if header.duration_ns is not None and last_ns > header.duration_ns:
            header = type(header)(header.trace_id, header.time_unit, header.chip_hash, last_ns, header.extra)
        chip = self.config.chip
        result = RunResult(
            policy=self.policy.name,
            managed_trace=SpikeTrace(header=header, events=events),
            destress_log=tuple(self._destress_log),
            snapshot=self.chip.snapshot(),
            config_echo=self.config.to_dict(),
            config_hash=self.config.config_hash,
            seed=self.config.seed,
            end_ns=end_ns,
            peak_tile_aging=tuple(self._peak.tolist()),
            event_counts=dict(self._counts),
            deferred_spikes=self._deferred,
            skipped_destress=self._skipped,
            energy_j=len(events) * (chip.energy_per_spike + chip.energy_per_routing),
            trajectory=tuple(self._trajectory) if self.config.sample_trajectory else None,
            wall_clock=elapsed,
        )
        logger.info(
            f"Policy {result.policy}: {result.destress_count} de-stress windows, "
            f"{self._deferred} deferrals, peak aging {result.peak_aging!r}, {elapsed:.3f} s wall clock"
        )
        return result


def run(config: RunConfig, trace: SpikeTrace, policy: Optional[ReliabilityPolicy] = None) -> RunResult:
    """Simulate ``trace`` on the chip described by ``config``.

    Args:
        config: Run configuration
        trace: Input spike workload
        policy: Optional custom policy instance

    Returns:
        Run result, fully determined by (config, trace)
    """
    return Simulator(config, trace, policy).run()


def _run_cell(job: Tuple[RunConfig, SpikeTrace, Tuple[str, float, int, int]]) -> SweepCell:
    config, trace, (policy, temperature, num_tiles, seed) = job
    try:
        result = run(config, trace)
    except AgingSimError as exc:
        return SweepCell(policy, temperature, num_tiles, seed, error=str(exc))
    return SweepCell(policy, temperature, num_tiles, seed, result=result)


def run_sweep(
    base: RunConfig,
    traces: Mapping[int, SpikeTrace],
    policies: Sequence[PolicyKind] = (),
    temperatures: Sequence[float] = (),
    num_tiles: Sequence[int] = (),
    seeds: Sequence[int] = (),
    workers: Optional[int] = 1,
) -> List[SweepCell]:
    """Run the Cartesian product of policy x temperature x tile count x seed.

    An empty axis holds the base configuration's value. Cells whose tile
    count differs from the base chip run on the trace remapped round-robin
    onto the new tiles. A failing cell is recorded and the sweep goes on.

    Args:
        base: Configuration every cell starts from
        traces: Input trace per seed
        policies: Policy axis
        temperatures: Temperature axis in kelvin
        num_tiles: Tile-count axis
        seeds: Seed axis; each seed needs an entry in ``traces``
        workers: Worker processes; 1 runs in-process, 0 or None uses every core

    Returns:
        One cell per coordinate, in axis order
    """
    policies = list(policies) or [base.policy.kind]
    temperatures = list(temperatures) or [base.env.temperature]
    num_tiles = list(num_tiles) or [base.chip.num_tiles]
    seeds = list(seeds) or [base.seed]

    jobs = []
    remapped: Dict[Tuple[int, int], SpikeTrace] = {}
    for policy, temperature, tiles, seed in product(policies, temperatures, num_tiles, seeds):
        kind = PolicyKind(policy)
        coordinates = (kind.value, float(temperature), int(tiles), int(seed))
        trace = traces[seed]
        try:
            if tiles != base.chip.num_tiles:
                key = (seed, tiles)
                if key not in remapped:
                    remapped[key] = remap_uniform(trace, tiles, base.chip.neurons_per_tile)
                trace = remapped[key]
            config = base.with_policy(kind).with_temperature(temperature).with_num_tiles(tiles).with_seed(seed)
        except AgingSimError as exc:
            jobs.append(exc)
            continue
        jobs.append((config, trace, coordinates))

    workers = workers or os.cpu_count() or 1
    runnable = [job for job in jobs if not isinstance(job, Exception)]
    logger.info(f"Sweeping {len(jobs)} cells on {min(workers, max(len(runnable), 1))} workers")
    if workers == 1 or len(runnable) <= 1:
        finished = [_run_cell(job) for job in runnable]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            finished = list(pool.map(_run_cell, runnable))

    cells = []
    done = iter(finished)
    for job, coordinates in zip(jobs, product(policies, temperatures, num_tiles, seeds)):
        if isinstance(job, Exception):
            policy, temperature, tiles, seed = coordinates
            cells.append(SweepCell(PolicyKind(policy).value, float(temperature), int(tiles), int(seed), error=str(job)))
        else:
            cells.append(next(done))
    for cell in cells:
        if not cell.ok:
            logger.warning(f"Sweep cell {cell.coordinates} failed: {cell.error}")
    completed = sum(cell.ok for cell in cells)
    logger.info(f"Sweep finished: {completed}/{len(cells)} cells completed")
    return cells
