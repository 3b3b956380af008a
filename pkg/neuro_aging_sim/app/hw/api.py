"""Chip-level operations: AER encoding, spike-counter snooping and tile de-stress."""

import logging
from typing import Iterable, List, Tuple

import numpy as np

from ..aging.models import AgingParams, Environment
from ..common.exceptions import SchedulingError, StateError, StructuralError
from ..common.models import NS_PER_SECOND, format_seconds
from .models import AerEvent, PumpVoltage, TileState

logger = logging.getLogger("neuro_aging_sim")


def aer_encode(spikes: Iterable[Tuple[int, int, int]]) -> List[AerEvent]:
    """Encode spikes as an ordered address-event stream.

    Args:
        spikes: (tile, neuron, time_ns) triples

    Returns:
        Events sorted by time, then tile, then neuron
    """
    return sorted(AerEvent(time_ns, tile, neuron) for tile, neuron, time_ns in spikes)


def snoop_count(counters: np.ndarray, event: AerEvent, counter_max: int) -> np.ndarray:
    """Count one snooped event in the spike-counter bank.

    Counters saturate at ``counter_max`` instead of wrapping.

    Args:
        counters: Counter bank of shape (num_tiles, neurons_per_tile), updated in place
        event: Snooped address event
        counter_max: Saturation value

    Returns:
        The updated counter bank

    Raises:
        StructuralError: If the event addresses a tile or neuron outside the bank
    """
    num_tiles, neurons = counters.shape
    if not (0 <= event.tile < num_tiles and 0 <= event.neuron < neurons):
        raise StructuralError(
            f"event ({event.tile}, {event.neuron}) outside a chip of {num_tiles} tiles x {neurons} neurons"
        )
    if counters[event.tile, event.neuron] < counter_max:
        counters[event.tile, event.neuron] += 1
    return counters


def reset_counters(tile: TileState) -> TileState:
    """Zero every spike counter of a tile; aging state is left alone."""
    tile.counters[:] = 0
    return tile


def settle_tile(tile: TileState, now_ns: int, params: AgingParams) -> TileState:
    """Bring every neuron of an idle tile up to ``now_ns``.

    Over the gap since its last update each neuron's recoverable pool
    recovers at the idle rate and partly converts to permanent aging, the
    same composition the engine applies before a spike. The pump
    level is brought up to date as well.

    Raises:
        StateError: If a neuron was updated past ``now_ns``
    """
    gap_ns = now_ns - tile.last_update_ns
    if (gap_ns < 0).any():
        raise StateError(f"tile {tile.tile_id} has neurons updated after {format_seconds(now_ns)}")
    gap = gap_ns / NS_PER_SECOND
    recoverable = tile.aging_recoverable * np.exp(-gap / params.tau_recover_idle)
    converted = recoverable * -np.expm1(-gap / params.tau_convert)
    tile.aging_permanent += converted
    tile.aging_recoverable = recoverable - converted
    tile.last_update_ns[:] = now_ns
    tile.pump_voltage = tile.pump_at(now_ns)
    return tile


def fire_spike(tile: TileState, now_ns: int) -> TileState:
    """Raise a tile's charge pump to the spike voltage for one emission at ``now_ns``.

    Raises:
        SchedulingError: If the tile is de-stressing
    """
    if tile.is_busy(now_ns):
        raise SchedulingError(
            f"spike at {format_seconds(now_ns)} while de-stressing until {format_seconds(tile.busy_until_ns)}",
            tile=tile.tile_id,
        )
    tile.pump_voltage = PumpVoltage.SPIKE
    tile.last_spike_ns = now_ns
    return tile


def begin_destress(
    tile: TileState,
    now_ns: int,
    tdsc_ns: int,
    env: Environment,
    params: AgingParams,
) -> TileState:
    """Take a tile offline and drop its charge pump to the de-stress voltage.

    Every neuron is first brought up to ``now_ns`` (idle recovery plus
    recoverable-to-permanent conversion over the gap since its last update),
    then receives de-stress recovery for the whole window. The resulting
    states are exact as of the window end.

    Args:
        tile: Tile to de-stress
        now_ns: Window start
        tdsc_ns: Window length
        env: Operating environment
        params: Aging parameters

    Returns:
        The same tile, now busy until ``now_ns + tdsc_ns``

    Raises:
        SchedulingError: If the tile is already de-stressing
        StateError: If a neuron was updated past ``now_ns``
    """
    if tile.is_busy(now_ns):
        logger.error(f"De-stress of tile {tile.tile_id} requested at {format_seconds(now_ns)} while busy")
        raise SchedulingError(
            f"tile busy until {format_seconds(tile.busy_until_ns)}, requested at {format_seconds(now_ns)}",
            tile=tile.tile_id,
        )
    if tdsc_ns <= 0:
        raise SchedulingError(f"de-stress window must be positive, got {tdsc_ns} ns", tile=tile.tile_id)
    settle_tile(tile, now_ns, params)
    window = tdsc_ns / NS_PER_SECOND
    tile.aging_recoverable = tile.aging_recoverable * np.exp(-window / params.tau_recover_destress)
    tile.last_update_ns[:] = now_ns + tdsc_ns

    reset_counters(tile)
    tile.pump_voltage = PumpVoltage.DESTRESS
    tile.destress_started_ns = now_ns
    tile.busy_until_ns = now_ns + tdsc_ns
    logger.debug(
        f"Tile {tile.tile_id} de-stressing at {PumpVoltage.DESTRESS.volts(env)} V "
        f"from {format_seconds(now_ns)} to {format_seconds(tile.busy_until_ns)}"
    )
    return tile


def end_destress(tile: TileState, now_ns: int) -> TileState:
    """Return a de-stressed tile to the idle voltage.

    Raises:
        StateError: If the window has not elapsed yet
    """
    if now_ns < tile.busy_until_ns:
        raise StateError(
            f"tile {tile.tile_id} released at {format_seconds(now_ns)} before {format_seconds(tile.busy_until_ns)}"
        )
    tile.pump_voltage = PumpVoltage.IDLE
    tile.destress_started_ns = None
    return tile
