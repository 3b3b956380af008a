"""
Tests for the chip model: AER encoding, spike counters and tile de-stress.
"""

import math

import numpy as np
import pytest

from neuro_aging_sim.app.aging import Environment, NeuronAgingState
from neuro_aging_sim.app.common.exceptions import ConfigurationError, SchedulingError, StateError, StructuralError
from neuro_aging_sim.app.hw import (
    AerEvent,
    ChipConfig,
    ChipState,
    PumpVoltage,
    aer_encode,
    begin_destress,
    end_destress,
    fire_spike,
    reset_counters,
    settle_tile,
    snoop_count,
)

MS = 1_000_000


def test_counter_storage_of_default_chip():
    """Test that 12 tiles x 128 neurons x 16-bit counters take 24,576 bits"""
    chip = ChipConfig()
    assert chip.counter_storage_bits == 24_576
    assert chip.total_neurons == 1_536
    assert chip.crosspoints_per_tile == 128 * 128
    assert chip.counter_max == 65_535


def test_chip_config_validation():
    """Test chip geometry validation"""
    with pytest.raises(ConfigurationError):
        ChipConfig(num_tiles=0)
    with pytest.raises(ConfigurationError):
        ChipConfig(crosspoints_per_tile=100)
    with pytest.raises(ConfigurationError):
        ChipConfig.from_dict({"tiles": 4})
    assert ChipConfig.from_dict({"num_tiles": 4}).with_num_tiles(8).num_tiles == 8


def test_aer_encode_order():
    """Test that events are ordered by time, then tile, then neuron"""
    spikes = [(1, 0, 5 * MS), (0, 3, 5 * MS), (0, 1, 2 * MS), (2, 0, 1 * MS)]
    events = aer_encode(spikes)
    assert events == [
        AerEvent(1 * MS, 2, 0),
        AerEvent(2 * MS, 0, 1),
        AerEvent(5 * MS, 0, 3),
        AerEvent(5 * MS, 1, 0),
    ]
    assert events[0].time == pytest.approx(0.001)


def test_snoop_count_saturates():
    """Test that counters stop at their maximum"""
    counters = np.zeros((2, 2), dtype=np.int64)
    for _ in range(5):
        snoop_count(counters, AerEvent(0, 1, 0), counter_max=3)
    assert counters[1, 0] == 3
    assert counters.sum() == 3


def test_snoop_count_rejects_unknown_address():
    """Test that an event outside the chip is a structural error"""
    counters = np.zeros((2, 2), dtype=np.int64)
    with pytest.raises(StructuralError):
        snoop_count(counters, AerEvent(0, 2, 0), counter_max=3)


def test_reset_counters_clears_one_tile():
    """Test that resetting a tile zeroes its row of the counter bank and keeps its aging"""
    chip = ChipState(ChipConfig(num_tiles=2, neurons_per_tile=2, input_neurons_per_tile=2))
    chip.tiles[0].store(1, NeuronAgingState(aging_recoverable=0.2), 0)
    for tile, neuron in ((0, 0), (0, 1), (1, 1)):
        snoop_count(chip.counters, AerEvent(0, tile, neuron), chip.config.counter_max)

    reset_counters(chip.tiles[0])
    assert chip.counters[0].tolist() == [0, 0]
    assert chip.counters[1].tolist() == [0, 1]
    assert chip.tiles[0].neuron_state(1).aging_recoverable == 0.2


def test_pump_voltages():
    """Test the charge-pump levels"""
    env = Environment()
    assert PumpVoltage.DESTRESS.volts(env) == 1.2
    assert PumpVoltage.IDLE.volts(env) == 1.8
    assert PumpVoltage.SPIKE.volts(env) == 3.0


def test_spike_pulse_is_instantaneous(recovering_aging, env, small_chip):
    """Test that the pump sits at V_spike only at the instant of an emission"""
    tile = ChipState(small_chip).tiles[0]
    assert tile.pump_at(0) is PumpVoltage.IDLE

    fire_spike(tile, 3 * MS)
    assert tile.pump_voltage is PumpVoltage.SPIKE
    assert tile.pump_at(3 * MS) is PumpVoltage.SPIKE
    settle_tile(tile, 3 * MS, recovering_aging)
    assert tile.pump_voltage is PumpVoltage.SPIKE
    settle_tile(tile, 4 * MS, recovering_aging)
    assert tile.pump_voltage is PumpVoltage.IDLE

    begin_destress(tile, 5 * MS, 5 * MS, env, recovering_aging)
    assert tile.pump_at(7 * MS) is PumpVoltage.DESTRESS
    with pytest.raises(SchedulingError) as exc_info:
        fire_spike(tile, 7 * MS)
    assert exc_info.value.tile == 0
    assert tile.last_spike_ns == 3 * MS


def test_destressed_max_total_matches_a_window(recovering_aging, env, small_chip):
    """Test that the projected post-window aging equals what a window leaves behind"""
    tile = ChipState(small_chip).tiles[0]
    tile.store(0, NeuronAgingState(aging_recoverable=0.6, aging_permanent=0.1), 0)
    tile.store(1, NeuronAgingState(aging_recoverable=0.2, aging_permanent=0.3), 40 * MS)

    projected = tile.destressed_max_total(100 * MS, 10 * MS, recovering_aging)
    assert tile.aging_recoverable[0] == 0.6
    assert tile.last_update_ns[1] == 40 * MS

    begin_destress(tile, 100 * MS, 10 * MS, env, recovering_aging)
    assert projected == pytest.approx(float(np.max(tile.aging_permanent + tile.aging_recoverable)))


def test_begin_destress(recovering_aging, env, small_chip):
    """Test that a de-stress recovers the tile, resets counters and marks it busy"""
    chip = ChipState(small_chip)
    tile = chip.tiles[0]
    tile.store(0, NeuronAgingState(aging_recoverable=0.5, aging_permanent=0.2), 10 * MS)
    chip.counters[0, 0] = 7

    begin_destress(tile, 10 * MS, 5 * MS, env, recovering_aging)

    assert tile.aging_recoverable[0] == pytest.approx(0.5 * math.exp(-0.005 / 0.05))
    assert tile.aging_permanent[0] == pytest.approx(0.2)
    assert tile.last_update_ns[0] == 15 * MS
    assert chip.counters[0, 0] == 0
    assert tile.pump_voltage is PumpVoltage.DESTRESS
    assert tile.is_busy(14 * MS)
    assert not tile.is_busy(15 * MS)


def test_begin_destress_applies_idle_gap_first(recovering_aging, env, small_chip):
    """Test that neurons idle since their last update recover at the idle rate before the window"""
    tile = ChipState(small_chip).tiles[0]
    tile.store(1, NeuronAgingState(aging_recoverable=1.0), 0)
    begin_destress(tile, 500 * MS, 50 * MS, env, recovering_aging)
    idle = math.exp(-1.0)
    converted = idle * -math.expm1(-0.5 / 10.0)
    assert tile.aging_permanent[1] == pytest.approx(converted)
    assert tile.aging_recoverable[1] == pytest.approx((idle - converted) * math.exp(-1.0))


def test_begin_destress_while_busy(recovering_aging, env, small_chip):
    """Test that a second window on a busy tile is refused"""
    tile = ChipState(small_chip).tiles[0]
    begin_destress(tile, 0, 5 * MS, env, recovering_aging)
    with pytest.raises(SchedulingError) as exc_info:
        begin_destress(tile, 2 * MS, 5 * MS, env, recovering_aging)
    assert exc_info.value.tile == 0


def test_end_destress(recovering_aging, env, small_chip):
    """Test that a tile returns to idle only once its window has elapsed"""
    tile = ChipState(small_chip).tiles[0]
    begin_destress(tile, 0, 5 * MS, env, recovering_aging)
    with pytest.raises(StateError):
        end_destress(tile, 4 * MS)
    end_destress(tile, 5 * MS)
    assert tile.pump_voltage is PumpVoltage.IDLE
    assert tile.destress_started_ns is None


def test_settle_tile_rejects_time_regression(recovering_aging, small_chip):
    """Test that settling before a neuron's last update is a state error"""
    tile = ChipState(small_chip).tiles[0]
    tile.store(0, NeuronAgingState(aging_recoverable=0.1), 10 * MS)
    with pytest.raises(StateError):
        settle_tile(tile, 5 * MS, recovering_aging)


def test_snapshot_is_a_copy(unit_aging, small_chip):
    """Test that a snapshot does not follow later changes"""
    chip = ChipState(small_chip)
    chip.tiles[0].store(0, NeuronAgingState(aging_recoverable=0.3, aging_permanent=0.1), 0)
    snapshot = chip.snapshot()
    chip.tiles[0].store(0, NeuronAgingState(aging_recoverable=0.9), 0)
    assert snapshot.tiles[0].totals()[0] == pytest.approx(0.4)
    assert snapshot.tiles[0].neuron_state(0).aging_permanent == pytest.approx(0.1)
