"""
Shared fixtures for the simulator tests.
"""

import math

import pytest

from neuro_aging_sim.app.aging import AgingParams, Environment
from neuro_aging_sim.app.common.models import seconds_to_ns
from neuro_aging_sim.app.hw import ChipConfig
from neuro_aging_sim.app.workload import SpikeEvent, SpikeTrace, TraceHeader


@pytest.fixture
def env():
    """Default operating environment: 300 K, 3.0/1.8/1.2 V, 1 ms spikes."""
    return Environment()


@pytest.fixture
def unit_aging():
    """One spike adds 0.01 aging units and nothing recovers or converts."""
    return AgingParams(a_fit=0.1, gamma=0.0, e_a=0.0, beta=1.0).without_recovery()


@pytest.fixture
def recovering_aging():
    """One spike adds 0.01 aging units; recovery and conversion are active."""
    return AgingParams(
        a_fit=0.1,
        gamma=0.0,
        e_a=0.0,
        beta=1.0,
        rho_recoverable=0.7,
        tau_recover_destress=0.05,
        tau_recover_idle=0.5,
        tau_convert=10.0,
    )


@pytest.fixture
def recoverable_only_aging():
    """One spike adds 0.01 aging units, all of it recoverable; nothing turns permanent."""
    return AgingParams(
        a_fit=0.1,
        gamma=0.0,
        e_a=0.0,
        beta=1.0,
        rho_recoverable=1.0,
        tau_recover_destress=0.05,
        tau_recover_idle=0.5,
        tau_convert=math.inf,
    )


@pytest.fixture
def small_chip():
    """One tile with two neurons."""
    return ChipConfig(num_tiles=1, neurons_per_tile=2, input_neurons_per_tile=2)


@pytest.fixture
def make_trace():
    """Build a trace from (seconds, tile, neuron) triples."""

    def build(spikes, duration=None, trace_id="test"):
        events = sorted(SpikeEvent(seconds_to_ns(t), tile, neuron) for t, tile, neuron in spikes)
        duration_ns = seconds_to_ns(duration) if duration is not None else None
        return SpikeTrace(header=TraceHeader(trace_id=trace_id, duration_ns=duration_ns), events=tuple(events))

    return build
