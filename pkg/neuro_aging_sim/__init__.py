"""
Neuro Aging Sim - BTI aging of tiled neuromorphic chips under run-time reliability policies.

This package provides a deterministic discrete-event simulator of spike
traffic on a tiled chip, the aging and recovery model of its neuron
circuits, and de-stress policies that trade aging against spike latency.
"""

__version__ = "0.1.0"
