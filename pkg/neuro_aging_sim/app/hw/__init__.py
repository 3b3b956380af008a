"""Tiled chip model: tiles, charge pumps, spike counters and AER events."""

from .api import aer_encode, begin_destress, end_destress, fire_spike, reset_counters, settle_tile, snoop_count
from .models import AerEvent, ChipConfig, ChipSnapshot, ChipState, PumpVoltage, TileSnapshot, TileState

__all__ = [
    "aer_encode",
    "begin_destress",
    "end_destress",
    "fire_spike",
    "reset_counters",
    "settle_tile",
    "snoop_count",
    "AerEvent",
    "ChipConfig",
    "ChipSnapshot",
    "ChipState",
    "PumpVoltage",
    "TileSnapshot",
    "TileState",
]
