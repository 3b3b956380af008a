"""
Aging module for the neuromorphic aging simulator.

This module provides the MTTF and Weibull reliability models and the
stress/recovery dynamics of neuron circuits.
"""

from .api import (
    aging_from_intervals,
    aging_from_spikes,
    apply_recovery,
    apply_stress,
    mttf_bti,
    mttf_tddb,
    reliability,
    vth_shift,
    weibull_scale,
)
from .models import (
    AgingParams,
    CalibrationResult,
    Environment,
    NeuronAgingState,
    RecoveryMode,
    VthCalibration,
)
from .utils import SECONDS_PER_YEAR, calibrate_a_fit, calibrated_vth, mttf_by_quadrature, reference_aging

__all__ = [
    "AgingParams", "Environment", "NeuronAgingState", "RecoveryMode", "VthCalibration", "CalibrationResult",
    "mttf_tddb", "weibull_scale", "mttf_bti", "reliability",
    "aging_from_spikes", "aging_from_intervals", "apply_stress", "apply_recovery", "vth_shift",
    "mttf_by_quadrature", "reference_aging", "calibrate_a_fit", "calibrated_vth", "SECONDS_PER_YEAR",
]
