"""ISI distortion and aging metrics, plus their report files."""

from .api import (
    NO_DISTORTION,
    aging_per_isi_distortion,
    aging_summary,
    compute_isi_stats,
    isi_delta,
    isi_instantaneous,
)
from .models import AgingSummary, IsiDeltaReport, IsiStats, NeuronAging, NeuronIsi, NeuronIsiDelta
from .utils import (
    AGING_HEADER,
    ISI_HEADER,
    NO_DISTORTION_LABEL,
    ratio_value,
    write_aging_csv,
    write_isi_csv,
    write_run_summary,
)

__all__ = [
    "NO_DISTORTION",
    "aging_per_isi_distortion",
    "aging_summary",
    "compute_isi_stats",
    "isi_delta",
    "isi_instantaneous",
    "AgingSummary",
    "IsiDeltaReport",
    "IsiStats",
    "NeuronAging",
    "NeuronIsi",
    "NeuronIsiDelta",
    "AGING_HEADER",
    "ISI_HEADER",
    "NO_DISTORTION_LABEL",
    "ratio_value",
    "write_aging_csv",
    "write_isi_csv",
    "write_run_summary",
]
