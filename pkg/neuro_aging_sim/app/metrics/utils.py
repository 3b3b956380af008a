"""Report writers for ISI and aging metrics."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

from ..common.models import ReportStamp
from ..common.utils import PathLike, write_csv, write_json
from .models import AgingSummary, IsiDeltaReport

logger = logging.getLogger("neuro_aging_sim")

ISI_HEADER = (
    "neuron",
    "tile",
    "k_n",
    "isi_avg_baseline",
    "isi_avg_managed",
    "delta_avg",
    "delta_avg_per_spike",
    "delta_avg_closed_form",
    "isi_avg_literal",
)

AGING_HEADER = (
    "tile",
    "neuron",
    "aging_recoverable",
    "aging_permanent",
    "aging_total",
    "vth_shift_pct",
    "reliability",
)

NO_DISTORTION_LABEL = "no_distortion"


def ratio_value(ratio: float) -> Any:
    """Report form of an aging-per-distortion ratio."""
    return NO_DISTORTION_LABEL if math.isinf(ratio) else ratio


def write_isi_csv(path: PathLike, report: IsiDeltaReport, stamp: Optional[ReportStamp] = None) -> Path:
    """Write ``isi_per_neuron.csv``."""
    rows = (
        (
            n.neuron,
            n.tile,
            n.k_n,
            n.isi_avg_baseline,
            n.isi_avg_managed,
            n.delta_avg,
            n.delta_avg_per_spike,
            n.delta_avg_closed_form,
            n.isi_avg_literal,
        )
        for n in report.neurons
    )
    return write_csv(path, ISI_HEADER, rows, stamp)


def write_aging_csv(path: PathLike, summary: AgingSummary, stamp: Optional[ReportStamp] = None) -> Path:
    """Write ``aging_summary.csv``."""
    rows = (
        (
            n.tile,
            n.neuron,
            n.aging_recoverable,
            n.aging_permanent,
            n.aging_total,
            n.vth_shift_pct,
            n.reliability,
        )
        for n in summary.neurons
    )
    return write_csv(path, AGING_HEADER, rows, stamp)


def write_run_summary(path: PathLike, summary: Dict[str, Any], stamp: Optional[ReportStamp] = None) -> Path:
    """Write ``run_summary.json`` as a flat object carrying the run identity."""
    document = dict(summary)
    if stamp is not None:
        document.update(stamp.to_dict())
    logger.debug(f"Run summary keys: {sorted(document)}")
    return write_json(path, document)
