"""Data models for ISI and aging metrics."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

NeuronKey = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class NeuronIsi:
    """Spike times and instantaneous ISIs of one neuron.

    ``times_ns`` holds the ``k_n`` spike times; ``isi`` the ``k_n - 1``
    consecutive differences in seconds.
    """

    tile: int
    neuron: int
    times_ns: np.ndarray
    isi: np.ndarray

    @property
    def k_n(self) -> int:
        return int(self.times_ns.size)

    @property
    def isi_avg(self) -> Optional[float]:
        """Mean instantaneous ISI, or None below two spikes."""
        return float(self.isi.mean()) if self.isi.size else None


@dataclass(frozen=True, eq=False)
class IsiStats:
    """ISI statistics of every firing neuron of a spike log."""

    neurons: Dict[NeuronKey, NeuronIsi] = field(default_factory=dict)

    @property
    def k_total(self) -> int:
        """Total spike count over all neurons."""
        return sum(n.k_n for n in self.neurons.values())

    def keys(self):
        return self.neurons.keys()

    def __getitem__(self, key: NeuronKey) -> NeuronIsi:
        return self.neurons[key]

    def __len__(self) -> int:
        return len(self.neurons)


@dataclass(frozen=True, eq=False)
class NeuronIsiDelta:
    """ISI change of one neuron between the unmanaged and managed runs.

    Two readings of the ISI change are carried side by side:

    - ``delta_avg`` is the difference of the average ISIs (each the mean of
      ``k_n - 1`` instantaneous ISIs).
    - ``delta_avg_per_spike`` is the added inter-spike latency (the sum of the
      lengthened instantaneous ISI changes) spread over ``k_n`` spikes, the
      form in which a window of ``tdsc`` delaying one spike costs
      ``tdsc / k_n``.

    ``delta_avg_closed_form`` is ``windows * tdsc / k_n`` for the windows that
    delayed the neuron. ``isi_avg_literal`` reads the change as a new ISI
    (old ISI plus ``tdsc`` for each affected gap): the baseline average plus
    the closed form.
    """

    tile: int
    neuron: int
    k_n: int
    isi_avg_baseline: Optional[float]
    isi_avg_managed: Optional[float]
    delta_inst: np.ndarray
    delta_avg: float
    delta_avg_per_spike: float
    delay_windows: int
    delta_avg_closed_form: float
    isi_avg_literal: Optional[float]


@dataclass(frozen=True, eq=False)
class IsiDeltaReport:
    """Per-neuron ISI changes plus their chip-wide means."""

    neurons: Tuple[NeuronIsiDelta, ...] = ()

    @property
    def mean_delta_avg(self) -> float:
        return float(np.mean([n.delta_avg for n in self.neurons])) if self.neurons else 0.0

    @property
    def mean_delta_per_spike(self) -> float:
        """Mean added latency per spike, the ISI distortion figure used in summaries."""
        return float(np.mean([n.delta_avg_per_spike for n in self.neurons])) if self.neurons else 0.0

    @property
    def delayed_neurons(self) -> int:
        return sum(1 for n in self.neurons if n.delta_avg_per_spike > 0)


@dataclass(frozen=True)
class NeuronAging:
    """End-of-run aging of one neuron."""

    tile: int
    neuron: int
    aging_recoverable: float
    aging_permanent: float
    aging_total: float
    vth_shift_pct: Optional[float]
    reliability: float


@dataclass(frozen=True)
class AgingSummary:
    """Aging figures of a chip snapshot.

    ``vth_shift_pct`` values are None when no V_th calibration is set.
    """

    neurons: Tuple[NeuronAging, ...]
    tile_max: Tuple[float, ...]
    chip_max: float
    chip_vth_shift_pct: Optional[float]
