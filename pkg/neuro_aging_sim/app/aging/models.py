"""Data models for BTI aging of neuron circuits."""

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from scipy.constants import physical_constants

from ..common.exceptions import ConfigurationError
from ..common.utils import check_keys, coerce_float, filter_dict

BOLTZMANN_EV_PER_K = physical_constants["Boltzmann constant in eV/K"][0]


class RecoveryMode(str, Enum):
    """Voltage condition a neuron recovers under."""

    DESTRESS = "destress"
    IDLE = "idle"


@dataclass(frozen=True)
class AgingParams:
    """Constants of the MTTF, Weibull and stress/recovery models.

    ``e_a`` is in electron-volts and ``k_b`` in eV/K; every other quantity
    is SI. A time constant of ``math.inf`` disables its process.
    """

    a_fit: float = 7.6e4
    gamma: float = 2.0
    e_a: float = 0.15
    k_b: float = BOLTZMANN_EV_PER_K
    beta: float = 2.0
    rho_recoverable: float = 0.7
    tau_recover_destress: float = 0.05
    tau_recover_idle: float = 0.5
    tau_convert: float = 10.0

    def __post_init__(self):
        for name in ("a_fit", "k_b", "beta"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"must be > 0, got {getattr(self, name)!r}", field=f"aging.{name}")
        # gamma = 0 and e_a = 0 are accepted as limiting cases of the models.
        for name in ("gamma", "e_a"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"must be >= 0, got {getattr(self, name)!r}", field=f"aging.{name}")
        if not 0.0 <= self.rho_recoverable <= 1.0:
            raise ConfigurationError(
                f"must lie in [0, 1], got {self.rho_recoverable!r}", field="aging.rho_recoverable"
            )
        for name in ("tau_recover_destress", "tau_recover_idle", "tau_convert"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"must be > 0, got {getattr(self, name)!r}", field=f"aging.{name}")
        both_disabled = math.isinf(self.tau_recover_destress) and math.isinf(self.tau_recover_idle)
        if not (self.tau_recover_destress < self.tau_recover_idle or both_disabled):
            raise ConfigurationError(
                "de-stress recovery must be faster than idle recovery "
                f"({self.tau_recover_destress!r} >= {self.tau_recover_idle!r})",
                field="aging.tau_recover_destress",
            )

    def with_a_fit(self, a_fit: float) -> "AgingParams":
        """Return a copy with a different fit constant."""
        return replace(self, a_fit=a_fit)

    def without_recovery(self) -> "AgingParams":
        """Return a copy with recovery and conversion disabled."""
        return replace(
            self,
            tau_recover_destress=math.inf,
            tau_recover_idle=math.inf,
            tau_convert=math.inf,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AgingParams":
        """Build parameters from an ``[aging]`` config table.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        check_keys("aging", data, cls.__dataclass_fields__)
        return cls(**{k: coerce_float(f"aging.{k}", v) for k, v in data.items()})

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class Environment:
    """Operating conditions: temperature, charge-pump voltages and spike width."""

    temperature: float = 300.0
    v_spike: float = 3.0
    v_idle: float = 1.8
    v_destress: float = 1.2
    delta_t_spike: float = 1e-3

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigurationError(f"must be > 0, got {self.temperature!r}", field="environment.temperature")
        if not 0 < self.v_destress < self.v_idle < self.v_spike:
            raise ConfigurationError(
                "voltages must satisfy 0 < v_destress < v_idle < v_spike "
                f"({self.v_destress!r}, {self.v_idle!r}, {self.v_spike!r})",
                field="environment.v_idle",
            )
        if not self.delta_t_spike > 0:
            raise ConfigurationError(f"must be > 0, got {self.delta_t_spike!r}", field="environment.delta_t_spike")

    def at_temperature(self, temperature: float) -> "Environment":
        """Return a copy at another temperature."""
        return replace(self, temperature=temperature)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Environment":
        check_keys("environment", data, cls.__dataclass_fields__)
        return cls(**{k: coerce_float(f"environment.{k}", v) for k, v in data.items()})

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class NeuronAgingState:
    """Aging accumulators of one neuron circuit.

    ``last_update`` is the simulation time (seconds) up to which the pools
    are exact.
    """

    aging_recoverable: float = 0.0
    aging_permanent: float = 0.0
    last_update: float = 0.0

    @property
    def total(self) -> float:
        return self.aging_recoverable + self.aging_permanent


@dataclass(frozen=True)
class VthCalibration:
    """Normalization of total aging to a threshold-voltage shift.

    ``baseline_aging`` is the aging the unmanaged baseline reaches at the
    end of its reference lifetime, where the shift equals
    ``end_of_life_shift_pct``.
    """

    baseline_aging: Optional[float] = None
    end_of_life_shift_pct: float = 10.0
    reference_rate: float = 50.0
    reference_years: float = 2.0

    def __post_init__(self):
        if self.baseline_aging is not None and not self.baseline_aging > 0:
            raise ConfigurationError(
                f"must be > 0, got {self.baseline_aging!r}", field="calibration.baseline_aging"
            )
        if not self.end_of_life_shift_pct > 0:
            raise ConfigurationError(
                f"must be > 0, got {self.end_of_life_shift_pct!r}", field="calibration.end_of_life_shift_pct"
            )
        if not self.reference_rate > 0:
            raise ConfigurationError(f"must be > 0, got {self.reference_rate!r}", field="calibration.reference_rate")
        if not self.reference_years > 0:
            raise ConfigurationError(
                f"must be > 0, got {self.reference_years!r}", field="calibration.reference_years"
            )

    @property
    def is_set(self) -> bool:
        return self.baseline_aging is not None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VthCalibration":
        check_keys("calibration", data, cls.__dataclass_fields__)
        return cls(**{k: coerce_float(f"calibration.{k}", v) for k, v in filter_dict(data).items()})

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of fitting ``a_fit`` to a reference lifetime."""

    a_fit: float
    baseline_aging: float
    reference_rate: float
    reference_years: float
    iterations: int
    bracket: Tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bracket"] = list(self.bracket)
        return data
