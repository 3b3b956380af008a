"""Experiment configuration for the command-line runner."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..aging.models import AgingParams, Environment, VthCalibration
from ..common.exceptions import ConfigurationError
from ..common.models import ReportStamp
from ..common.utils import PathLike, check_keys, coerce_float, coerce_int, config_hash
from ..hw.models import ChipConfig
from ..policy.models import PolicyConfig, PolicyKind
from ..sim.models import RunConfig
from ..workload.models import PoissonWorkloadSpec
from .utils import read_document

logger = logging.getLogger("neuro_aging_sim")

TOP_LEVEL_KEYS = (
    "seed",
    "output_dir",
    "workers",
    "sample_trajectory",
    "trajectory_stride",
    "chip",
    "environment",
    "aging",
    "calibration",
    "policy",
    "workload",
    "sweep",
)

# Report-stamp keys, accepted and ignored on load.
STAMP_KEYS = ("config_hash",)


@dataclass(frozen=True)
class WorkloadSource:
    """Where the input spikes come from: a trace file or a Poisson spec, never both."""

    trace: Optional[Path] = None
    poisson: Optional[PoissonWorkloadSpec] = None

    def __post_init__(self):
        if (self.trace is None) == (self.poisson is None):
            raise ConfigurationError("exactly one of 'trace' and 'poisson' must be given", field="workload")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "WorkloadSource":
        """Build a workload source from a ``[workload]`` table.

        Relative trace paths resolve against ``base_dir``, the directory of
        the config file.
        """
        check_keys("workload", data, ("trace", "poisson"))
        trace = data.get("trace")
        if trace is not None:
            if not isinstance(trace, str):
                raise ConfigurationError(f"expected a path, got {trace!r}", field="workload.trace")
            trace = Path(trace)
            if base_dir is not None and not trace.is_absolute():
                trace = base_dir / trace
        poisson = data.get("poisson")
        if poisson is not None:
            poisson = PoissonWorkloadSpec.from_dict(poisson)
        return cls(trace=trace, poisson=poisson)

    def to_dict(self) -> Dict[str, Any]:
        if self.trace is not None:
            return {"trace": str(self.trace.resolve())}
        return {"poisson": self.poisson.to_dict()}


@dataclass(frozen=True)
class SweepAxes:
    """Axes of a parameter sweep; an empty axis keeps the base value."""

    policies: Tuple[PolicyKind, ...] = ()
    temperatures: Tuple[float, ...] = ()
    num_tiles: Tuple[int, ...] = ()
    seeds: Tuple[int, ...] = ()

    @property
    def size(self) -> int:
        size = 1
        for axis in (self.policies, self.temperatures, self.num_tiles, self.seeds):
            size *= max(len(axis), 1)
        return size

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepAxes":
        check_keys("sweep", data, cls.__dataclass_fields__)
        for key, value in data.items():
            if not isinstance(value, list):
                raise ConfigurationError(f"expected a list, got {value!r}", field=f"sweep.{key}")
        try:
            policies = tuple(PolicyKind(p) for p in data.get("policies", ()))
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="sweep.policies") from exc
        return cls(
            policies=policies,
            temperatures=tuple(coerce_float("sweep.temperatures", t) for t in data.get("temperatures", ())),
            num_tiles=tuple(coerce_int("sweep.num_tiles", n) for n in data.get("num_tiles", ())),
            seeds=tuple(coerce_int("sweep.seeds", s) for s in data.get("seeds", ())),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "policies": [p.value for p in self.policies],
            "temperatures": list(self.temperatures),
            "num_tiles": list(self.num_tiles),
            "seeds": list(self.seeds),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete experiment: run parameters, workload, outputs and optional sweep."""

    run: RunConfig = field(default_factory=RunConfig)
    workload: Optional[WorkloadSource] = None
    output_dir: Path = Path("results")
    workers: int = 0
    sweep: Optional[SweepAxes] = None

    def __post_init__(self):
        if self.workers < 0:
            raise ConfigurationError(f"must be >= 0, got {self.workers!r}", field="workers")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Return a copy whose run seed, and Poisson seed if any, is ``seed``."""
        workload = self.workload
        if workload is not None and workload.poisson is not None:
            workload = WorkloadSource(poisson=replace(workload.poisson, seed=seed))
        return replace(self, run=self.run.with_seed(seed), workload=workload)

    def with_output_dir(self, output_dir: PathLike) -> "ExperimentConfig":
        return replace(self, output_dir=Path(output_dir))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "ExperimentConfig":
        """Build an experiment from a parsed config document.

        Raises:
            ConfigurationError: On unknown keys, invalid values or a missing workload
        """
        check_keys("", data, TOP_LEVEL_KEYS + STAMP_KEYS)
        sample = data.get("sample_trajectory", False)
        if not isinstance(sample, bool):
            raise ConfigurationError(f"expected true or false, got {sample!r}", field="sample_trajectory")
        run = RunConfig(
            chip=ChipConfig.from_dict(data.get("chip", {})),
            env=Environment.from_dict(data.get("environment", {})),
            aging=AgingParams.from_dict(data.get("aging", {})),
            policy=PolicyConfig.from_dict(data.get("policy", {})),
            calibration=VthCalibration.from_dict(data.get("calibration", {})),
            seed=coerce_int("seed", data.get("seed", 0)),
            sample_trajectory=sample,
            trajectory_stride=coerce_int("trajectory_stride", data.get("trajectory_stride", 1)),
        )
        workload = None
        if "workload" in data:
            workload = WorkloadSource.from_dict(data["workload"], base_dir)
        output_dir = data.get("output_dir", "results")
        if not isinstance(output_dir, str):
            raise ConfigurationError(f"expected a path, got {output_dir!r}", field="output_dir")
        output_dir = Path(output_dir)
        if base_dir is not None and not output_dir.is_absolute():
            output_dir = base_dir / output_dir
        sweep = SweepAxes.from_dict(data["sweep"]) if "sweep" in data else None
        return cls(
            run=run,
            workload=workload,
            output_dir=output_dir,
            workers=coerce_int("workers", data.get("workers", 0)),
            sweep=sweep,
        )

    def echo(self) -> Dict[str, Any]:
        """Everything a run's outcome depends on: the run parameters and the workload source."""
        data = self.run.to_dict()
        if self.workload is not None:
            data["workload"] = self.workload.to_dict()
        return data

    @property
    def config_hash(self) -> str:
        return config_hash(self.echo())

    @property
    def stamp(self) -> ReportStamp:
        """Identity written into every report of this experiment."""
        return ReportStamp(config_hash=self.config_hash, seed=self.run.seed)

    def to_dict(self) -> Dict[str, Any]:
        """Config echo in the same schema :meth:`from_dict` reads."""
        data = self.echo()
        data["output_dir"] = str(self.output_dir.resolve())
        data["workers"] = self.workers
        if self.sweep is not None:
            data["sweep"] = self.sweep.to_dict()
        return data


def load_config(path: PathLike) -> ExperimentConfig:
    """Read an experiment config file.

    TOML and JSON are accepted, chosen by suffix. Relative paths inside the
    file resolve against the file's directory.

    Args:
        path: Config file

    Returns:
        Parsed experiment configuration

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: If the file does not parse or violates the schema
    """
    path = Path(path)
    data = read_document(path)
    logger.debug(f"Loaded config {path}")
    return ExperimentConfig.from_dict(data, base_dir=path.parent)
