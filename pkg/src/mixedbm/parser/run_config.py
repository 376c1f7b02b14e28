# mixedbm.parser.run_config

import copy
import logging
import sys
from pathlib import Path
from typing import Any, Literal, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from mixedbm.core import geometry
from mixedbm.core.errors import ConfigError
from mixedbm.core.models import Formulation, Rectangle, TransmissionConfig
from mixedbm.core.nep_ssm import SsmParams

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ShapeSection(_Section):
    kind: Literal["circle", "star"] = "circle"
    radius: float = Field(default=1.0, gt=0)
    amplitude: float = Field(default=0.3, ge=0, lt=1)
    lobes: int = Field(default=5, ge=3)

    def to_curve(self) -> Union[geometry.Circle, geometry.Star]:
        match self.kind:
            case "circle":
                return geometry.circle(self.radius)
            case "star":
                return geometry.star(self.radius, self.amplitude, self.lobes)
        raise ConfigError(f"unknown shape {self.kind}")


class MaterialsSection(_Section):
    eps0: float = Field(default=1.0, gt=0)
    eps1: float = Field(default=4.0, gt=0)
    mu0: float = Field(default=1.0, gt=0)
    mu1: float = Field(default=1.0, gt=0)


class DiscretizationSection(_Section):
    n: int = Field(default=400, ge=geometry.MIN_NODES)

    @field_validator("n")
    @classmethod
    def check_even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n must be even, got {value}")
        return value


class SolverSection(_Section):
    formulation: Literal["bm", "mixed", "both"] = "both"

    def formulations(self) -> list[Formulation]:
        if self.formulation == "both":
            return [Formulation.BM, Formulation.MIXED]
        return [Formulation(self.formulation)]


class RegionSection(_Section):
    re_min: float = 0.5
    re_max: float = 3.0
    im_min: float = -1.0
    im_max: float = 0.0

    def to_rectangle(self) -> Rectangle:
        return Rectangle(**self.model_dump())


class TilesSection(_Section):
    nx: int = Field(default=8, ge=1)
    ny: int = Field(default=4, ge=1)


class SsmSection(_Section):
    moments: int = Field(default=4, ge=1)
    block_size: int = Field(default=8, ge=1)
    nodes_per_side: int = Field(default=28, ge=1)
    svd_rel_tol: float = Field(default=1e-12, gt=0, lt=1)
    residual_tol: float = Field(default=1e-8, gt=0)
    merge_tol: float = Field(default=1e-9, ge=0)
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    def params(self) -> SsmParams:
        return SsmParams(
            moments=self.moments,
            block_size=self.block_size,
            svd_rel_tol=self.svd_rel_tol,
            residual_tol=self.residual_tol,
            merge_tol=self.merge_tol,
            rng_seed=self.seed,
            workers=self.workers,
        )


class OracleSection(_Section):
    n_max: int = Field(default=30, ge=0)
    grid_nx: int = Field(default=32, ge=1)
    grid_ny: int = Field(default=16, ge=1)


class ScatterSection(_Section):
    omega: float = Field(default=2.0, gt=0)
    angle: float = 0.0
    x_min: float = -3.0
    x_max: float = 3.0
    y_min: float = -3.0
    y_max: float = 3.0
    nx: int = Field(default=41, ge=1)
    ny: int = Field(default=41, ge=1)


class OutputSection(_Section):
    directory: Path = Path("out")
    timestamp: bool = True
    gnuplot: bool = False


class RunConfig(_Section):
    shape: ShapeSection = ShapeSection()
    materials: MaterialsSection = MaterialsSection()
    discretization: DiscretizationSection = DiscretizationSection()
    solver: SolverSection = SolverSection()
    region: RegionSection = RegionSection()
    tiles: TilesSection = TilesSection()
    ssm: SsmSection = SsmSection()
    oracle: OracleSection = OracleSection()
    scatter: ScatterSection = ScatterSection()
    output: OutputSection = OutputSection()

    def transmission(self) -> TransmissionConfig:
        return TransmissionConfig(
            **self.materials.model_dump(), curve=self.shape.to_curve()
        )


def merge_overrides(
    data: dict[str, Any], overrides: dict[str, dict[str, Any]]
) -> dict[str, Any]:
    """Overlay ``{section: {key: value}}`` on a raw config mapping"""
    merged = copy.deepcopy(data)
    for section, values in overrides.items():
        target = merged.setdefault(section, {})
        if not isinstance(target, dict):
            raise ConfigError(f"[{section}] must be a table")
        target.update(values)
    return merged


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def build_config(
    data: dict[str, Any], overrides: Optional[dict[str, dict[str, Any]]] = None
) -> RunConfig:
    raw = merge_overrides(data, overrides or {})
    try:
        config = RunConfig.model_validate(raw)
        # cross-section checks: curve and region preconditions
        config.transmission()
        config.region.to_rectangle()
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_describe(exc)}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return config


def load_config(
    path: Optional[Path], overrides: Optional[dict[str, dict[str, Any]]] = None
) -> RunConfig:
    """Read a TOML run configuration; OSError from reading is left to the caller"""
    data: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as handle:
            try:
                data = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        logger.info("loaded configuration from %s", path)
    return build_config(data, overrides)
