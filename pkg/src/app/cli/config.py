"""Experiment configuration read from a TOML file.

Every table is a pydantic model with unknown keys rejected; the file must
declare ``schema_version = 1``.
"""

import logging
import tomllib
from pathlib import Path
from typing import Literal, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.dynamics import EvolveOptions
from app.field import Grid
from app.functionals import Params
from app.groundstate import MinimizerOptions
from app.profiles import DopingProfile, ZeroProfile
from app.shared.consts import DEFAULT_BOX_HALF_WIDTH, DEFAULT_DELTA_STAR, DEFAULT_N, DEFAULT_RHO0
from app.shared.exceptions import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SUITES = ("poisson", "identities", "scaling", "virial", "condition", "fibering", "balls")
Suite = Literal["poisson", "identities", "scaling", "virial", "condition", "fibering", "balls"]


class _Table(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GridConfig(_Table):
    n: int = DEFAULT_N
    L_box: float = Field(default=DEFAULT_BOX_HALF_WIDTH, gt=0)

    def build(self) -> Grid:
        return Grid(n=self.n, box_half_width=self.L_box)


class GroundStateConfig(MinimizerOptions):
    rho0: float = Field(default=DEFAULT_RHO0, gt=0, description="Smallness threshold")


class EvolveConfig(EvolveOptions):
    lam: float = Field(default=1.0, ge=1.0)
    t_end: float = Field(default=1.0, gt=0)
    input: str | None = Field(default=None, description="Ground state field, default <output_dir>/u0.bin")
    plots: bool = True


class FiberingConfig(_Table):
    lambdas: list[float] | None = None
    lam_min: float = Field(default=0.25, gt=0)
    lam_max: float = Field(default=3.0, gt=0)
    points: int = Field(default=56, ge=2)
    input: str | None = None
    plots: bool = True

    def sweep(self) -> list[float]:
        if self.lambdas is not None:
            return sorted(self.lambdas)
        return np.geomspace(self.lam_min, self.lam_max, self.points).tolist()


class VerifyConfig(_Table):
    suites: list[Suite] = Field(default_factory=lambda: list(SUITES))
    random_fields: int = Field(default=50, ge=1)
    scaling_lambdas: list[float] = Field(default_factory=lambda: [0.5, 2.0])
    gaussian_alphas: list[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    delta_star: float = Field(default=DEFAULT_DELTA_STAR, gt=0, lt=1)


class Config(_Table):
    schema_version: Literal[1]
    seed: int = Field(default=0, ge=0)
    output_dir: str = "out"
    grid: GridConfig = GridConfig()
    params: Params
    profile: DopingProfile | None = None
    groundstate: GroundStateConfig = GroundStateConfig()
    evolve: EvolveConfig | None = None
    fibering: FiberingConfig = FiberingConfig()
    verify: VerifyConfig = VerifyConfig()

    @model_validator(mode="after")
    def _instability_range(self) -> Self:
        if self.evolve is not None and self.evolve.lam > 1.0:
            self.params.require_supercritical()
        return self

    @property
    def rho(self) -> DopingProfile:
        return self.profile if self.profile is not None else ZeroProfile()

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def input_path(self, configured: str | None) -> Path:
        return Path(configured) if configured else self.out / "u0.bin"


def load_config(path: str | Path, out: str | None = None, seed: int | None = None) -> Config:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed TOML in {path}: {e}") from e

    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"Unsupported schema_version {raw.get('schema_version')!r}, expected {SCHEMA_VERSION}")
    if out is not None:
        raw["output_dir"] = out
    if seed is not None:
        raw["seed"] = seed
    config = Config.model_validate(raw)
    if config.profile is None:
        logger.info("No [profile] table: using the zero doping profile")
    return config
