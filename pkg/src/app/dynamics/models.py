import csv
from pathlib import Path
from typing import Annotated, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.field import Field3
from app.shared.consts import COL_META
from app.shared.enums import StopReason


class EvolveOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(default=1e-3, gt=0)
    dt_min: float = Field(default=1e-7, gt=0)
    drift_tol: float = Field(default=1e-8, gt=0, description="Per-step relative energy drift")
    sample_interval: float = Field(default=0.05, gt=0)
    grad_growth: float = Field(default=1e3, gt=1)
    tail_limit: float = Field(default=1e-4, gt=0, description="Spectral tail fraction treated as lost resolution")
    boundary_mass_limit: float = Field(default=1e-6, gt=0)
    membership_band: float = Field(default=1e-6, ge=0)
    dealias: bool = False
    linear: bool = Field(default=False, description="Free Schrodinger test mode: interactions off")


class EvolutionState(BaseModel):
    """Integrator state; ``s0`` is S0(psi) carried over between steps."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    psi: Field3
    t: float = 0.0
    dt: float = Field(gt=0)
    s1_cache: Field3
    s0: Field3 | None = None


class TraceRecord(BaseModel):
    t: Annotated[float, {COL_META: "t"}]
    mass: Annotated[float, {COL_META: "mass"}]
    energy: Annotated[float, {COL_META: "energy"}]
    V: Annotated[float | None, {COL_META: "V"}] = None
    Vp: Annotated[float, {COL_META: "Vp"}]
    Q: Annotated[float, {COL_META: "Q"}]
    J: Annotated[float, {COL_META: "J"}]
    I: Annotated[float, {COL_META: "I"}]
    gradnorm: Annotated[float, {COL_META: "gradnorm"}]
    tail: Annotated[float, {COL_META: "tail"}]
    in_B: Annotated[bool | None, {COL_META: "inB"}] = None
    dt: float = 0.0

    @classmethod
    def mapping_fields(cls) -> dict[str, str]:
        mapping_fields = {}
        for field_name, field_info in cls.model_fields.items():
            for metadata in field_info.metadata:
                if isinstance(metadata, dict) and COL_META in metadata:
                    mapping_fields[field_name] = metadata[COL_META]
                    break
        return mapping_fields

    def to_row(self) -> dict[str, str]:
        row = {}
        for field_name, column in self.mapping_fields().items():
            value = getattr(self, field_name)
            if value is None:
                row[column] = ""
            elif isinstance(value, bool):
                row[column] = str(int(value))
            else:
                row[column] = repr(float(value))
        return row


class EvolutionTrace(BaseModel):
    records: list[TraceRecord] = Field(default_factory=list)
    stop_reason: StopReason = StopReason.COMPLETED
    stop_time: float = 0.0
    message: str = ""

    def append(self, record: TraceRecord) -> None:
        if self.records and record.t <= self.records[-1].t:
            raise ValueError(f"trace time {record.t} does not increase")
        self.records.append(record)

    @property
    def blew_up(self) -> bool:
        return self.stop_reason is not StopReason.COMPLETED

    def column(self, name: str) -> np.ndarray:
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records],
            dtype=float,
        )

    def to_csv(self, path: Path) -> Path:
        columns = list(TraceRecord.mapping_fields().values())
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for record in self.records:
                writer.writerow(record.to_row())
        return path

    @classmethod
    def from_csv(cls, path: Path) -> Self:
        mapping = {v: k for k, v in TraceRecord.mapping_fields().items()}
        records = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                data = {mapping[c]: (v if v != "" else None) for c, v in row.items()}
                if data.get("in_B") is not None:
                    data["in_B"] = data["in_B"] == "1"
                records.append(TraceRecord.model_validate(data))
        return cls(records=records, stop_time=records[-1].t if records else 0.0)


class VirialReport(BaseModel):
    samples: int
    window_end: float
    max_abs_residual: float
    max_rel_residual: float
    max_rel_velocity_residual: float


class InstabilityReport(BaseModel):
    lam: float
    I_ground: float
    I_initial: float
    Q_initial: float
    J_initial: float
    initial_in_B: bool
    bound: float = Field(description="16 (I(u0^lam) - I(u0))")
    bound_holds: bool
    membership_persists: bool
    gradient_monotone: bool
    stop_reason: StopReason
    stop_time: float
    blowup_triggered: bool
