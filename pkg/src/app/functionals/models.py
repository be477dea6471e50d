from typing import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.field import Field3
from app.shared.exceptions import ParameterError

SUPERCRITICAL_P = 7.0 / 3.0


class Params(BaseModel):
    """Frequency omega, coupling e and nonlinearity exponent p."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega: float = Field(default=1.0, gt=0)
    e: float = Field(default=0.0, ge=0)
    p: float = Field(default=3.0, gt=1, lt=5)

    def require_functional_range(self) -> Self:
        if not 2.0 < self.p < 5.0:
            raise ParameterError(f"p must lie in (2, 5) for functional evaluation, got {self.p}")
        return self

    def require_supercritical(self) -> Self:
        if not SUPERCRITICAL_P < self.p < 5.0:
            raise ParameterError(f"p must exceed 7/3 (and stay below 5), got {self.p}")
        return self

    def with_coupling(self, e: float) -> "Params":
        return self.model_copy(update={"e": e})

    @property
    def fibering_power(self) -> float:
        """Exponent 3(p-1)/2 of C(u^lam)."""
        return 1.5 * (self.p - 1.0)


class FunctionalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    A: float
    B: float
    C: float
    D: float
    E1: float
    E2: float
    E3: float
    F_const: float
    F_converged: bool = True
    N: float
    P: float
    Q: float
    J: float
    I: float
    I_script: float


class FiberingPoint(BaseModel):
    lam: float
    J: float
    f: float
    F: float
    G: float
    dF: float
    d2F: float
    dG: float
    d2F_analytic: float
    uniqueness_remainder: float
    overflow: bool = False


class FiberingCurve(BaseModel):
    lambdas: list[float]
    J: list[float]
    f: list[float]
    F: list[float]
    G: list[float]
    dF: list[float]
    d2F: list[float]
    dG: list[float]
    d2F_analytic: list[float]
    uniqueness_remainder: list[float]
    overflow: bool = False

    @model_validator(mode="after")
    def _increasing(self) -> Self:
        lams = self.lambdas
        if any(lam <= 0 for lam in lams):
            raise ValueError("sampled lambda must be positive")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("sampled lambda must be strictly increasing")
        return self

    @classmethod
    def from_points(cls, points: list[FiberingPoint]) -> Self:
        columns = {
            name: [getattr(point, name) for point in points]
            for name in FiberingPoint.model_fields
            if name not in ("lam", "overflow")
        }
        return cls(
            lambdas=[point.lam for point in points],
            overflow=any(point.overflow for point in points),
            **columns,
        )


class NehariProjection(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lam: float
    J_residual: float
    tolerance: float
    bracket: tuple[float, float]
    evaluations: int
    field: Field3 | None = Field(default=None, exclude=True)

    @property
    def within_tolerance(self) -> bool:
        return abs(self.J_residual) <= self.tolerance


class InequalityPoint(BaseModel):
    lam: float
    lhs: float
    descent_term: float
    remainder_term: float
    remainder: float
    passed: bool


class EnergyInequalityReport(BaseModel):
    C1: float
    C2: float
    tau: float
    delta_star: float
    smallness: float
    J: float
    points: list[InequalityPoint]
    mass_bound_C0: float
    mass_bound_holds: bool | None = None
    ground_gap_holds: bool | None = None

    @property
    def passed(self) -> bool:
        return all(point.passed for point in self.points) and self.mass_bound_holds is not False


class ReferenceRootReport(BaseModel):
    lam_star: float
    lam_zero: float
    holds: bool


class BallSurfaceTerms(BaseModel):
    """Omega(lam), Omega'(lam), Omega''(lam) for each sampled lam."""

    lambdas: list[float]
    omega: list[float]
    d_omega: list[float]
    d2_omega: list[float]
