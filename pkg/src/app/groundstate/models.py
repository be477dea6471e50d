from pydantic import BaseModel, ConfigDict, Field

from app.field import Field3
from app.functionals import FunctionalReport


class MinimizerOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iters: int = Field(default=400, ge=1)
    grad_tol: float = Field(default=1e-7, gt=0)
    decrease_tol: float = Field(default=1e-12, gt=0)
    armijo: float = Field(default=1e-4, gt=0, lt=1)
    max_halvings: int = Field(default=30, ge=1)
    lam_min: float = Field(default=0.5, gt=0, le=1)
    continuation_steps: int = Field(default=4, ge=1)
    seeds: int = Field(default=0, ge=0, description="Extra perturbed restarts for the cross-check")


class GroundStateResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    u0: Field3 = Field(exclude=True)
    report: FunctionalReport
    residual: float
    sigma: float
    decay_rate: float | None = None
    iterations: int
    converged: bool
    grad_norm: float
    history: list[float] = Field(default_factory=list)
    seed_sigmas: list[float] = Field(default_factory=list)
    seed_modulus_gaps: list[float] = Field(default_factory=list, description="sup | |u0_i| - |u0| | per restart")
    gauge_gap: float | None = Field(default=None, description="sup | |u0_theta| - |u0_1| | between restarts from e^{i theta} u0 and u0")

    @property
    def seed_spread(self) -> float:
        values = [self.sigma, *self.seed_sigmas]
        return max(values) - min(values)

    @property
    def seed_modulus_spread(self) -> float:
        return max(self.seed_modulus_gaps, default=0.0)


class DilationCheck(BaseModel):
    lam: float
    I_gap: float
    Q: float
    J: float
    d2F: float
    d2F_fd: float
    passed: bool


class DilationVerdict(BaseModel):
    I0: float
    Q0: float
    checks: list[DilationCheck]
    first_violation: float | None = None
    overflow: bool = False

    @property
    def passed(self) -> bool:
        return self.first_violation is None
