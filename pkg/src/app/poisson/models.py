from pydantic import BaseModel, ConfigDict

from app.field import Field3


class DopingPotentials(BaseModel):
    """S1 = -(1/(8pi|x|)) * rho, S2 = (1/(8pi|x|)) * x.grad(rho), S3 = (1/(8pi|x|)) * x.D^2 rho x.

    ``s3`` is None when the profile contains balls; their E3 is a surface integral.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s1: Field3
    s2: Field3
    s3: Field3 | None = None


class PotentialSet(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s0: Field3
    s1: Field3
    s2: Field3
    s3: Field3 | None = None


class S1DecayReport(BaseModel):
    shell_edges: list[float]
    shell_max: list[float]
    inner_max: float
    outer_max: float
    outer_below_inner: bool
    doubled_outer_max: float | None = None
    doubling_ratio: float | None = None
