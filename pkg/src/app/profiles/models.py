"""Doping profiles rho >= 0 as immutable pydantic value objects.

Smooth variants are radial about a centre and supply rho, x.grad(rho) and
x.(D^2 rho x) in closed form. Ball variants carry characteristic functions
and route their derivative terms through sphere surface integrals.
"""

from abc import abstractmethod
from itertools import combinations
from typing import Annotated, Literal, Self, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from app.shared.exceptions import ProfileError

Point = tuple[float, float, float]
ORIGIN: Point = (0.0, 0.0, 0.0)
DISJOINT_SLACK = 1e-12


class _Profile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def is_smooth(self) -> bool:
        return True

    @property
    def is_zero(self) -> bool:
        return False

    def smooth_parts(self) -> list["RadialProfile"]:
        return []

    def ball_list(self) -> list["Ball"]:
        return []

    @abstractmethod
    def eval(self, X, Y, Z) -> np.ndarray: ...

    def eval_xgrad(self, X, Y, Z) -> np.ndarray:
        raise ProfileError(f"{type(self).__name__} has no pointwise x.grad(rho)")

    def eval_xhess(self, X, Y, Z) -> np.ndarray:
        raise ProfileError(f"{type(self).__name__} has no pointwise x.(D^2 rho x)")


class ZeroProfile(_Profile):
    kind: Literal["zero"] = "zero"

    @property
    def is_zero(self) -> bool:
        return True

    def eval(self, X, Y, Z):
        return np.zeros(np.broadcast(X, Y, Z).shape)

    eval_xgrad = eval
    eval_xhess = eval


class RadialProfile(_Profile):
    """rho(x) = phi(|x - center|)."""

    center: Point = ORIGIN

    @abstractmethod
    def phi(self, d: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def dphi(self, d: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def d2phi(self, d: np.ndarray) -> np.ndarray: ...

    @property
    def is_centered(self) -> bool:
        return self.center == ORIGIN

    def smooth_parts(self) -> list["RadialProfile"]:
        return [self]

    def _geometry(self, X, Y, Z):
        cx, cy, cz = self.center
        dx, dy, dz = X - cx, Y - cy, Z - cz
        d = np.sqrt(dx**2 + dy**2 + dz**2)
        return dx, dy, dz, d

    def eval(self, X, Y, Z):
        return self.phi(self._geometry(X, Y, Z)[3])

    def eval_xgrad(self, X, Y, Z):
        dx, dy, dz, d = self._geometry(X, Y, Z)
        safe = d > 1e-12
        d_safe = np.where(safe, d, 1.0)
        x_dot_n = np.where(safe, (X * dx + Y * dy + Z * dz) / d_safe, 0.0)
        return self.dphi(d) * x_dot_n

    def eval_xhess(self, X, Y, Z):
        dx, dy, dz, d = self._geometry(X, Y, Z)
        safe = d > 1e-12
        d_safe = np.where(safe, d, 1.0)
        x_dot_n = np.where(safe, (X * dx + Y * dy + Z * dz) / d_safe, 0.0)
        # phi'(d)/d -> phi''(0) at the centre
        ratio = np.where(safe, self.dphi(d_safe) / d_safe, self.d2phi(np.zeros_like(d)))
        x_sq = X**2 + Y**2 + Z**2
        return self.d2phi(d) * x_dot_n**2 + ratio * (x_sq - x_dot_n**2)

    # radial functions of r = |x| for centred profiles
    def radial(self, r: np.ndarray) -> np.ndarray:
        return self.phi(np.asarray(r, dtype=float))

    def radial_xgrad(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r * self.dphi(r)

    def radial_xhess(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r**2 * self.d2phi(r)


class GaussianProfile(RadialProfile):
    """epsilon * exp(-alpha |x|^2)"""

    kind: Literal["gaussian"] = "gaussian"
    epsilon: float = Field(gt=0)
    alpha: float = Field(gt=0)

    def phi(self, d):
        return self.epsilon * np.exp(-self.alpha * d**2)

    def dphi(self, d):
        return -2.0 * self.alpha * d * self.phi(d)

    def d2phi(self, d):
        return (4.0 * self.alpha**2 * d**2 - 2.0 * self.alpha) * self.phi(d)


class PowerLawProfile(RadialProfile):
    """epsilon / (1 + |x|^alpha), alpha > 5/2 so that rho is in L^{6/5}."""

    kind: Literal["power_law"] = "power_law"
    epsilon: float = Field(gt=0)
    alpha: float = Field(gt=2.5)

    def phi(self, d):
        return self.epsilon / (1.0 + d**self.alpha)

    def dphi(self, d):
        a = self.alpha
        return -self.epsilon * a * d ** (a - 1.0) / (1.0 + d**a) ** 2

    def d2phi(self, d):
        a = self.alpha
        s = d**a
        return (
            -self.epsilon * a * d ** (a - 2.0) * ((a - 1.0) - (a + 1.0) * s) / (1.0 + s) ** 3
        )


class MollifiedBallProfile(RadialProfile):
    """(sigma/2) * (1 - tanh((|x - c| - R) / width)); tends to sigma * chi_B as width -> 0."""

    kind: Literal["mollified_ball"] = "mollified_ball"
    sigma: float = Field(gt=0)
    radius: float = Field(gt=0)
    width: float = Field(gt=0)

    def _s(self, d):
        return (d - self.radius) / self.width

    def phi(self, d):
        return 0.5 * self.sigma * (1.0 - np.tanh(self._s(d)))

    def dphi(self, d):
        return -0.5 * self.sigma / self.width / np.cosh(self._s(d)) ** 2

    def d2phi(self, d):
        s = self._s(d)
        return self.sigma / self.width**2 * np.tanh(s) / np.cosh(s) ** 2


class Ball(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float = Field(gt=0)
    center: Point = ORIGIN
    radius: float = Field(gt=0)

    def distance(self, X, Y, Z) -> np.ndarray:
        cx, cy, cz = self.center
        return np.sqrt((X - cx) ** 2 + (Y - cy) ** 2 + (Z - cz) ** 2)

    @property
    def charge(self) -> float:
        return self.sigma * 4.0 / 3.0 * np.pi * self.radius**3


class BallsProfile(_Profile):
    """sum_i sigma_i * chi_{B_i}; not weakly differentiable across the spheres."""

    kind: Literal["balls"] = "balls"
    balls: tuple[Ball, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _disjoint(self) -> Self:
        for a, b in combinations(self.balls, 2):
            gap = np.linalg.norm(np.subtract(a.center, b.center)) - a.radius - b.radius
            if gap < -DISJOINT_SLACK:
                raise ValueError(f"balls overlap: {a} and {b}")
        return self

    @property
    def is_smooth(self) -> bool:
        return False

    def ball_list(self) -> list[Ball]:
        return list(self.balls)

    def eval(self, X, Y, Z):
        out = np.zeros(np.broadcast(X, Y, Z).shape)
        for ball in self.balls:
            out = out + ball.sigma * (ball.distance(X, Y, Z) < ball.radius)
        return out


_Part = Annotated[
    Union[
        ZeroProfile,
        GaussianProfile,
        PowerLawProfile,
        MollifiedBallProfile,
        BallsProfile,
    ],
    Field(discriminator="kind"),
]


class SumProfile(_Profile):
    kind: Literal["sum"] = "sum"
    parts: tuple[_Part, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _disjoint(self) -> Self:
        balls = self.ball_list()
        if len(balls) > 1:
            BallsProfile(balls=tuple(balls))
        return self

    @property
    def is_smooth(self) -> bool:
        return all(part.is_smooth for part in self.parts)

    @property
    def is_zero(self) -> bool:
        return all(part.is_zero for part in self.parts)

    def smooth_parts(self) -> list[RadialProfile]:
        return [s for part in self.parts for s in part.smooth_parts()]

    def ball_list(self) -> list[Ball]:
        return [b for part in self.parts for b in part.ball_list()]

    def eval(self, X, Y, Z):
        return sum(part.eval(X, Y, Z) for part in self.parts)

    def eval_xgrad(self, X, Y, Z):
        if not self.is_smooth:
            raise ProfileError("sum contains balls: no pointwise x.grad(rho)")
        return sum(part.eval_xgrad(X, Y, Z) for part in self.parts)

    def eval_xhess(self, X, Y, Z):
        if not self.is_smooth:
            raise ProfileError("sum contains balls: no pointwise x.(D^2 rho x)")
        return sum(part.eval_xhess(X, Y, Z) for part in self.parts)


DopingProfile = Annotated[
    Union[
        ZeroProfile,
        GaussianProfile,
        PowerLawProfile,
        MollifiedBallProfile,
        BallsProfile,
        SumProfile,
    ],
    Field(discriminator="kind"),
]

profile_adapter: TypeAdapter[DopingProfile] = TypeAdapter(DopingProfile)


def smooth_component(rho: _Profile) -> "SmoothComponent":
    return SmoothComponent(parts=tuple(rho.smooth_parts()))


class SmoothComponent:
    """Sum of the smooth radial parts of a profile, evaluated pointwise."""

    def __init__(self, parts: tuple[RadialProfile, ...]):
        self.parts = parts

    def __bool__(self) -> bool:
        return bool(self.parts)

    @property
    def is_centered(self) -> bool:
        return all(part.is_centered for part in self.parts)

    def eval(self, X, Y, Z):
        return sum(p.eval(X, Y, Z) for p in self.parts) if self.parts else 0.0 * X

    def eval_xgrad(self, X, Y, Z):
        return sum(p.eval_xgrad(X, Y, Z) for p in self.parts) if self.parts else 0.0 * X

    def eval_xhess(self, X, Y, Z):
        return sum(p.eval_xhess(X, Y, Z) for p in self.parts) if self.parts else 0.0 * X

    def radial(self, r):
        return sum(p.radial(r) for p in self.parts) if self.parts else 0.0 * r

    def radial_xgrad(self, r):
        return sum(p.radial_xgrad(r) for p in self.parts) if self.parts else 0.0 * r

    def radial_xhess(self, r):
        return sum(p.radial_xhess(r) for p in self.parts) if self.parts else 0.0 * r
