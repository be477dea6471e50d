from functools import lru_cache
from typing import Callable, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.shared.consts import DEFAULT_BOX_HALF_WIDTH, DEFAULT_N
from app.shared.exceptions import FieldError

# f(X, Y, Z) -> values, evaluated on broadcastable coordinate arrays
Generator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=8)
def _axis(n: int, box_half_width: float) -> np.ndarray:
    h = 2.0 * box_half_width / n
    return _frozen(-box_half_width + h * np.arange(n, dtype=np.float64))


@lru_cache(maxsize=4)
def _mesh(n: int, box_half_width: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    axis = _axis(n, box_half_width)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    return _frozen(X), _frozen(Y), _frozen(Z)


@lru_cache(maxsize=4)
def _radius(n: int, box_half_width: float) -> np.ndarray:
    X, Y, Z = _mesh(n, box_half_width)
    return _frozen(np.sqrt(X**2 + Y**2 + Z**2))


@lru_cache(maxsize=8)
def _wavenumbers(n: int, box_half_width: float) -> np.ndarray:
    h = 2.0 * box_half_width / n
    return _frozen(2.0 * np.pi * np.fft.fftfreq(n, d=h))


@lru_cache(maxsize=4)
def _k_squared(n: int, box_half_width: float) -> np.ndarray:
    k = _wavenumbers(n, box_half_width)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij", sparse=True)
    return _frozen(kx**2 + ky**2 + kz**2)


class Grid(BaseModel):
    """Uniform periodic box [-L, L)^3 with n points per axis."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(default=DEFAULT_N, description="Points per axis, power of two")
    box_half_width: float = Field(
        default=DEFAULT_BOX_HALF_WIDTH, gt=0, description="Half width L of the box"
    )

    @field_validator("n")
    @classmethod
    def _power_of_two(cls, n: int) -> int:
        if n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        return n

    @property
    def h(self) -> float:
        return 2.0 * self.box_half_width / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def axis(self) -> np.ndarray:
        return _axis(self.n, self.box_half_width)

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return _mesh(self.n, self.box_half_width)

    def radius(self) -> np.ndarray:
        return _radius(self.n, self.box_half_width)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*fftfreq(n, h) along one axis."""
        return _wavenumbers(self.n, self.box_half_width)

    def k_squared(self) -> np.ndarray:
        return _k_squared(self.n, self.box_half_width)

    def to_index(self, points: np.ndarray) -> np.ndarray:
        """Map physical points of shape (3, ...) to fractional grid indices."""
        return (np.asarray(points) + self.box_half_width) / self.h

    def doubled(self) -> "Grid":
        """Same spacing, twice the box."""
        return Grid(n=2 * self.n, box_half_width=2.0 * self.box_half_width)


class Field3(BaseModel):
    """Immutable sampled field on a Grid, optionally carrying its closed form."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    values: np.ndarray
    generator: Generator | None = Field(default=None, exclude=True)

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, values) -> np.ndarray:
        array = np.asarray(values)
        dtype = np.float64 if np.isrealobj(array) else np.complex128
        return np.array(array, dtype=dtype, copy=True)

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.values.shape != self.grid.shape:
            raise FieldError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field contains non-finite entries")
        self.values.setflags(write=False)
        return self

    @classmethod
    def from_generator(cls, grid: Grid, generator: Generator) -> Self:
        X, Y, Z = grid.coords()
        return cls(grid=grid, values=generator(X, Y, Z), generator=generator)

    @classmethod
    def zeros(cls, grid: Grid, real: bool = False) -> Self:
        dtype = np.float64 if real else np.complex128
        return cls(grid=grid, values=np.zeros(grid.shape, dtype=dtype))

    @property
    def is_real(self) -> bool:
        return self.values.dtype == np.float64

    def density(self) -> np.ndarray:
        """|u|^2 as a real array."""
        return np.abs(self.values) ** 2

    def with_values(self, values: np.ndarray) -> "Field3":
        return Field3(grid=self.grid, values=values)

    def real_part(self) -> "Field3":
        return Field3(grid=self.grid, values=np.real(self.values))

    def __mul__(self, scalar: complex) -> "Field3":
        generator = self.generator
        scaled = None
        if generator is not None:
            scaled = lambda X, Y, Z: scalar * generator(X, Y, Z)  # noqa: E731
        return Field3(grid=self.grid, values=scalar * self.values, generator=scaled)

    __rmul__ = __mul__


class ScaleSpec(BaseModel):
    """v(x) = lam^a u(lam^b x); (a, b) = (3/2, 1) keeps the L2 norm."""

    model_config = ConfigDict(frozen=True)

    a: float = 1.5
    b: float = 1.0
    lam: float = Field(gt=0)

    @classmethod
    def l2_invariant(cls, lam: float) -> Self:
        return cls(a=1.5, b=1.0, lam=lam)


class FieldMetadata(BaseModel):
    """JSON sidecar written next to a binary field file."""

    format: str = "SPF3"
    n: int
    box_half_width: float
    spacing: float
    dtype: str = "complex128 little-endian (re, im)"
    order: str = "row-major (i, j, k), x = -L + i*h"
    l2_norm_sq: float
