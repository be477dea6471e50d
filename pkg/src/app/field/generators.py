"""Closed-form field generators.

A generator maps coordinate arrays (X, Y, Z) to values; fields built from
one re-evaluate exactly under ``scale_field``.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Gaussian:
    """amplitude * exp(-beta |x - center|^2)"""

    amplitude: complex = 1.0
    beta: float = 1.0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __call__(self, X, Y, Z):
        cx, cy, cz = self.center
        r2 = (X - cx) ** 2 + (Y - cy) ** 2 + (Z - cz) ** 2
        return self.amplitude * np.exp(-self.beta * r2)


@dataclass(frozen=True)
class Mixture:
    terms: tuple[Gaussian, ...]

    def __call__(self, X, Y, Z):
        out = self.terms[0](X, Y, Z)
        for term in self.terms[1:]:
            out = out + term(X, Y, Z)
        return out


@dataclass(frozen=True)
class Radial:
    """profile(|x|) for a callable radial profile."""

    profile: Callable[[np.ndarray], np.ndarray]

    def __call__(self, X, Y, Z):
        return self.profile(np.sqrt(X**2 + Y**2 + Z**2))


@dataclass(frozen=True)
class PlaneWave:
    wavevector: tuple[float, float, float]

    def __call__(self, X, Y, Z):
        kx, ky, kz = self.wavevector
        return np.exp(1j * (kx * X + ky * Y + kz * Z))


def random_mixture(
    rng: np.random.Generator,
    n_terms: int = 3,
    spread: float = 1.0,
    beta_range: Sequence[float] = (0.6, 2.0),
    complex_amplitudes: bool = True,
) -> Mixture:
    """Smooth decaying random field: a sum of Gaussians with random weights,
    widths and centres inside a ball of radius ``spread``."""
    terms = []
    for _ in range(n_terms):
        amplitude: complex = rng.uniform(0.3, 1.5)
        if complex_amplitudes:
            amplitude = amplitude * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        center = tuple(rng.uniform(-spread, spread, size=3) / np.sqrt(3.0))
        beta = rng.uniform(*beta_range)
        terms.append(Gaussian(amplitude=amplitude, beta=beta, center=center))
    return Mixture(terms=tuple(terms))
