"""Sphere geometry for characteristic-function profiles.

Closed-form geometry of balls, the boundary-size functional D(Omega),
product quadrature on spheres and solid balls, and the exact Coulomb
potentials of uniformly charged balls and of their boundary layers.
"""

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from app.shared.consts import BALL_N_RADIAL, SPHERE_N_PHI, SPHERE_N_THETA

from .models import Ball, Point


class BallGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: Point
    R: float = Field(gt=0)

    @computed_field
    @property
    def L(self) -> float:
        """sup over the boundary of |x|."""
        return float(np.linalg.norm(self.center)) + self.R

    @computed_field
    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.R**2

    @computed_field
    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.R**3

    @computed_field
    @property
    def mean_curvature(self) -> float:
        return 2.0 / self.R

    @computed_field
    @property
    def curvature_l2(self) -> float:
        """||H||_{L^2(boundary)}; equals 4 sqrt(pi) for every radius."""
        return self.mean_curvature * np.sqrt(self.area)

    @computed_field
    @property
    def kappa1(self) -> float:
        return self.area / self.volume

    @computed_field
    @property
    def kappa2(self) -> float:
        # normal derivative of the torsion function |x - c|^2 / (2R) on the sphere
        return 1.0

    @computed_field
    @property
    def size(self) -> float:
        """D(Omega) = L|Omega|^{1/6} (L||H|| + |dOmega|^{1/2}) (kappa1 |Omega|^{1/3} + kappa2)^{1/2}"""
        vol = self.volume
        return (
            self.L
            * vol ** (1.0 / 6.0)
            * (self.L * self.curvature_l2 + np.sqrt(self.area))
            * np.sqrt(self.kappa1 * vol ** (1.0 / 3.0) + self.kappa2)
        )

    @computed_field
    @property
    def chi_norm(self) -> float:
        """||chi_Omega||_{6/5} = |Omega|^{5/6}"""
        return self.volume ** (5.0 / 6.0)

    def torsion(self, X, Y, Z) -> np.ndarray:
        cx, cy, cz = self.center
        return ((X - cx) ** 2 + (Y - cy) ** 2 + (Z - cz) ** 2) / (2.0 * self.R)


def ball_geometry(center: Point, R: float) -> BallGeometry:
    return BallGeometry(center=tuple(float(c) for c in center), R=R)


def size_lower_bound_constant() -> float:
    """C with D(Omega) >= C ||chi_Omega||_{6/5} for the ball-normalized trace constants."""
    unit = 4.0 / 3.0 * np.pi
    return np.sqrt(3.0) * unit ** (-1.0 / 6.0) * np.sqrt(3.0 * unit ** (1.0 / 3.0) + 1.0)


def torsion_check(
    geometry: BallGeometry, n_points: int = 200, step: float = 1e-3, seed: int = 0
) -> dict[str, float]:
    """Finite-difference residuals of Laplacian(w) = kappa1 inside and dw/dn = kappa2 on the sphere."""
    rng = np.random.default_rng(seed)
    c = np.asarray(geometry.center)
    dirs = rng.normal(size=(n_points, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = geometry.R * rng.uniform(0.0, 0.9, size=n_points) ** (1.0 / 3.0)
    inside = c + radii[:, None] * dirs

    def w(points):
        return geometry.torsion(points[:, 0], points[:, 1], points[:, 2])

    lap = np.zeros(n_points)
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = step
        lap += (w(inside + e) - 2.0 * w(inside) + w(inside - e)) / step**2
    surface = c + geometry.R * dirs
    normal_derivative = (w(surface + step * dirs) - w(surface - step * dirs)) / (2.0 * step)
    return {
        "laplacian_residual": float(np.max(np.abs(lap - geometry.kappa1))),
        "normal_derivative_residual": float(
            np.max(np.abs(normal_derivative - geometry.kappa2))
        ),
        "kappa2": float(np.max(normal_derivative)),
    }


@lru_cache(maxsize=8)
def sphere_quadrature(
    n_theta: int = SPHERE_N_THETA, n_phi: int = SPHERE_N_PHI
) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions (3, M) and weights (M,) integrating over the unit sphere."""
    cos_theta, w_theta = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    ct, pp = np.meshgrid(cos_theta, phi, indexing="ij")
    st = np.meshgrid(sin_theta, phi, indexing="ij")[0]
    directions = np.stack([st * np.cos(pp), st * np.sin(pp), ct]).reshape(3, -1)
    weights = (w_theta[:, None] * np.full(n_phi, 2.0 * np.pi / n_phi)[None, :]).ravel()
    directions.setflags(write=False)
    weights.setflags(write=False)
    return directions, weights


@lru_cache(maxsize=8)
def ball_quadrature(
    n_radial: int = BALL_N_RADIAL,
    n_theta: int = SPHERE_N_THETA,
    n_phi: int = SPHERE_N_PHI,
) -> tuple[np.ndarray, np.ndarray]:
    """Points (3, M) and weights (M,) integrating over the unit ball."""
    nodes, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (nodes + 1.0)
    w_r = 0.5 * w * r**2
    directions, w_s = sphere_quadrature(n_theta, n_phi)
    points = (r[:, None, None] * directions[None, :, :]).transpose(1, 0, 2).reshape(3, -1)
    weights = (w_r[:, None] * w_s[None, :]).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def ball_potential(ball: Ball, X, Y, Z) -> np.ndarray:
    """(1/(4 pi |x|)) * (sigma chi_B)."""
    d = ball.distance(X, Y, Z)
    R = ball.radius
    inside = (3.0 * R**2 - d**2) / 6.0
    outside = R**3 / (3.0 * np.maximum(d, R))
    return ball.sigma * np.where(d < R, inside, outside)


def ball_layer_potential(ball: Ball, X, Y, Z) -> np.ndarray:
    """(1/(4 pi |x|)) * (x.grad(sigma chi_B)) = -single layer with density sigma (y.n)."""
    cx, cy, cz = ball.center
    d = ball.distance(X, Y, Z)
    R = ball.radius
    # density y.n = R + c.n splits into a monopole and a dipole layer
    monopole = R**3 / np.maximum(d, R)
    c_dot = cx * (X - cx) + cy * (Y - cy) + cz * (Z - cz)
    dipole = np.where(d < R, c_dot / 3.0, R**3 * c_dot / (3.0 * np.maximum(d, R) ** 3))
    return -ball.sigma * (monopole + dipole)


def balls_self_energy(balls: list[Ball]) -> float:
    """-(1/4) int S1 rho for rho = sum sigma_i chi_{B_i}, with S1 = -(1/2) * potential."""
    total = 0.0
    for i, a in enumerate(balls):
        # int_B sigma * (3R^2 - r^2)/6 * sigma
        total += a.sigma**2 * 8.0 * np.pi / 15.0 * a.radius**5
        for b in balls[i + 1 :]:
            dist = float(np.linalg.norm(np.subtract(a.center, b.center)))
            total += 2.0 * a.charge * b.charge / (4.0 * np.pi * dist)
    return total / 8.0


def ball_potential_xgrad(ball: Ball, X, Y, Z) -> np.ndarray:
    """x . grad of ``ball_potential``."""
    cx, cy, cz = ball.center
    d = ball.distance(X, Y, Z)
    R = ball.radius
    d_safe = np.maximum(d, 1e-300)
    x_dot_n = (X * (X - cx) + Y * (Y - cy) + Z * (Z - cz)) / d_safe
    radial_derivative = np.where(d < R, -d / 3.0, -(R**3) / (3.0 * d_safe**2))
    return ball.sigma * radial_derivative * x_dot_n
