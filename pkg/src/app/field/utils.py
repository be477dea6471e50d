import logging
from typing import Literal

import numpy as np
from scipy import ndimage

from app.shared.consts import SPECTRAL_TAIL_WARN, SUPPORT_OVERFLOW_TOL
from app.shared.exceptions import FieldError

from .models import Field3, Grid, ScaleSpec
from .spectral import fftn, spectral_tail

logger = logging.getLogger(__name__)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Uniform-weight Riemann sum h^3 * sum(values)."""
    return float(grid.cell_volume * np.sum(values))


def norm_l2sq(u: Field3) -> float:
    """B(u) = ||u||_2^2."""
    return integrate(u.grid, u.density())


def grad_norm_sq(u: Field3) -> float:
    """A(u) = ||grad u||_2^2 by spectral differentiation."""
    tail = spectral_tail(u)
    if tail > SPECTRAL_TAIL_WARN:
        logger.warning(f"Spectral tail {tail:.2e} exceeds {SPECTRAL_TAIL_WARN:.0e}")
    power = np.abs(fftn(u.values)) ** 2
    n3 = u.grid.n**3
    return float(u.grid.cell_volume / n3 * np.sum(u.grid.k_squared() * power))


def norm_lp(u: Field3, q: float, power: bool = False) -> float:
    """L^q norm, or its q-th power when ``power`` is set; C(u) = norm_lp(u, p+1, True)."""
    if q < 1:
        raise FieldError(f"q must be >= 1, got {q}")
    integral = integrate(u.grid, np.abs(u.values) ** q)
    return integral if power else integral ** (1.0 / q)


class SplineSampler:
    """Cubic-spline (or lower order) interpolant of a grid field at arbitrary points.

    Real and imaginary parts are interpolated separately. Spline
    coefficients are computed once per sampler.
    """

    def __init__(self, field: Field3, order: int = 3, mode: str = "mirror"):
        self.grid = field.grid
        self.order = order
        self.mode = mode
        self.is_real = field.is_real
        parts = [np.real(field.values)]
        if not field.is_real:
            parts.append(np.imag(field.values))
        if order > 1:
            parts = [ndimage.spline_filter(p, order=order, mode=mode) for p in parts]
        self._coefficients = parts

    def __call__(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        coords = self.grid.to_index(np.stack(np.broadcast_arrays(X, Y, Z)))
        sampled = [
            ndimage.map_coordinates(
                c, coords, order=self.order, mode=self.mode, prefilter=False
            )
            for c in self._coefficients
        ]
        if self.is_real:
            return sampled[0]
        return sampled[0] + 1j * sampled[1]


def support_overflow(u: Field3, spec: ScaleSpec) -> float:
    """Fraction of |u|^2 mass in the outer 10% shell of the box that the
    scaled evaluation points lam^b x reach (or the part they cannot reach)."""
    total = u.density().sum()
    if total == 0.0:
        return 0.0
    L = u.grid.box_half_width
    reach = spec.lam**spec.b * L
    X, Y, Z = u.grid.coords()
    sup = np.maximum(np.maximum(np.abs(X), np.abs(Y)), np.abs(Z))
    if reach >= L:
        outer = sup >= 0.9 * L
    else:
        # evaluation points stay inside |x|_inf < reach; mass beyond is dropped
        outer = sup >= 0.9 * reach
    return float(u.density()[outer].sum() / total)


def _fourier_resample_matrix(grid: Grid, stretch: float) -> np.ndarray:
    """Real (n, n) matrix evaluating the band-limited interpolant at stretch * x."""
    x = grid.axis
    n = grid.n
    target = stretch * x
    d = target[:, None] - x[None, :]
    k = np.abs(grid.wavenumbers()[1 : n // 2])
    k_nyquist = np.pi / grid.h
    matrix = 1.0 + 2.0 * np.cos(d[..., None] * k).sum(axis=-1) + np.cos(k_nyquist * d)
    matrix /= n
    L = grid.box_half_width
    matrix[(target < -L) | (target >= L)] = 0.0
    return matrix


def spectral_rescale(values: np.ndarray, grid: Grid, stretch: float) -> np.ndarray:
    """values(stretch * x) by separable trigonometric interpolation, zero outside the box."""
    matrix = _fourier_resample_matrix(grid, stretch)
    out = values
    for axis in range(3):
        out = np.moveaxis(np.tensordot(matrix, out, axes=([1], [axis])), 0, axis)
    return out


def scale_field(u: Field3, spec: ScaleSpec, order: int | Literal["spectral"] = 1) -> Field3:
    """v(x) = lam^a u(lam^b x).

    Exact when ``u`` carries a generator; otherwise interpolated
    (``order=1`` trilinear, ``order=3`` cubic spline, ``"spectral"``
    trigonometric), zero outside the box.
    """
    lam, a, b = spec.lam, spec.a, spec.b
    if lam == 1.0:
        return u
    factor = lam**a
    stretch = lam**b

    if u.generator is not None:
        g = u.generator

        def scaled(X, Y, Z):
            return factor * g(stretch * X, stretch * Y, stretch * Z)

        return Field3.from_generator(u.grid, scaled)

    overflow = support_overflow(u, spec)
    if overflow > SUPPORT_OVERFLOW_TOL:
        logger.warning(
            f"Support overflow {overflow:.2e} when scaling by lam={lam:g} (b={b:g})"
        )
    if order == "spectral":
        return Field3(grid=u.grid, values=factor * spectral_rescale(u.values, u.grid, stretch))

    X, Y, Z = u.grid.coords()
    points = u.grid.to_index(np.stack([stretch * X, stretch * Y, stretch * Z]))
    parts = [np.real(u.values)] if u.is_real else [u.values.real, u.values.imag]
    sampled = [
        ndimage.map_coordinates(p, points, order=order, mode="constant", cval=0.0)
        for p in parts
    ]
    values = sampled[0] if u.is_real else sampled[0] + 1j * sampled[1]
    return Field3(grid=u.grid, values=factor * values)
