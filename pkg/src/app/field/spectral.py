"""Discrete Fourier transform contract and spectral differentiation.

Coefficients are unnormalized (``scipy.fft.fftn``); wavenumbers are
``2*pi*fftfreq(n, h)`` so derivatives do not depend on the box offset.
"""

import numpy as np
import scipy.fft as sfft

from app import settings

from .models import Field3


def fftn(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, workers=settings.SPOISON_THREADS)


def ifftn(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values, workers=settings.SPOISON_THREADS)


def transform_forward(f: Field3) -> Field3:
    return Field3(grid=f.grid, values=fftn(f.values))


def transform_inverse(f_hat: Field3) -> Field3:
    return Field3(grid=f_hat.grid, values=ifftn(f_hat.values))


def _axis_wavenumbers(f: Field3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = f.grid.wavenumbers()
    return (
        k[:, None, None],
        k[None, :, None],
        k[None, None, :],
    )


def gradient(f: Field3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spectral partial derivatives; real input gives real output."""
    f_hat = fftn(f.values)
    parts = []
    for k in _axis_wavenumbers(f):
        d = ifftn(1j * k * f_hat)
        parts.append(d.real if f.is_real else d)
    return parts[0], parts[1], parts[2]


def laplacian(f: Field3) -> np.ndarray:
    lap = ifftn(-f.grid.k_squared() * fftn(f.values))
    return lap.real if f.is_real else lap


def x_dot_grad(f: Field3) -> np.ndarray:
    """x . grad f with box coordinates."""
    X, Y, Z = f.grid.coords()
    dx, dy, dz = gradient(f)
    return X * dx + Y * dy + Z * dz


def helmholtz_inverse(f: Field3, omega: float) -> np.ndarray:
    """(omega - Laplacian)^{-1} f, the Sobolev preconditioner."""
    out = ifftn(fftn(f.values) / (omega + f.grid.k_squared()))
    return out.real if f.is_real else out


def dealias_mask(f: Field3) -> np.ndarray:
    """Two-thirds rule mask in spectral space."""
    k = np.abs(f.grid.wavenumbers())
    keep = k <= (2.0 / 3.0) * k.max()
    return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]


def spectral_tail(f: Field3) -> float:
    """Fraction of sum |f_hat|^2 carried by |k| above 2/3 of the Nyquist wavenumber."""
    power = np.abs(fftn(f.values)) ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    k_nyquist = np.pi / f.grid.h
    outer = f.grid.k_squared() > ((2.0 / 3.0) * k_nyquist) ** 2
    return float(power[np.broadcast_to(outer, power.shape)].sum() / total)
