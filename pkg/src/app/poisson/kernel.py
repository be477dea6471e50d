"""Free-space convolution with 1/(8 pi |x|) by 2x zero padding (Hockney)."""

import logging
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from app import settings
from app.field import Grid
from app.shared.consts import CELL_AVERAGE_WEIGHT, LATTICE_ORIGIN_WEIGHT
from app.shared.enums import OriginWeight

logger = logging.getLogger(__name__)


class CoulombKernel:
    """Samples of G(x) = 1/(4 pi |x|) on the doubled grid, transformed once.

    The origin sample is ``weight / (4 pi h)``: the lattice weight makes the
    sampled sum match the integral of smooth densities to fourth order, the
    cell-average weight to second order.
    """

    def __init__(self, grid: Grid, origin: OriginWeight = OriginWeight.LATTICE):
        self.grid = grid
        self.origin = origin
        n = grid.n
        h = grid.h
        offsets = np.arange(2 * n)
        offsets = np.where(offsets <= n, offsets, offsets - 2 * n).astype(np.float64)
        mx, my, mz = np.meshgrid(offsets, offsets, offsets, indexing="ij", sparse=True)
        r = h * np.sqrt(mx**2 + my**2 + mz**2)
        with np.errstate(divide="ignore"):
            samples = 1.0 / (4.0 * np.pi * r)
        weight = (
            LATTICE_ORIGIN_WEIGHT if origin is OriginWeight.LATTICE else CELL_AVERAGE_WEIGHT
        )
        samples[0, 0, 0] = weight / (4.0 * np.pi * h)
        self.samples = samples
        self.samples.setflags(write=False)
        # h^3 quadrature weight and the factor 1/2 of 1/(8 pi |x|)
        self.spectrum = sfft.rfftn(
            0.5 * grid.cell_volume * samples, workers=settings.SPOISON_THREADS
        )
        self.spectrum.setflags(write=False)
        logger.debug(f"Built Coulomb kernel for n={n}, L={grid.box_half_width}")

    def convolve(self, values: np.ndarray) -> np.ndarray:
        n = self.grid.n
        padded = np.zeros((2 * n,) * 3)
        padded[:n, :n, :n] = values
        workers = settings.SPOISON_THREADS
        out = sfft.irfftn(
            sfft.rfftn(padded, workers=workers) * self.spectrum,
            s=padded.shape,
            workers=workers,
        )
        return out[:n, :n, :n]


@lru_cache(maxsize=4)
def coulomb_kernel(grid: Grid, origin: OriginWeight = OriginWeight.LATTICE) -> CoulombKernel:
    return CoulombKernel(grid, origin)
