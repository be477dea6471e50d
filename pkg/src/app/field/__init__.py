import logging

from .generators import Gaussian, Mixture, PlaneWave, Radial, random_mixture
from .io import read_field, write_field
from .models import Field3, FieldMetadata, Generator, Grid, ScaleSpec
from .spectral import (
    dealias_mask,
    gradient,
    helmholtz_inverse,
    laplacian,
    spectral_tail,
    transform_forward,
    transform_inverse,
    x_dot_grad,
)
from .utils import (
    SplineSampler,
    grad_norm_sq,
    integrate,
    norm_l2sq,
    norm_lp,
    scale_field,
    spectral_rescale,
    support_overflow,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Field3",
    "FieldMetadata",
    "Gaussian",
    "Generator",
    "Grid",
    "Mixture",
    "PlaneWave",
    "Radial",
    "ScaleSpec",
    "SplineSampler",
    "dealias_mask",
    "grad_norm_sq",
    "gradient",
    "helmholtz_inverse",
    "integrate",
    "laplacian",
    "norm_l2sq",
    "norm_lp",
    "random_mixture",
    "read_field",
    "scale_field",
    "spectral_rescale",
    "spectral_tail",
    "support_overflow",
    "transform_forward",
    "transform_inverse",
    "write_field",
    "x_dot_grad",
    "logger",
]
