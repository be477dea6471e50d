import logging

from .models import DilationCheck, DilationVerdict, GroundStateResult, MinimizerOptions
from .soliton import RadialSoliton, nls_soliton, radial_soliton, shoot_central_value
from .solver import minimize_on_manifold, solve_ground_state
from .utils import decay_fit, verify_dilation_signs

logger = logging.getLogger(__name__)

__all__ = [
    "DilationCheck",
    "DilationVerdict",
    "GroundStateResult",
    "MinimizerOptions",
    "RadialSoliton",
    "decay_fit",
    "minimize_on_manifold",
    "nls_soliton",
    "radial_soliton",
    "shoot_central_value",
    "solve_ground_state",
    "verify_dilation_signs",
    "logger",
]
