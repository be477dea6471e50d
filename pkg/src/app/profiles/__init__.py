import logging

from .geometry import (
    BallGeometry,
    ball_geometry,
    ball_layer_potential,
    ball_potential,
    ball_potential_xgrad,
    ball_quadrature,
    balls_self_energy,
    size_lower_bound_constant,
    sphere_quadrature,
    torsion_check,
)
from .models import (
    Ball,
    BallsProfile,
    DopingProfile,
    GaussianProfile,
    MollifiedBallProfile,
    PowerLawProfile,
    RadialProfile,
    SmoothComponent,
    SumProfile,
    ZeroProfile,
    profile_adapter,
    smooth_component,
)
from .utils import (
    ConditionReport,
    ProfileNorms,
    check_smallness,
    dilation_condition,
    gaussian_sign_change_radii,
    power_law_sign_change_radii,
    profile_norms,
    radial_lp_norm,
    smallness,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Ball",
    "BallGeometry",
    "BallsProfile",
    "ConditionReport",
    "DopingProfile",
    "GaussianProfile",
    "MollifiedBallProfile",
    "PowerLawProfile",
    "ProfileNorms",
    "RadialProfile",
    "SmoothComponent",
    "SumProfile",
    "ZeroProfile",
    "ball_geometry",
    "ball_layer_potential",
    "ball_potential",
    "ball_potential_xgrad",
    "ball_quadrature",
    "balls_self_energy",
    "check_smallness",
    "dilation_condition",
    "gaussian_sign_change_radii",
    "power_law_sign_change_radii",
    "profile_adapter",
    "profile_norms",
    "radial_lp_norm",
    "size_lower_bound_constant",
    "smallness",
    "smooth_component",
    "sphere_quadrature",
    "torsion_check",
    "logger",
]
