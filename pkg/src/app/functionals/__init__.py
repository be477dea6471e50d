import logging

from .context import PairingContext, Pairings, energy_form
from .domains import BallTerms, ball_surface_terms
from .energy import (
    action_gradient,
    ball_virial_sides,
    build_report,
    constraint_gradient,
    dynamics_energy,
    mollified_e2,
    omega_lambda,
    report,
    stationarity_residual,
    volume_report,
)
from .fibering import (
    FiberingMap,
    descent_constant,
    energy_inequality_check,
    fibering,
    fit_remainder_constant,
    g_poly,
    mass_bound_constant,
    nehari_projection,
    reference_root_check,
    remainder,
    tau,
)
from .models import (
    BallSurfaceTerms,
    EnergyInequalityReport,
    FiberingCurve,
    FiberingPoint,
    FunctionalReport,
    InequalityPoint,
    NehariProjection,
    Params,
    ReferenceRootReport,
)

logger = logging.getLogger(__name__)

__all__ = [
    "BallSurfaceTerms",
    "BallTerms",
    "EnergyInequalityReport",
    "FiberingCurve",
    "FiberingMap",
    "FiberingPoint",
    "FunctionalReport",
    "InequalityPoint",
    "NehariProjection",
    "PairingContext",
    "Pairings",
    "Params",
    "ReferenceRootReport",
    "action_gradient",
    "ball_surface_terms",
    "ball_virial_sides",
    "build_report",
    "constraint_gradient",
    "descent_constant",
    "dynamics_energy",
    "energy_form",
    "energy_inequality_check",
    "fibering",
    "fit_remainder_constant",
    "g_poly",
    "mass_bound_constant",
    "mollified_e2",
    "nehari_projection",
    "omega_lambda",
    "reference_root_check",
    "remainder",
    "report",
    "stationarity_residual",
    "tau",
    "volume_report",
    "logger",
]
