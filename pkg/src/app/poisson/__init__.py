import logging

from .cache import PotentialCache
from .kernel import CoulombKernel, coulomb_kernel
from .models import DopingPotentials, PotentialSet, S1DecayReport
from .potentials import (
    convolve_array,
    coulomb_convolve,
    doping_mass_at_boundary,
    doping_potentials,
    doping_self_energy,
    doping_virial_residual,
    pair_energy,
    pair_potential,
    pair_virial_residual,
    potential_cache,
    potentials,
    s1_decay_check,
    x_dot_grad_doping_potential,
    x_dot_grad_pair_potential,
)

logger = logging.getLogger(__name__)

__all__ = [
    "CoulombKernel",
    "DopingPotentials",
    "PotentialCache",
    "PotentialSet",
    "S1DecayReport",
    "convolve_array",
    "coulomb_convolve",
    "coulomb_kernel",
    "doping_mass_at_boundary",
    "doping_potentials",
    "doping_self_energy",
    "doping_virial_residual",
    "pair_energy",
    "pair_potential",
    "pair_virial_residual",
    "potential_cache",
    "potentials",
    "s1_decay_check",
    "x_dot_grad_doping_potential",
    "x_dot_grad_pair_potential",
    "logger",
]
