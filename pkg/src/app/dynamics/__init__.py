import logging

from .integrator import evolve, initial_state, sample, step
from .models import (
    EvolutionState,
    EvolutionTrace,
    EvolveOptions,
    InstabilityReport,
    TraceRecord,
    VirialReport,
)
from .virial import free_variance, instability_experiment, variance, variance_velocity, virial_check

logger = logging.getLogger(__name__)

__all__ = [
    "EvolutionState",
    "EvolutionTrace",
    "EvolveOptions",
    "InstabilityReport",
    "TraceRecord",
    "VirialReport",
    "evolve",
    "free_variance",
    "initial_state",
    "instability_experiment",
    "sample",
    "step",
    "variance",
    "variance_velocity",
    "virial_check",
    "logger",
]
