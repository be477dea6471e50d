from enum import Enum


class StopReason(Enum):
    COMPLETED = "COMPLETED"
    DT_FLOOR = "DT_FLOOR"
    GRADIENT_GROWTH = "GRADIENT_GROWTH"
    RESOLUTION_LOST = "RESOLUTION_LOST"
    NON_FINITE = "NON_FINITE"


class EnergyForm(Enum):
    """How E1(u^lam), E2(u^lam), E3(u^lam) are evaluated for smooth profiles."""

    RESCALED_PROFILE = "RESCALED_PROFILE"
    PULLED_BACK_POTENTIAL = "PULLED_BACK_POTENTIAL"


class OriginWeight(Enum):
    LATTICE = "LATTICE"
    CELL_AVERAGE = "CELL_AVERAGE"
