import math
from typing import Final

# Field binary format
FIELD_MAGIC: Final[bytes] = b"SPF3"
FIELD_HEADER_BYTES: Final[int] = 32

# CSV column metadata key on pydantic fields
COL_META: Final[str] = "col_name_xxx"

# Lattice constant -zeta_{Z^3}(1/2): origin weight making the sampled
# 1/|x| kernel reproduce the integral of smooth densities to O(h^4)
LATTICE_ORIGIN_WEIGHT: Final[float] = 2.8372974794806
# (1/h^2) * integral of 1/|x| over the central cell [-h/2, h/2]^3
CELL_AVERAGE_WEIGHT: Final[float] = 3 * math.log(math.sqrt(3) + 2) - math.pi / 2

DEFAULT_N: Final[int] = 64
DEFAULT_BOX_HALF_WIDTH: Final[float] = 8.0
DEFAULT_RHO0: Final[float] = 0.1
DEFAULT_DELTA_STAR: Final[float] = 0.25

SPECTRAL_TAIL_WARN: Final[float] = 1e-6
SUPPORT_OVERFLOW_TOL: Final[float] = 1e-8

# Fibering finite differences
FD_STEP: Final[float] = 1e-3
PULLBACK_BELOW: Final[float] = 0.5

# Sphere product rule (Gauss-Legendre in cos(theta) x uniform phi)
SPHERE_N_THETA: Final[int] = 32
SPHERE_N_PHI: Final[int] = 64
BALL_N_RADIAL: Final[int] = 32

LAMBDA_MAX: Final[float] = 1e3
