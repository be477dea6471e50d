import logging
from typing import Sequence

import numpy as np

from app.field import Field3
from app.functionals import FiberingMap, Params
from app.profiles import DopingProfile
from app.shared.exceptions import FieldError

from .models import DilationCheck, DilationVerdict

logger = logging.getLogger(__name__)

UNDERFLOW = 1e-14


def decay_fit(u0: Field3, omega: float, shell: tuple[float, float] = (0.3, 0.7)) -> float:
    """Rate k of u0 ~ C e^{-k r} / r from a least-squares fit of log(r u0) on a radial shell."""
    grid = u0.grid
    L = grid.box_half_width
    r = grid.radius()
    u = np.abs(u0.values)
    mask = (r >= shell[0] * L) & (r <= shell[1] * L) & (u > UNDERFLOW * u.max())
    if np.count_nonzero(mask) < 2:
        raise FieldError("Decay shell holds fewer than two resolved samples")
    slope, _ = np.polyfit(r[mask], np.log(r[mask] * u[mask]), 1)
    k = float(-slope)
    if k >= np.sqrt(omega):
        logger.warning(f"Fitted decay rate {k:.6g} is not below sqrt(omega) = {np.sqrt(omega):.6g}")
    return k


def verify_dilation_signs(
    u0: Field3, params: Params, rho: DopingProfile, lambdas: Sequence[float]
) -> DilationVerdict:
    """I(u0^lam) < I(u0), Q(u0^lam) < 0, J(u0^lam) < 0 and F''(lam) < 0 for lam > 1."""
    fmap = FiberingMap(u0, params, rho)
    I0 = fmap.F(1.0)
    Q0 = fmap.G(1.0)
    checks = []
    first_violation = None
    overflow = False
    for lam in lambdas:
        point = fmap.point(float(lam))
        overflow = overflow or point.overflow
        passed = point.F < I0 and point.G < 0 and point.J < 0 and point.d2F_analytic < 0
        checks.append(
            DilationCheck(
                lam=point.lam,
                I_gap=point.F - I0,
                Q=point.G,
                J=point.J,
                d2F=point.d2F_analytic,
                d2F_fd=point.d2F,
                passed=passed,
            )
        )
        if not passed and first_violation is None:
            first_violation = point.lam
            logger.warning(f"Dilation signs fail at lam = {point.lam:g}")
    return DilationVerdict(
        I0=I0, Q0=Q0, checks=checks, first_violation=first_violation, overflow=overflow
    )
