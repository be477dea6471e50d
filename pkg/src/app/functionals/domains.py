"""Surface terms of ball-shaped doping: Omega(lam) = int over lam*B of S0(u).

For a ball B with centre c and radius R, and y = c + R n on its sphere:

    Omega'(lam)  = lam^2 int S0(lam y) (y.n) dS
    Omega''(lam) = 2 lam int S0(lam y) (y.n) dS + lam^2 int (y.grad S0)(lam y) (y.n) dS

S0 is sampled by cubic splines of the grid potential; grad S0 is the
convolution of grad |u|^2.
"""

import logging
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel

from app.profiles import Ball, ball_quadrature, sphere_quadrature

if TYPE_CHECKING:
    from .context import PairingContext

logger = logging.getLogger(__name__)


class BallTerms(BaseModel):
    lam: float
    omega: float
    d_omega: float
    d2_omega: float = 0.0
    overflow: bool = False


def ball_surface_terms(
    context: "PairingContext", ball: Ball, lam: float, second: bool = True
) -> BallTerms:
    c = np.asarray(ball.center, dtype=float)
    R = ball.radius
    L = context.grid.box_half_width
    overflow = lam * (float(np.max(np.abs(c))) + R) >= L
    if overflow:
        logger.warning(f"Scaled ball lam={lam:g} R={R:g} leaves the box L={L:g}")

    sample = context.sampler
    points, w_ball = ball_quadrature()
    inside = lam * (c[:, None] + R * points)
    omega = (lam * R) ** 3 * float(np.dot(w_ball, sample(*inside)))

    directions, w_sphere = sphere_quadrature()
    y = c[:, None] + R * directions
    y_dot_n = c @ directions + R
    s_sphere = sample(*(lam * y))
    flux = R**2 * float(np.dot(w_sphere, s_sphere * y_dot_n))
    d_omega = lam**2 * flux

    d2_omega = 0.0
    if second:
        gx, gy, gz = context.gradient_samplers
        at = lam * y
        y_dot_grad = y[0] * gx(*at) + y[1] * gy(*at) + y[2] * gz(*at)
        d2_omega = 2.0 * lam * flux + lam**2 * R**2 * float(
            np.dot(w_sphere, y_dot_grad * y_dot_n)
        )
    return BallTerms(lam=lam, omega=omega, d_omega=d_omega, d2_omega=d2_omega, overflow=overflow)

