"""The action I, its Nehari, Pohozaev and virial companions, and their gradients."""

import logging
from typing import Sequence

import numpy as np

from app.field import (
    Field3,
    grad_norm_sq,
    integrate,
    laplacian,
    norm_l2sq,
    norm_lp,
    x_dot_grad,
)
from app.poisson import (
    doping_mass_at_boundary,
    doping_potentials,
    doping_self_energy,
    pair_energy,
    pair_potential,
)
from app.profiles import Ball, BallsProfile, DopingProfile, MollifiedBallProfile, ZeroProfile

from .context import PairingContext
from .domains import ball_surface_terms
from .models import BallSurfaceTerms, FunctionalReport, Params

logger = logging.getLogger(__name__)

F_CONVERGED_MASS = 1e-6


def build_report(
    params: Params,
    A: float,
    B: float,
    C: float,
    D: float,
    E1: float,
    E2: float,
    E3: float,
    F_const: float,
    F_converged: bool = True,
) -> FunctionalReport:
    omega, e2, p = params.omega, params.e**2, params.p
    N = A + omega * B - C + 4 * e2 * D + 4 * e2 * E1
    P = 0.5 * A + 1.5 * omega * B - 3 * C / (p + 1) + 5 * e2 * D + 10 * e2 * E1 - e2 * E2
    Q = A - 1.5 * (p - 1) / (p + 1) * C + e2 * D - 4 * e2 * E1 + e2 * E2
    J = 1.5 * A + 0.5 * omega * B - (2 * p - 1) / (p + 1) * C + 3 * e2 * D - 2 * e2 * E1 + e2 * E2
    I = 0.5 * A + 0.5 * omega * B - C / (p + 1) + e2 * D + 2 * e2 * E1
    return FunctionalReport(
        A=A,
        B=B,
        C=C,
        D=D,
        E1=E1,
        E2=E2,
        E3=E3,
        F_const=F_const,
        F_converged=F_converged,
        N=N,
        P=P,
        Q=Q,
        J=J,
        I=I,
        I_script=I + e2 * F_const,
    )


def self_energy(u: Field3, rho: DopingProfile) -> tuple[float, bool]:
    if rho.is_zero:
        return 0.0, True
    converged = doping_mass_at_boundary(u.grid, rho) < F_CONVERGED_MASS
    if not converged:
        logger.warning("Doping self-energy is sensitive to box truncation")
    return doping_self_energy(u.grid, rho), converged


def report(
    u: Field3, params: Params, rho: DopingProfile, context: PairingContext | None = None
) -> FunctionalReport:
    """All functionals of u; E1, E2, E3 from S0 paired with the profile (surface forms for balls)."""
    if context is None:
        context = PairingContext(u, rho)
    pairs = context.evaluate(1.0, second=True)
    F_const, converged = self_energy(u, rho)
    return build_report(
        params,
        A=grad_norm_sq(u),
        B=norm_l2sq(u),
        C=norm_lp(u, params.p + 1, power=True),
        D=context.D,
        E1=pairs.E1,
        E2=pairs.E2,
        E3=pairs.E3,
        F_const=F_const,
        F_converged=converged,
    )


def volume_report(u: Field3, params: Params, rho: DopingProfile, s0: Field3 | None = None) -> FunctionalReport:
    """Report with E1 = (1/4) int S1 |u|^2, E2 = (1/2) int S2 |u|^2, E3 = (1/2) int S3 |u|^2.

    These are the forms the time integrator monitors; E3 is nan when the
    profile contains balls.
    """
    if s0 is None:
        s0 = pair_potential(u)
    density = u.density()
    doping = doping_potentials(u.grid, rho)
    E1 = 0.25 * integrate(u.grid, doping.s1.values * density)
    E2 = 0.5 * integrate(u.grid, doping.s2.values * density)
    E3 = float("nan") if doping.s3 is None else 0.5 * integrate(u.grid, doping.s3.values * density)
    F_const, converged = self_energy(u, rho)
    return build_report(
        params,
        A=grad_norm_sq(u),
        B=norm_l2sq(u),
        C=norm_lp(u, params.p + 1, power=True),
        D=pair_energy(u, s0),
        E1=E1,
        E2=E2,
        E3=E3,
        F_const=F_const,
        F_converged=converged,
    )


def dynamics_energy(u: Field3, params: Params, rho: DopingProfile, s0: Field3 | None = None) -> float:
    """(1/2)A - C/(p+1) + e^2 D + 2 e^2 E1, conserved by the flow."""
    if s0 is None:
        s0 = pair_potential(u)
    e2 = params.e**2
    E1 = 0.25 * integrate(u.grid, doping_potentials(u.grid, rho).s1.values * u.density())
    return (
        0.5 * grad_norm_sq(u)
        - norm_lp(u, params.p + 1, power=True) / (params.p + 1)
        + e2 * pair_energy(u, s0)
        + 2 * e2 * E1
    )


def action_gradient(
    u: Field3, params: Params, rho: DopingProfile, s0: Field3 | None = None
) -> np.ndarray:
    """I'(u) = -Lap u + omega u - |u|^{p-1} u + e^2 (S0 + S1) u."""
    if s0 is None:
        s0 = pair_potential(u)
    v = u.values
    s1 = doping_potentials(u.grid, rho).s1.values
    return (
        -laplacian(u)
        + params.omega * v
        - np.abs(v) ** (params.p - 1) * v
        + params.e**2 * (s0.values + s1) * v
    )


def constraint_gradient(
    u: Field3, params: Params, rho: DopingProfile, s0: Field3 | None = None
) -> np.ndarray:
    """J'(u) = -3 Lap u + omega u - (2p-1)|u|^{p-1} u + e^2 (3 S0 - S1 + S2) u."""
    if s0 is None:
        s0 = pair_potential(u)
    v = u.values
    doping = doping_potentials(u.grid, rho)
    return (
        -3.0 * laplacian(u)
        + params.omega * v
        - (2 * params.p - 1) * np.abs(v) ** (params.p - 1) * v
        + params.e**2 * (3.0 * s0.values - doping.s1.values + doping.s2.values) * v
    )


def stationarity_residual(u: Field3, params: Params, rho: DopingProfile) -> float:
    """sup |-Lap u + omega u + e^2 S(u) u - |u|^{p-1} u| on the grid."""
    return float(np.max(np.abs(action_gradient(u, params, rho))))


def omega_lambda(
    u: Field3, ball: Ball, lambdas: Sequence[float], context: PairingContext | None = None
) -> BallSurfaceTerms:
    """Omega, Omega' and Omega'' of ``ball`` at each lam."""
    if context is None:
        context = PairingContext(u, ZeroProfile())
    terms = [ball_surface_terms(context, ball, float(lam)) for lam in lambdas]
    return BallSurfaceTerms(
        lambdas=[t.lam for t in terms],
        omega=[t.omega for t in terms],
        d_omega=[t.d_omega for t in terms],
        d2_omega=[t.d2_omega for t in terms],
    )


def ball_virial_sides(u: Field3, rho: DopingProfile) -> tuple[float, float]:
    """(Re int S1 u x.grad(conj u), -10 E1 + E2) with the exact S1 of the profile."""
    s1 = doping_potentials(u.grid, rho).s1.values
    lhs = integrate(u.grid, s1 * np.real(u.values * np.conj(x_dot_grad(u))))
    pairs = PairingContext(u, rho).evaluate(1.0)
    return lhs, -10.0 * pairs.E1 + pairs.E2


def mollified_e2(u: Field3, ball: Ball, width: float) -> tuple[float, float]:
    """E2 of sigma chi_B by the surface form and of its tanh mollification by the volume form."""
    sharp = PairingContext(u, BallsProfile(balls=(ball,))).evaluate(1.0).E2
    smooth_rho = MollifiedBallProfile(
        sigma=ball.sigma, center=ball.center, radius=ball.radius, width=width
    )
    volume = 0.5 * integrate(u.grid, doping_potentials(u.grid, smooth_rho).s2.values * u.density())
    return sharp, volume
