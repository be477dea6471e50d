"""Radial e = 0 soliton of -Lap u + omega u = u^p by shooting on u(0).

For omega = 1 the profile obeys u'' + (2/r) u' = u - u^p with u'(0) = 0;
u(0) = a is bisected between undershoot (u' turns positive) and
overshoot (u crosses zero). Past the matching radius the profile is
continued by the Yukawa tail A e^{-r} / r. General omega follows from
u_omega(x) = omega^{1/(p-1)} u_1(sqrt(omega) x).
"""

import logging
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from app.field import Field3, Grid
from app.shared.exceptions import ShootingError

logger = logging.getLogger(__name__)

R_START = 1e-6
R_MAX = 40.0
MATCH_LEVEL = 1e-5
BISECTION_RTOL = 1e-14
N_KNOTS = 4000


def _rhs(r, y, p):
    u, du = y
    return [du, u - np.abs(u) ** (p - 1) * u - 2.0 * du / r]


def _start(a: float, p: float) -> list[float]:
    c = (a - a**p) / 3.0
    return [a + 0.5 * c * R_START**2, c * R_START]


def _crosses_zero(r, y, p):
    return y[0]


_crosses_zero.terminal = True
_crosses_zero.direction = -1


def _turns_up(r, y, p):
    return y[1]


_turns_up.terminal = True
_turns_up.direction = 1


def _shoot(a: float, p: float, dense: bool = False):
    return integrate.solve_ivp(
        _rhs,
        (R_START, R_MAX),
        _start(a, p),
        method="DOP853",
        args=(p,),
        events=(_crosses_zero, _turns_up),
        rtol=1e-12,
        atol=1e-14,
        dense_output=dense,
    )


def _overshoots(a: float, p: float) -> bool:
    sol = _shoot(a, p)
    if sol.status == -1:
        raise ShootingError(f"Radial integration failed at a={a:g}: {sol.message}")
    if sol.t_events[0].size:
        return True
    return False


def shoot_central_value(p: float, max_expansions: int = 60) -> float:
    """u(0) of the positive decaying solution for omega = 1."""
    lo = 1.0 + 1e-3
    if _overshoots(lo, p):
        raise ShootingError(f"Lower bracket a={lo:g} already overshoots for p={p:g}")
    hi = 2.0
    for _ in range(max_expansions):
        if _overshoots(hi, p):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ShootingError(f"No overshooting central value found for p={p:g}")

    while hi - lo > BISECTION_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _overshoots(mid, p):
            hi = mid
        else:
            lo = mid
    logger.info(f"Shooting converged: p={p:g}, u(0)={lo:.15g}")
    return lo


class RadialSoliton:
    """Positive radial profile u_1 for omega = 1, callable on physical coordinates for any omega."""

    def __init__(self, p: float):
        if not 1.0 < p < 5.0:
            raise ShootingError(f"p must lie in (1, 5), got {p}")
        self.p = p
        self.a = shoot_central_value(p)
        sol = _shoot(self.a, p, dense=True)
        r_end = sol.t[-1]
        if sol.t_events[1].size:
            # stop well before the undershoot turning point
            r_end = max(sol.t_events[1][0] - 2.0, 1.0)
        r = np.linspace(R_START, r_end, N_KNOTS)
        u, du = sol.sol(r)
        below = np.nonzero(u < MATCH_LEVEL * self.a)[0]
        cut = below[0] + 1 if below.size else r.size
        r, u, du = r[:cut], u[:cut], du[:cut]
        self.r_match = float(r[-1])
        self.tail_amplitude = float(u[-1] * self.r_match * np.exp(self.r_match))
        # the first knot sits at R_START; move it to the centre
        knots = np.concatenate([[0.0], r[1:]])
        values = np.concatenate([[self.a], u[1:]])
        self.spline = CubicSpline(knots, values, bc_type=((1, 0.0), (1, float(du[-1]))))

    def radial(self, r: np.ndarray) -> np.ndarray:
        """u_1(r)."""
        r = np.asarray(r, dtype=float)
        inner = r <= self.r_match
        out = np.empty_like(r)
        out[inner] = self.spline(r[inner])
        outer = r[~inner]
        out[~inner] = self.tail_amplitude * np.exp(-outer) / outer
        return out

    def profile(self, omega: float):
        """Generator of u_omega(x) = omega^{1/(p-1)} u_1(sqrt(omega) |x|)."""
        amplitude = omega ** (1.0 / (self.p - 1.0))
        stretch = np.sqrt(omega)

        def generator(X, Y, Z):
            r = np.sqrt(X**2 + Y**2 + Z**2)
            return amplitude * self.radial(stretch * r)

        return generator

    def mass(self, omega: float = 1.0) -> float:
        """||u_omega||_2^2 by radial quadrature plus the analytic tail."""
        inner, _ = integrate.quad(
            lambda r: 4.0 * np.pi * r**2 * self.spline(r) ** 2,
            0.0,
            self.r_match,
            limit=400,
            epsabs=0.0,
            epsrel=1e-12,
        )
        tail = 2.0 * np.pi * self.tail_amplitude**2 * np.exp(-2.0 * self.r_match)
        return omega ** (2.0 / (self.p - 1.0) - 1.5) * (inner + tail)


@lru_cache(maxsize=8)
def radial_soliton(p: float) -> RadialSoliton:
    return RadialSoliton(p)


def nls_soliton(omega: float, p: float, grid: Grid) -> Field3:
    """e = 0 seed on the grid, carrying its closed form as generator."""
    return Field3.from_generator(grid, radial_soliton(p).profile(omega))
