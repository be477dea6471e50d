import logging

import numpy as np
from pydantic import BaseModel
from scipy import integrate, optimize

from app.shared.exceptions import ProfileError

from .geometry import ball_geometry
from .models import DopingProfile, smooth_component

logger = logging.getLogger(__name__)

SIX_FIFTHS = 6.0 / 5.0


def radial_lp_norm(f, q: float = SIX_FIFTHS) -> float:
    """(int_{R^3} |f(|x|)|^q dx)^{1/q} by adaptive radial quadrature."""
    integrand = lambda r: 4.0 * np.pi * r**2 * np.abs(f(r)) ** q  # noqa: E731
    inner, _ = integrate.quad(integrand, 0.0, 10.0, limit=400, epsabs=0.0, epsrel=1e-12)
    outer, _ = integrate.quad(integrand, 10.0, np.inf, limit=400, epsabs=0.0, epsrel=1e-10)
    return (inner + outer) ** (1.0 / q)


def grid_lp_norm(values: np.ndarray, cell_volume: float, q: float = SIX_FIFTHS) -> float:
    return float((cell_volume * np.sum(np.abs(values) ** q)) ** (1.0 / q))


class ProfileNorms(BaseModel):
    rho: float = 0.0
    xgrad: float = 0.0
    xhess: float = 0.0
    balls: float = 0.0

    @property
    def total(self) -> float:
        return self.rho + self.xgrad + self.xhess + self.balls


def profile_norms(rho: DopingProfile, grid=None) -> ProfileNorms:
    """L^{6/5} norms of rho, x.grad(rho), x.(D^2 rho x) for the smooth part and
    sum sigma_i D(Omega_i) for the balls."""
    smooth = smooth_component(rho)
    norms = ProfileNorms()
    if smooth:
        if smooth.is_centered:
            norms.rho = radial_lp_norm(smooth.radial)
            norms.xgrad = radial_lp_norm(smooth.radial_xgrad)
            norms.xhess = radial_lp_norm(smooth.radial_xhess)
        else:
            if grid is None:
                raise ProfileError("off-centre smooth profile needs a grid for its norms")
            X, Y, Z = grid.coords()
            dv = grid.cell_volume
            norms.rho = grid_lp_norm(smooth.eval(X, Y, Z), dv)
            norms.xgrad = grid_lp_norm(smooth.eval_xgrad(X, Y, Z), dv)
            norms.xhess = grid_lp_norm(smooth.eval_xhess(X, Y, Z), dv)
    norms.balls = sum(
        ball.sigma * ball_geometry(ball.center, ball.radius).size
        for ball in rho.ball_list()
    )
    return norms


def smallness(rho: DopingProfile, e: float, grid=None) -> float:
    """e^2 (||rho|| + ||x.grad rho|| + ||x.D^2 rho x||)_{6/5} + e^2 sum sigma_i D(Omega_i)."""
    return e**2 * profile_norms(rho, grid).total


def check_smallness(rho: DopingProfile, e: float, rho0: float, grid=None) -> float:
    value = smallness(rho, e, grid)
    logger.info(f"Smallness {value:.6g} (threshold rho0 = {rho0:g})")
    if value > rho0:
        logger.warning(f"Smallness {value:.6g} exceeds rho0 = {rho0:g}")
    return value


class ConditionReport(BaseModel):
    """Sign report of 8 rho + 7 x.grad(rho) + x.(D^2 rho x) along the radius."""

    radii: list[float]
    values: list[float]
    roots: list[float]
    negative_intervals: list[tuple[float, float]]
    holds: bool
    degenerate: bool


def _condition_function(rho: DopingProfile):
    if not rho.is_smooth:
        raise ProfileError("the dilation condition needs a smooth profile")
    smooth = smooth_component(rho)
    if smooth and not smooth.is_centered:
        raise ProfileError("the dilation condition needs a profile radial about the origin")

    def value(r):
        r = np.asarray(r, dtype=float)
        return 8.0 * smooth.radial(r) + 7.0 * smooth.radial_xgrad(r) + smooth.radial_xhess(r)

    return value


def dilation_condition(rho: DopingProfile, r_samples) -> ConditionReport:
    """Sample 8 rho + 7 x.grad(rho) + x.(D^2 rho x) > 0 and locate sign changes."""
    f = _condition_function(rho)
    radii = np.sort(np.asarray(r_samples, dtype=float))
    values = f(radii)
    degenerate = bool(np.all(values == 0.0))

    roots: list[float] = []
    signs = np.sign(values)
    for i in range(len(radii) - 1):
        if signs[i] * signs[i + 1] < 0:
            roots.append(
                optimize.brentq(f, radii[i], radii[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
            )

    edges = [float(radii[0]), *roots, float(radii[-1])]
    negative = [
        (a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a and f(0.5 * (a + b)) < 0
    ]
    return ConditionReport(
        radii=radii.tolist(),
        values=np.asarray(values, dtype=float).tolist(),
        roots=[float(r) for r in roots],
        negative_intervals=negative,
        holds=bool(np.all(values > 0.0)),
        degenerate=degenerate,
    )


def gaussian_sign_change_radii(alpha: float) -> tuple[float, float]:
    """Radii where 4e^{-a r^2}(a^2 r^4 - 4 a r^2 + 2) vanishes: roots of t^2 - 4t + 2, t = a r^2."""
    t = np.sort(np.roots([1.0, -4.0, 2.0]).real)
    r = np.sqrt(t / alpha)
    return float(r[0]), float(r[1])


def power_law_sign_change_radii(alpha: float) -> list[float]:
    """Positive radii where (a-2)(a-4)s^2 - (a-2)(a+8)s + 8 vanishes, s = r^a."""
    coefficients = [(alpha - 2.0) * (alpha - 4.0), -(alpha - 2.0) * (alpha + 8.0), 8.0]
    s = np.roots(np.trim_zeros(coefficients, "f"))
    s = np.sort(s[np.isreal(s)].real)
    return [float(v ** (1.0 / alpha)) for v in s if v > 0]
