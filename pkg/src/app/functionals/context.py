"""Pairings of S0(u) with the rescaled doping profile.

Every nonlocal doping term of the fibering family reduces to three
numbers at a given lam,

    k(lam) = int S0(u)(z) rho(z/lam) dz
    m(lam) = int S0(u)(z) (x.grad rho)(z/lam) dz
    h(lam) = int S0(u)(z) (x.D^2 rho x)(z/lam) dz

so that E1(u^lam) = -k/(4 lam^2), E2(u^lam) = m/(2 lam^2) and
E3(u^lam) = h/(2 lam^2). Ball components are routed through the
surface terms Omega(lam), Omega'(lam), Omega''(lam).
"""

import logging
from functools import cached_property

from pydantic import BaseModel

from app.field import Field3, SplineSampler, gradient, integrate
from app.poisson import convolve_array, pair_energy, pair_potential
from app.profiles import DopingProfile, smooth_component
from app.shared.consts import PULLBACK_BELOW
from app.shared.enums import EnergyForm

from .domains import ball_surface_terms

logger = logging.getLogger(__name__)


class Pairings(BaseModel):
    lam: float
    k: float
    m: float
    h: float
    overflow: bool = False

    @property
    def E1(self) -> float:
        return -0.25 * self.k / self.lam**2

    @property
    def E2(self) -> float:
        return 0.5 * self.m / self.lam**2

    @property
    def E3(self) -> float:
        return 0.5 * self.h / self.lam**2


def energy_form(lam: float) -> EnergyForm:
    """Rescaled profile while rho(x/lam) stays resolved, pulled-back S0 below."""
    return EnergyForm.RESCALED_PROFILE if lam >= PULLBACK_BELOW else EnergyForm.PULLED_BACK_POTENTIAL


class PairingContext:
    """S0(u), D(u) and lazily built samplers, shared read-only across a lam sweep."""

    def __init__(self, u: Field3, rho: DopingProfile, s0: Field3 | None = None):
        self.u = u
        self.grid = u.grid
        self.rho = rho
        self.s0 = s0 if s0 is not None else pair_potential(u)
        self.D = pair_energy(u, self.s0)
        self.smooth = smooth_component(rho)
        self.balls = rho.ball_list()

    @property
    def has_doping(self) -> bool:
        return bool(self.smooth) or bool(self.balls)

    @cached_property
    def sampler(self) -> SplineSampler:
        return SplineSampler(self.s0, order=3, mode="mirror")

    @cached_property
    def gradient_samplers(self) -> tuple[SplineSampler, SplineSampler, SplineSampler]:
        """Samplers of grad S0 = (1/(8 pi|x|)) * grad |u|^2."""
        density = Field3(grid=self.grid, values=self.u.density())
        return tuple(
            SplineSampler(Field3(grid=self.grid, values=convolve_array(self.grid, d)))
            for d in gradient(density)
        )

    def _smooth_pairings(
        self, lam: float, second: bool, form: EnergyForm
    ) -> tuple[float, float, float]:
        X, Y, Z = self.grid.coords()
        s0 = self.s0.values
        smooth = self.smooth
        if form is EnergyForm.RESCALED_PROFILE:
            Xs, Ys, Zs = X / lam, Y / lam, Z / lam
            k = integrate(self.grid, s0 * smooth.eval(Xs, Ys, Zs))
            m = integrate(self.grid, s0 * smooth.eval_xgrad(Xs, Ys, Zs))
            h = integrate(self.grid, s0 * smooth.eval_xhess(Xs, Ys, Zs)) if second else 0.0
            return k, m, h

        # z = lam y: int S0(z) g(z/lam) dz = lam^3 int S0(lam y) g(y) dy
        pulled = self.sampler(lam * X, lam * Y, lam * Z)
        jac = lam**3
        k = jac * integrate(self.grid, pulled * smooth.eval(X, Y, Z))
        m = jac * integrate(self.grid, pulled * smooth.eval_xgrad(X, Y, Z))
        h = jac * integrate(self.grid, pulled * smooth.eval_xhess(X, Y, Z)) if second else 0.0
        return k, m, h

    def pairings(
        self, lam: float, second: bool = False, form: EnergyForm | None = None
    ) -> Pairings:
        """k, m and (when ``second``) h at lam; ``form`` defaults to the one chosen for lam."""
        form = form or energy_form(lam)
        k = m = h = 0.0
        overflow = False
        if self.smooth:
            k, m, h = self._smooth_pairings(lam, second, form)
        for ball in self.balls:
            terms = ball_surface_terms(self, ball, lam, second=second)
            overflow = overflow or terms.overflow
            k += ball.sigma * terms.omega
            m -= ball.sigma * lam * terms.d_omega
            if second:
                h += ball.sigma * (2.0 * lam * terms.d_omega + lam**2 * terms.d2_omega)
        return Pairings(lam=lam, k=k, m=m, h=h, overflow=overflow)

    def zero_pairings(self, lam: float) -> Pairings:
        return Pairings(lam=lam, k=0.0, m=0.0, h=0.0)

    def evaluate(
        self, lam: float, second: bool = False, form: EnergyForm | None = None
    ) -> Pairings:
        if not self.has_doping:
            return self.zero_pairings(lam)
        return self.pairings(lam, second=second, form=form)
