"""Fibering maps along the L2-invariant scaling u^lam(x) = lam^{3/2} u(lam x).

A, B, C and D scale in closed form; the doping terms are re-evaluated from
the pairings of S0(u) with the rescaled profile at every lam.
"""

import logging
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from app import settings
from app.field import Field3, ScaleSpec, grad_norm_sq, norm_l2sq, norm_lp, scale_field
from app.profiles import DopingProfile, smallness
from app.shared.consts import DEFAULT_DELTA_STAR, FD_STEP, LAMBDA_MAX
from app.shared.enums import EnergyForm
from app.shared.exceptions import ConvergenceError, ProjectionError
from app.shared.utils import parallel_map

from .context import PairingContext, Pairings, energy_form
from .domains import ball_surface_terms
from .models import (
    EnergyInequalityReport,
    FiberingCurve,
    FiberingPoint,
    InequalityPoint,
    NehariProjection,
    Params,
    ReferenceRootReport,
)

logger = logging.getLogger(__name__)

REMAINDER_AGREEMENT = 1e-6
NEHARI_TOLERANCE = 1e-10
LAMBDA_FLOOR = 1e-3


def g_poly(p: float, lam: float | np.ndarray) -> float | np.ndarray:
    """g(lam) = 4 lam^{3(p-1)/2} - 3(p-1) lam^2 + 3p - 7."""
    return 4.0 * lam ** (1.5 * (p - 1.0)) - 3.0 * (p - 1.0) * lam**2 + 3.0 * p - 7.0


def tau(p: float) -> float:
    """tau in (0, 1) with (1 - tau)^{(3p-7)/2} = 3(p-1) / (2(3p-5))."""
    return 1.0 - (3.0 * (p - 1.0) / (2.0 * (3.0 * p - 5.0))) ** (2.0 / (3.0 * p - 7.0))


def descent_constant(p: float, delta_star: float = DEFAULT_DELTA_STAR) -> float:
    """C1 = min{(3/4)(p-1)(3p-7), g(1-tau)/(1-delta*)^2} / (4(p+1))."""
    near_one = 0.75 * (p - 1.0) * (3.0 * p - 7.0)
    far = g_poly(p, 1.0 - tau(p)) / (1.0 - delta_star) ** 2
    return min(near_one, far) / (4.0 * (p + 1.0))


def mass_bound_constant(params: Params) -> float:
    """C0 = 4(2p-1) / ((p+1) min{3, omega}); ||u||^2 <= C0 ||u||_{p+1}^{p+1} when J(u) <= 0."""
    p = params.p
    return 4.0 * (2.0 * p - 1.0) / ((p + 1.0) * min(3.0, params.omega))


class FiberingMap:
    """I, Q, J and f along lam -> u^lam for one field, with shared S0(u)."""

    def __init__(
        self,
        u: Field3,
        params: Params,
        rho: DopingProfile,
        context: PairingContext | None = None,
        fd_step: float = FD_STEP,
    ):
        self.u = u
        self.params = params
        self.rho = rho
        self.context = context if context is not None else PairingContext(u, rho)
        self.fd_step = fd_step
        self.A = grad_norm_sq(u)
        self.B = norm_l2sq(u)
        self.C = norm_lp(u, params.p + 1, power=True)
        # ||u||^2 = ||grad u||_2^2 + ||u||_2^2
        self.H1 = self.A + self.B
        self.D = self.context.D
        self.at_one = self.context.evaluate(1.0)
        self.Q_one = self.G_from(1.0, self.at_one)

    # closed forms
    def F_from(self, lam: float, pairs: Pairings) -> float:
        prm, e2 = self.params, self.params.e**2
        return (
            0.5 * lam**2 * self.A
            + 0.5 * prm.omega * self.B
            - lam**prm.fibering_power * self.C / (prm.p + 1)
            + e2 * lam * self.D
            + 2 * e2 * pairs.E1
        )

    def G_from(self, lam: float, pairs: Pairings) -> float:
        prm, e2 = self.params, self.params.e**2
        return (
            lam**2 * self.A
            - 1.5 * (prm.p - 1) / (prm.p + 1) * lam**prm.fibering_power * self.C
            + e2 * lam * self.D
            - 4 * e2 * pairs.E1
            + e2 * pairs.E2
        )

    def J_from(self, lam: float, pairs: Pairings) -> float:
        prm, e2 = self.params, self.params.e**2
        return (
            1.5 * lam**2 * self.A
            + 0.5 * prm.omega * self.B
            - (2 * prm.p - 1) / (prm.p + 1) * lam**prm.fibering_power * self.C
            + 3 * e2 * lam * self.D
            - 2 * e2 * pairs.E1
            + e2 * pairs.E2
        )

    def pairings(self, lam: float, form: EnergyForm | None = None, second: bool = False) -> Pairings:
        if lam == 1.0 and form in (None, EnergyForm.RESCALED_PROFILE):
            return self.at_one
        return self.context.evaluate(lam, second=second, form=form)

    def J(self, lam: float) -> float:
        return self.J_from(lam, self.pairings(lam))

    def F(self, lam: float) -> float:
        return self.F_from(lam, self.pairings(lam))

    def G(self, lam: float) -> float:
        return self.G_from(lam, self.pairings(lam))

    def f(self, lam: float) -> float:
        """f(lam) = I(u^lam) - (lam^2 / 2) Q(u)."""
        return self.F(lam) - 0.5 * lam**2 * self.Q_one

    def d2F_analytic(self, lam: float, pairs: Pairings) -> float:
        prm, e2 = self.params, self.params.e**2
        p = prm.p
        local = self.A - 3 * (p - 1) * (3 * p - 5) / (4 * (p + 1)) * lam ** ((3 * p - 7) / 2) * self.C
        return local + e2 / lam**2 * (12 * pairs.E1 - 6 * pairs.E2 - pairs.E3)

    def uniqueness_remainder(self, lam: float, pairs: Pairings) -> float:
        """e^2 int S0 [lam^-2 (rho + x.grad rho / 2)(x/lam) - lam^2 (rho + x.grad rho / 2)]."""
        one = self.at_one
        e2 = self.params.e**2
        return e2 * ((pairs.k + 0.5 * pairs.m) / lam**2 - lam**2 * (one.k + 0.5 * one.m))

    def point(self, lam: float) -> FiberingPoint:
        """Curve values at lam with 4th-order centred differences in the form of lam."""
        form = energy_form(lam)
        s = self.fd_step * min(1.0, lam)
        centre = self.context.evaluate(lam, second=True, form=form)
        offsets = (-2, -1, 1, 2)
        stencil = {j: self.pairings(lam + j * s, form=form) for j in offsets}
        stencil[0] = centre
        F = {j: self.F_from(lam + j * s, pr) for j, pr in stencil.items()}
        G = {j: self.G_from(lam + j * s, pr) for j, pr in stencil.items()}

        def first(v):
            return (v[-2] - 8 * v[-1] + 8 * v[1] - v[2]) / (12 * s)

        def second(v):
            return (-v[-2] + 16 * v[-1] - 30 * v[0] + 16 * v[1] - v[2]) / (12 * s**2)

        return FiberingPoint(
            lam=lam,
            J=self.J_from(lam, centre),
            f=F[0] - 0.5 * lam**2 * self.Q_one,
            F=F[0],
            G=G[0],
            dF=first(F),
            d2F=second(F),
            dG=first(G),
            d2F_analytic=self.d2F_analytic(lam, centre),
            uniqueness_remainder=self.uniqueness_remainder(lam, centre),
            overflow=any(pr.overflow for pr in stencil.values()),
        )

    def remainder(self, lam: float) -> float:
        """R(lam, u) = 2e^2 E1(u^lam) + 2e^2 (lam^2 - 2) E1(u) - (e^2/2)(lam^2 - 1) E2(u).

        Cross-checked against -(e^2/4) int S0(u) M(lam, x) with
        M = 2 lam^-2 rho(x/lam) + 2(lam^2 - 2) rho + (lam^2 - 1) x.grad rho.
        """
        e2 = self.params.e**2
        if e2 == 0.0 or not self.context.has_doping:
            return 0.0
        one = self.at_one
        pairs = self.pairings(lam)
        combined = 2 * e2 * pairs.E1 + 2 * e2 * (lam**2 - 2) * one.E1 - 0.5 * e2 * (lam**2 - 1) * one.E2
        integral = -0.25 * e2 * self._m_integral(lam)
        floor = 1e-12 * e2 * (abs(one.k) + abs(one.m))
        if abs(combined - integral) > REMAINDER_AGREEMENT * max(abs(combined), abs(integral)) + floor:
            raise ConvergenceError(
                f"Remainder forms disagree at lam={lam:g}: {combined:.12g} vs {integral:.12g}"
            )
        return combined

    def _m_integral(self, lam: float) -> float:
        """int S0(u) M(lam, x) dx assembled term by term."""
        ctx = self.context
        total = 0.0
        if ctx.smooth:
            X, Y, Z = ctx.grid.coords()
            s0 = ctx.s0.values
            fixed = 2 * (lam**2 - 2) * ctx.smooth.eval(X, Y, Z) + (lam**2 - 1) * ctx.smooth.eval_xgrad(X, Y, Z)
            if energy_form(lam) is EnergyForm.RESCALED_PROFILE:
                M = 2 / lam**2 * ctx.smooth.eval(X / lam, Y / lam, Z / lam) + fixed
                total += ctx.grid.cell_volume * float(np.sum(s0 * M))
            else:
                pulled = ctx.sampler(lam * X, lam * Y, lam * Z)
                first = 2 * lam * ctx.grid.cell_volume * float(np.sum(pulled * ctx.smooth.eval(X, Y, Z)))
                total += first + ctx.grid.cell_volume * float(np.sum(s0 * fixed))
        if ctx.balls:
            for ball in ctx.balls:
                at_lam = ball_surface_terms(ctx, ball, lam, second=False)
                at_one = ball_surface_terms(ctx, ball, 1.0, second=False)
                total += ball.sigma * (
                    2 / lam**2 * at_lam.omega
                    + 2 * (lam**2 - 2) * at_one.omega
                    - (lam**2 - 1) * at_one.d_omega
                )
        return total


def fibering(
    u: Field3,
    params: Params,
    rho: DopingProfile,
    lambdas: Sequence[float],
    context: PairingContext | None = None,
) -> FiberingCurve:
    """J(u^lam), f, F = I(u^lam), G = Q(u^lam) and derivative estimates on a lam sweep."""
    lambdas = [float(lam) for lam in lambdas]
    fmap = FiberingMap(u, params, rho, context=context)
    points = parallel_map(fmap.point, lambdas, settings.SPOISON_THREADS)
    curve = FiberingCurve.from_points(points)
    if curve.overflow:
        logger.warning("Fibering sweep leaves the box for some lam")
    return curve


def remainder(u: Field3, params: Params, rho: DopingProfile, lam: float) -> float:
    return FiberingMap(u, params, rho).remainder(lam)


def fit_remainder_constant(
    fields: Iterable[Field3],
    params: Params,
    rho: DopingProfile,
    lambdas: Sequence[float],
    safety: float = 2.0,
) -> float:
    """C2 as an envelope: safety * max R / ((1 - lam)^2 smallness ||u||^2) over the family."""
    small = smallness(rho, params.e)
    if small == 0.0:
        return 0.0
    worst = 0.0
    for u in fields:
        fmap = FiberingMap(u, params, rho)
        for lam in lambdas:
            gap = (1.0 - lam) ** 2
            if gap < 1e-12:
                continue
            worst = max(worst, fmap.remainder(lam) / (gap * small * fmap.H1))
    C2 = safety * worst
    logger.info(f"Fitted remainder constant C2 = {C2:.6g}")
    return C2


def energy_inequality_check(
    u: Field3,
    params: Params,
    rho: DopingProfile,
    lambdas: Sequence[float],
    C2: float,
    delta_star: float = DEFAULT_DELTA_STAR,
    ground_energy: float | None = None,
) -> EnergyInequalityReport:
    """f(lam) - f(1) <= -C1 (1-lam)^2 ||u||_{p+1}^{p+1} + C2 (1-lam)^2 smallness ||u||^2 on [delta*, 1].

    With ``ground_energy`` given and J(u) <= 0, also checks Q(u)/2 <= I(u) - I(u0).
    """
    fmap = FiberingMap(u, params, rho)
    p = params.p
    C1 = descent_constant(p, delta_star)
    small = smallness(rho, params.e)
    f_one = fmap.f(1.0)
    J = fmap.J_from(1.0, fmap.at_one)
    scale = fmap.A + params.omega * fmap.B + fmap.C
    points = []
    for lam in lambdas:
        gap = (1.0 - lam) ** 2
        lhs = fmap.f(lam) - f_one
        descent = -C1 * gap * fmap.C
        bound = C2 * gap * small * fmap.H1
        points.append(
            InequalityPoint(
                lam=lam,
                lhs=lhs,
                descent_term=descent,
                remainder_term=bound,
                remainder=fmap.remainder(lam),
                passed=lhs <= descent + bound + 1e-12 * scale,
            )
        )
    C0 = mass_bound_constant(params)
    ground_gap = None
    if ground_energy is not None and J <= 0:
        I = fmap.F(1.0)
        ground_gap = 0.5 * fmap.Q_one <= I - ground_energy + 1e-12 * scale
    return EnergyInequalityReport(
        C1=C1,
        C2=C2,
        tau=tau(p),
        delta_star=delta_star,
        smallness=small,
        J=J,
        points=points,
        mass_bound_C0=C0,
        mass_bound_holds=(fmap.H1 <= C0 * fmap.C) if J <= 0 else None,
        ground_gap_holds=ground_gap,
    )


def _first_root(
    J, lam_min: float, lam_hi: float, ratio: float = 1.15
) -> tuple[float, float]:
    """Smallest geometric bracket [a, b] in [lam_min, lam_hi] with J(a) > 0 >= J(b)."""
    a = lam_min
    while a < lam_hi:
        b = min(a * ratio, lam_hi)
        if J(b) <= 0:
            return a, b
        a = b
    raise ProjectionError(f"No sign change of J(u^lam) on [{lam_min:g}, {lam_hi:g}]")


def nehari_projection(
    u: Field3,
    params: Params,
    rho: DopingProfile,
    lam_min: float = 0.05,
    context: PairingContext | None = None,
    scale_order: int | str = "spectral",
) -> NehariProjection:
    """First positive root lam* of lam -> J(u^lam) and the projected field u^{lam*}."""
    if not np.any(u.values):
        raise ProjectionError("Cannot project the zero field")
    fmap = FiberingMap(u, params, rho, context=context)
    calls = 0

    def J(lam: float) -> float:
        nonlocal calls
        calls += 1
        return fmap.J(lam)

    tolerance = NEHARI_TOLERANCE * 0.5 * params.omega * fmap.B
    if abs(J(1.0)) <= tolerance:
        return NehariProjection(
            lam=1.0, J_residual=J(1.0), tolerance=tolerance, bracket=(1.0, 1.0), evaluations=calls, field=u
        )

    lam_hi = 1.0
    while J(lam_hi) > 0:
        lam_hi *= 2.0
        if lam_hi > LAMBDA_MAX:
            raise ProjectionError(f"J(u^lam) stays positive up to lam = {LAMBDA_MAX:g}")
    while J(lam_min) <= 0:
        lam_min /= 2.0
        if lam_min < LAMBDA_FLOOR:
            raise ProjectionError("J(u^lam) is not positive near lam = 0")

    a, b = _first_root(J, lam_min, lam_hi)
    if J(b) == 0.0:
        lam_star = b
    else:
        lam_star = optimize.brentq(J, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = J(lam_star)
    if abs(residual) > tolerance:
        logger.warning(f"Nehari residual {residual:.3e} above tolerance {tolerance:.3e} at lam*={lam_star:.12g}")
    projected = scale_field(u, ScaleSpec.l2_invariant(lam_star), order=scale_order)
    return NehariProjection(
        lam=lam_star,
        J_residual=residual,
        tolerance=tolerance,
        bracket=(a, b),
        evaluations=calls,
        field=projected,
    )


def reference_root_check(u: Field3, params: Params, rho: DopingProfile) -> ReferenceRootReport:
    """lam* of the coupled problem against the root lam0 of the e = 0 fibering map."""
    lam_star = nehari_projection(u, params, rho).lam
    lam_zero = nehari_projection(u, params.with_coupling(0.0), rho).lam
    return ReferenceRootReport(lam_star=lam_star, lam_zero=lam_zero, holds=lam_star >= 0.5 * lam_zero)
