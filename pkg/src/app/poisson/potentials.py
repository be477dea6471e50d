import logging
from functools import lru_cache

import numpy as np

from app.field import Field3, Grid, gradient, integrate
from app.profiles import (
    DopingProfile,
    ball_layer_potential,
    ball_potential,
    ball_potential_xgrad,
    balls_self_energy,
    smooth_component,
)
from app.shared.enums import OriginWeight
from app.shared.exceptions import FieldError, GridError

from .cache import PotentialCache
from .kernel import coulomb_kernel
from .models import DopingPotentials, PotentialSet, S1DecayReport

logger = logging.getLogger(__name__)


def coulomb_convolve(f: Field3, origin: OriginWeight = OriginWeight.LATTICE) -> Field3:
    """(1/(8 pi |x|)) * f as a free-space convolution."""
    values = f.values
    if not f.is_real:
        scale = max(float(np.max(np.abs(values.real), initial=0.0)), 1e-300)
        if np.max(np.abs(values.imag), initial=0.0) > 1e-12 * scale:
            raise FieldError("coulomb_convolve needs a real field")
        values = values.real
    return Field3(grid=f.grid, values=coulomb_kernel(f.grid, origin).convolve(values))


def convolve_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    return coulomb_kernel(grid).convolve(values)


def pair_potential(u: Field3) -> Field3:
    """S0(u) = (1/(8 pi |x|)) * |u|^2."""
    return Field3(grid=u.grid, values=convolve_array(u.grid, u.density()))


def _build_doping_potentials(grid: Grid, rho: DopingProfile) -> DopingPotentials:
    X, Y, Z = grid.coords()
    smooth = smooth_component(rho)
    balls = rho.ball_list()

    s1 = np.zeros(grid.shape)
    s2 = np.zeros(grid.shape)
    s3 = np.zeros(grid.shape) if not balls else None
    if smooth:
        s1 -= convolve_array(grid, smooth.eval(X, Y, Z))
        s2 += convolve_array(grid, smooth.eval_xgrad(X, Y, Z))
        if s3 is not None:
            s3 += convolve_array(grid, smooth.eval_xhess(X, Y, Z))
    for ball in balls:
        s1 -= 0.5 * ball_potential(ball, X, Y, Z)
        s2 += 0.5 * ball_layer_potential(ball, X, Y, Z)

    return DopingPotentials(
        s1=Field3(grid=grid, values=s1),
        s2=Field3(grid=grid, values=s2),
        s3=None if s3 is None else Field3(grid=grid, values=s3),
    )


potential_cache = PotentialCache(_build_doping_potentials)


def doping_potentials(grid: Grid, rho: DopingProfile) -> DopingPotentials:
    return potential_cache.add(grid, rho)


def potentials(u: Field3, rho: DopingProfile) -> PotentialSet:
    doping = doping_potentials(u.grid, rho)
    return PotentialSet(s0=pair_potential(u), s1=doping.s1, s2=doping.s2, s3=doping.s3)


def pair_energy(u: Field3, s0: Field3 | None = None) -> float:
    """D(u) = (1/4) int S0(u) |u|^2."""
    if s0 is None:
        s0 = pair_potential(u)
    elif s0.grid != u.grid:
        raise GridError(f"S0 lives on {s0.grid}, u on {u.grid}")
    return 0.25 * integrate(u.grid, s0.values * u.density())


@lru_cache(maxsize=16)
def doping_self_energy(grid: Grid, rho: DopingProfile) -> float:
    """F = -(1/4) int S1 rho.

    Smooth-smooth and smooth-ball terms are grid sums with the cached S1;
    ball-ball terms are exact.
    """
    X, Y, Z = grid.coords()
    smooth = smooth_component(rho)
    balls = rho.ball_list()
    total = balls_self_energy(balls) if balls else 0.0
    if smooth:
        rho_s = smooth.eval(X, Y, Z)
        s1_smooth = -convolve_array(grid, rho_s)
        total += -0.25 * integrate(grid, s1_smooth * rho_s)
        for ball in balls:
            # cross term counted twice by symmetry
            total += 2.0 * 0.25 * 0.5 * integrate(grid, ball_potential(ball, X, Y, Z) * rho_s)
    return total


def doping_mass_at_boundary(grid: Grid, rho: DopingProfile) -> float:
    """Fraction of the sampled profile mass in the outer 10% shell of the box."""
    X, Y, Z = grid.coords()
    values = np.abs(rho.eval(X, Y, Z))
    total = values.sum()
    if total == 0.0:
        return 0.0
    sup = np.maximum(np.maximum(np.abs(X), np.abs(Y)), np.abs(Z))
    return float(values[sup >= 0.9 * grid.box_half_width].sum() / total)


def x_dot_grad_pair_potential(u: Field3) -> np.ndarray:
    """x . grad S0(u) = sum_j x_j (1/(8pi|x|)) * d_j |u|^2."""
    X, Y, Z = u.grid.coords()
    density = Field3(grid=u.grid, values=u.density())
    parts = gradient(density)
    return sum(x * convolve_array(u.grid, d) for x, d in zip((X, Y, Z), parts))


def x_dot_grad_doping_potential(grid: Grid, rho: DopingProfile) -> np.ndarray:
    """x . grad S1, spectral for the smooth part and exact for balls."""
    X, Y, Z = grid.coords()
    out = np.zeros(grid.shape)
    smooth = smooth_component(rho)
    if smooth:
        parts = gradient(Field3(grid=grid, values=smooth.eval(X, Y, Z)))
        out -= sum(x * convolve_array(grid, d) for x, d in zip((X, Y, Z), parts))
    for ball in rho.ball_list():
        out -= 0.5 * ball_potential_xgrad(ball, X, Y, Z)
    return out


def pair_virial_residual(u: Field3) -> float:
    """Relative residual of int x.grad S0 |u|^2 = -(1/2) int S0 |u|^2."""
    s0 = pair_potential(u)
    lhs = integrate(u.grid, x_dot_grad_pair_potential(u) * u.density())
    rhs = -0.5 * integrate(u.grid, s0.values * u.density())
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def doping_virial_residual(u: Field3, rho: DopingProfile) -> float:
    """Relative residual of int x.grad S1 |u|^2 = 2 int S1 |u|^2 - int S2 |u|^2."""
    doping = doping_potentials(u.grid, rho)
    density = u.density()
    lhs = integrate(u.grid, x_dot_grad_doping_potential(u.grid, rho) * density)
    rhs = integrate(u.grid, (2.0 * doping.s1.values - doping.s2.values) * density)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def _shell_maxima(grid: Grid, s1: np.ndarray, n_shells: int):
    L = grid.box_half_width
    r = grid.radius()
    edges = np.linspace(0.0, L, n_shells + 1)
    maxima = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (r >= lo) & (r < hi)
        maxima.append(float(np.max(np.abs(s1[mask]), initial=0.0)))
    outer = float(np.max(np.abs(s1[(r >= 0.9 * L) & (r < L)]), initial=0.0))
    return edges, maxima, outer


def s1_decay_check(
    rho: DopingProfile, grid: Grid, n_shells: int = 8, compare_doubled: bool = True
) -> S1DecayReport:
    """Sample |S1| on radial shells; optionally repeat on a box of twice the size."""
    s1 = doping_potentials(grid, rho).s1.values
    edges, maxima, outer = _shell_maxima(grid, s1, n_shells)
    report = S1DecayReport(
        shell_edges=edges.tolist(),
        shell_max=maxima,
        inner_max=maxima[0],
        outer_max=outer,
        outer_below_inner=outer < maxima[0] or maxima[0] == 0.0,
    )
    if compare_doubled:
        big = Grid(n=grid.n, box_half_width=2.0 * grid.box_half_width)
        _, _, big_outer = _shell_maxima(big, doping_potentials(big, rho).s1.values, n_shells)
        report.doubled_outer_max = big_outer
        report.doubling_ratio = big_outer / outer if outer > 0.0 else None
    return report
