"""Ground states as minimizers of I on the Nehari-Pohozaev set {J = 0}.

Each iteration takes a (omega - Lap)^{-1}-preconditioned descent step on
I, removes the component along the preconditioned J', and retracts onto
{J = 0} by the L2-invariant scaling. Steps are accepted by backtracking
under the Armijo rule, so I never increases along the iterates.
"""

import logging

import numpy as np

from app.field import Field3, Grid, helmholtz_inverse, integrate, random_mixture
from app.functionals import (
    Params,
    action_gradient,
    constraint_gradient,
    nehari_projection,
    report,
    stationarity_residual,
)
from app.poisson import pair_potential
from app.profiles import DopingProfile
from app.shared.decorators import log_duration
from app.shared.exceptions import ConvergenceError, ProjectionError

from .models import GroundStateResult, MinimizerOptions
from .soliton import nls_soliton
from .utils import decay_fit

logger = logging.getLogger(__name__)

NOISE_FLOOR_FACTOR = 1e3


def _inner(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return integrate(grid, np.real(a * np.conj(b)))


def _nonnegative(values: np.ndarray, grid: Grid) -> Field3:
    return Field3(grid=grid, values=np.abs(values))


def _project(v: Field3, params: Params, rho: DopingProfile, opts: MinimizerOptions) -> Field3:
    projection = nehari_projection(v, params, rho, lam_min=opts.lam_min)
    return _nonnegative(projection.field.values, v.grid)


def minimize_on_manifold(
    seed: Field3,
    params: Params,
    rho: DopingProfile,
    opts: MinimizerOptions | None = None,
) -> GroundStateResult:
    """Minimize I over {J = 0} starting from |seed|."""
    opts = opts or MinimizerOptions()
    grid = seed.grid
    omega = params.omega

    w = _project(_nonnegative(seed.values, grid), params, rho, opts)
    phi = report(w, params, rho).I
    history = [phi]
    step = 1.0
    decrease = np.inf
    grad_norm = np.inf
    converged = False
    iteration = 0

    for iteration in range(1, opts.max_iters + 1):
        s0 = pair_potential(w)
        g = np.real(action_gradient(w, params, rho, s0))
        jg = np.real(constraint_gradient(w, params, rho, s0))
        d = helmholtz_inverse(Field3(grid=grid, values=g), omega)
        kj = helmholtz_inverse(Field3(grid=grid, values=jg), omega)
        d = d - _inner(grid, jg, d) / _inner(grid, jg, kj) * kj
        slope = _inner(grid, g, d)
        grad_norm = float(np.sqrt(max(slope, 0.0)))

        if grad_norm < opts.grad_tol and decrease < opts.decrease_tol:
            converged = True
            break

        trial_step = min(1.0, 2.0 * step)
        accepted = None
        for _ in range(opts.max_halvings):
            try:
                candidate = _project(
                    _nonnegative(w.values - trial_step * d, grid), params, rho, opts
                )
            except ProjectionError as e:
                logger.debug(f"Projection failed at step {trial_step:g}: {e}")
                trial_step *= 0.5
                continue
            phi_new = report(candidate, params, rho).I
            if phi_new <= phi - opts.armijo * trial_step * slope:
                accepted = (candidate, phi_new)
                break
            trial_step *= 0.5

        if accepted is None:
            if grad_norm < NOISE_FLOOR_FACTOR * opts.grad_tol:
                logger.info(f"Line search stalled at the noise floor, |grad| = {grad_norm:.3e}")
                converged = True
            else:
                logger.warning(f"Line search failed at iteration {iteration}, |grad| = {grad_norm:.3e}")
            break

        w, phi_new = accepted
        decrease = phi - phi_new
        phi = phi_new
        step = trial_step
        history.append(phi)
        if iteration % 10 == 0:
            logger.info(f"[iter {iteration}] I = {phi:.12g}, |grad| = {grad_norm:.3e}, step = {step:g}")

    if not converged:
        logger.warning(f"Minimizer stopped after {iteration} iterations, |grad| = {grad_norm:.3e}")

    final = report(w, params, rho)
    return GroundStateResult(
        u0=w,
        report=final,
        residual=stationarity_residual(w, params, rho),
        sigma=final.I,
        decay_rate=decay_fit(w, omega),
        iterations=iteration,
        converged=converged,
        grad_norm=grad_norm,
        history=history,
    )


def _perturbed_seeds(u0: Field3, count: int, seed: int) -> list[Field3]:
    rng = np.random.default_rng(seed)
    peak = float(np.max(np.abs(u0.values)))
    seeds = []
    for _ in range(count):
        bump = random_mixture(rng, n_terms=2, spread=1.0, complex_amplitudes=False)
        X, Y, Z = u0.grid.coords()
        noise = bump(X, Y, Z)
        noise *= 0.05 * peak / max(float(np.max(np.abs(noise))), 1e-300)
        phase = np.exp(2j * np.pi * rng.uniform())
        seeds.append(Field3(grid=u0.grid, values=phase * (u0.values + noise)))
    return seeds


def _modulus_gap(u: Field3, modulus: np.ndarray) -> float:
    return float(np.max(np.abs(np.abs(u.values) - modulus)))


@log_duration("groundstate")
def solve_ground_state(
    params: Params,
    rho: DopingProfile,
    grid: Grid,
    opts: MinimizerOptions | None = None,
    seed: int = 0,
) -> GroundStateResult:
    """Ground state by continuation in e from the e = 0 soliton."""
    opts = opts or MinimizerOptions()
    params.require_functional_range()
    start = nls_soliton(params.omega, params.p, grid)
    if params.e == 0.0 or rho.is_zero:
        result = minimize_on_manifold(start, params, rho, opts)
    else:
        result = minimize_on_manifold(start, params.with_coupling(0.0), rho, opts)
        for e in np.linspace(0.0, params.e, opts.continuation_steps + 1)[1:]:
            logger.info(f"Continuation step e = {e:.6g}")
            result = minimize_on_manifold(result.u0, params.with_coupling(float(e)), rho, opts)
    if not result.converged:
        raise ConvergenceError(
            f"Ground state did not converge in {opts.max_iters} iterations (|grad| = {result.grad_norm:.3e})"
        )

    if opts.seeds:
        modulus = np.abs(result.u0.values)
        restarts = [minimize_on_manifold(v, params, rho, opts) for v in _perturbed_seeds(result.u0, opts.seeds, seed)]
        phase = np.exp(2j * np.pi * np.random.default_rng(seed).uniform())
        restarted = minimize_on_manifold(result.u0, params, rho, opts)
        rotated = minimize_on_manifold(Field3(grid=grid, values=phase * result.u0.values), params, rho, opts)
        result = result.model_copy(
            update={
                "seed_sigmas": [r.sigma for r in restarts],
                "seed_modulus_gaps": [_modulus_gap(r.u0, modulus) for r in restarts],
                "gauge_gap": _modulus_gap(rotated.u0, np.abs(restarted.u0.values)),
            }
        )
        logger.info(
            f"Multi-seed spread of sigma: {result.seed_spread:.3e}, of |u0|: {result.seed_modulus_spread:.3e}, "
            f"gauge gap {result.gauge_gap:.3e}"
        )
    return result
