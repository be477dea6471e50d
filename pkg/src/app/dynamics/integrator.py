"""Strang splitting for i psi_t + Lap psi - e^2 S(psi) psi + |psi|^{p-1} psi = 0.

A step is half a potential phase, a full kinetic step in Fourier space and
half a potential phase. The potential substep is exact because |psi|, and
hence S0(psi), does not change during it; S0 of the end state is reused
as the start of the next step.
"""

import logging
from typing import Callable, Sequence

import numpy as np

from app.field import (
    Field3,
    dealias_mask,
    grad_norm_sq,
    integrate,
    norm_l2sq,
    norm_lp,
    spectral_tail,
    x_dot_grad,
)
from app.field.spectral import fftn, ifftn
from app.functionals import Params, build_report, volume_report
from app.poisson import doping_potentials, pair_energy, pair_potential
from app.profiles import DopingProfile
from app.shared.enums import StopReason
from app.shared.exceptions import InstabilityError

from .models import EvolutionState, EvolutionTrace, EvolveOptions, TraceRecord

logger = logging.getLogger(__name__)

Monitor = Callable[[TraceRecord], None]


def initial_state(psi0: Field3, rho: DopingProfile, opts: EvolveOptions) -> EvolutionState:
    s1 = doping_potentials(psi0.grid, rho).s1
    psi = Field3(grid=psi0.grid, values=psi0.values.astype(np.complex128))
    return EvolutionState(psi=psi, t=0.0, dt=opts.dt, s1_cache=s1)


def _potential(psi: np.ndarray, s0: Field3 | None, s1: np.ndarray, params: Params) -> np.ndarray:
    V = -np.abs(psi) ** (params.p - 1)
    if params.e > 0.0:
        V = V + params.e**2 * (s0.values + s1)
    return V


def _pair_potential(psi: Field3, params: Params, opts: EvolveOptions) -> Field3 | None:
    if opts.linear or params.e == 0.0:
        return None
    return pair_potential(psi)


def step(
    state: EvolutionState,
    params: Params,
    rho: DopingProfile,
    opts: EvolveOptions | None = None,
    dt: float | None = None,
) -> EvolutionState:
    """One Strang step of size ``dt`` (default ``state.dt``)."""
    opts = opts or EvolveOptions()
    dt = state.dt if dt is None else dt
    grid = state.psi.grid
    psi = state.psi.values
    s1 = state.s1_cache.values

    if not opts.linear:
        s0 = state.s0 if state.s0 is not None else _pair_potential(state.psi, params, opts)
        psi = psi * np.exp(-0.5j * dt * _potential(psi, s0, s1, params))

    psi_hat = fftn(psi) * np.exp(-1j * dt * grid.k_squared())
    if opts.dealias:
        psi_hat = psi_hat * dealias_mask(state.psi)
    psi = ifftn(psi_hat)

    s0_new = None
    if not opts.linear:
        if not np.all(np.isfinite(psi)):
            raise InstabilityError(f"Non-finite field at t = {state.t + dt:g}")
        s0_new = _pair_potential(Field3(grid=grid, values=psi), params, opts)
        psi = psi * np.exp(-0.5j * dt * _potential(psi, s0_new, s1, params))

    if not np.all(np.isfinite(psi)):
        raise InstabilityError(f"Non-finite field at t = {state.t + dt:g}")
    return state.model_copy(
        update={"psi": Field3(grid=grid, values=psi), "t": state.t + dt, "s0": s0_new}
    )


def _energy(state: EvolutionState, params: Params, opts: EvolveOptions) -> tuple[float, float]:
    """(E, size) with E = A/2 - C/(p+1) + e^2 D + 2 e^2 E1 and size the sum of term magnitudes."""
    psi = state.psi
    A = grad_norm_sq(psi)
    if opts.linear:
        return 0.5 * A, 0.5 * A
    C = norm_lp(psi, params.p + 1, power=True) / (params.p + 1)
    e2 = params.e**2
    D = E1 = 0.0
    if e2 > 0.0:
        s0 = state.s0 if state.s0 is not None else pair_potential(psi)
        D = pair_energy(psi, s0)
        E1 = 0.25 * integrate(psi.grid, state.s1_cache.values * psi.density())
    energy = 0.5 * A - C + e2 * D + 2 * e2 * E1
    return energy, 0.5 * A + C + e2 * D + 2 * e2 * abs(E1)


def variance(psi: Field3) -> float:
    """V = int |x|^2 |psi|^2 in box coordinates."""
    return integrate(psi.grid, psi.grid.radius() ** 2 * psi.density())


def variance_velocity(psi: Field3) -> float:
    """V' = 4 Im int (x.grad psi) conj(psi)."""
    return 4.0 * integrate(psi.grid, np.imag(x_dot_grad(psi) * np.conj(psi.values)))


def _boundary_mass(psi: Field3) -> float:
    grid = psi.grid
    X, Y, Z = grid.coords()
    sup = np.maximum(np.maximum(np.abs(X), np.abs(Y)), np.abs(Z))
    density = psi.density()
    total = density.sum()
    return float(density[sup >= 0.9 * grid.box_half_width].sum() / total) if total > 0 else 0.0


def sample(
    state: EvolutionState,
    params: Params,
    rho: DopingProfile,
    opts: EvolveOptions,
    ground_energy: float | None = None,
    energy: float | None = None,
) -> TraceRecord:
    psi = state.psi
    if opts.linear:
        A, B = grad_norm_sq(psi), norm_l2sq(psi)
        rep = build_report(params.with_coupling(0.0), A=A, B=B, C=0.0, D=0.0, E1=0.0, E2=0.0, E3=0.0, F_const=0.0)
    else:
        s0 = state.s0 if state.s0 is not None else pair_potential(psi)
        rep = volume_report(psi, params, rho, s0=s0)
    if energy is None:
        energy, _ = _energy(state, params, opts)

    V = variance(psi) if _boundary_mass(psi) <= opts.boundary_mass_limit else None
    Vp = variance_velocity(psi)

    in_B = None
    if ground_energy is not None:
        band = opts.membership_band * (rep.A + params.omega * rep.B)
        in_B = bool(rep.I < ground_energy + band and rep.J < band and rep.Q < band)
    return TraceRecord(
        t=state.t,
        mass=rep.B,
        energy=energy,
        V=V,
        Vp=Vp,
        Q=rep.Q,
        J=rep.J,
        I=rep.I,
        gradnorm=float(np.sqrt(rep.A)),
        tail=spectral_tail(psi),
        in_B=in_B,
        dt=state.dt,
    )


def evolve(
    psi0: Field3,
    params: Params,
    rho: DopingProfile,
    t_end: float,
    opts: EvolveOptions | None = None,
    ground_energy: float | None = None,
    monitors: Sequence[Monitor] = (),
) -> EvolutionTrace:
    """Integrate to ``t_end`` with samples every ``opts.sample_interval``.

    The step is halved while the per-step relative energy drift exceeds
    ``drift_tol`` and regrown towards ``opts.dt`` when the drift is far
    below it. The run stops early on a blow-up surrogate: dt under its
    floor, gradient norm above ``grad_growth`` times its initial value,
    spectral tail above ``tail_limit`` or a non-finite field.
    """
    opts = opts or EvolveOptions()
    state = initial_state(psi0, rho, opts)
    if not opts.linear:
        state = state.model_copy(update={"s0": _pair_potential(state.psi, params, opts)})
    trace = EvolutionTrace()

    energy, size = _energy(state, params, opts)
    first = sample(state, params, rho, opts, ground_energy, energy)
    trace.append(first)
    for monitor in monitors:
        monitor(first)
    grad0 = first.gradnorm

    n_samples = int(np.floor(t_end / opts.sample_interval + 1e-9))
    for k in range(1, n_samples + 1):
        target = k * opts.sample_interval
        while state.t < target - 1e-12:
            h = min(state.dt, target - state.t)
            try:
                trial = step(state, params, rho, opts, dt=h)
            except InstabilityError as e:
                return _stopped(trace, StopReason.NON_FINITE, state.t, str(e))
            trial_energy, trial_size = _energy(trial, params, opts)
            drift = abs(trial_energy - energy) / max(size, trial_size)
            if drift > opts.drift_tol and not opts.linear:
                dt = 0.5 * state.dt
                if dt < opts.dt_min:
                    return _stopped(
                        trace, StopReason.DT_FLOOR, state.t, f"dt fell below {opts.dt_min:g} (drift {drift:.2e})"
                    )
                state = state.model_copy(update={"dt": dt})
                continue
            state = trial
            energy, size = trial_energy, trial_size
            if drift < opts.drift_tol / 64 and state.dt < opts.dt:
                state = state.model_copy(update={"dt": min(2.0 * state.dt, opts.dt)})

        record = sample(state, params, rho, opts, ground_energy, energy)
        trace.append(record)
        for monitor in monitors:
            monitor(record)
        if record.gradnorm > opts.grad_growth * grad0:
            return _stopped(trace, StopReason.GRADIENT_GROWTH, state.t, "gradient norm grew past threshold")
        if record.tail > opts.tail_limit:
            return _stopped(trace, StopReason.RESOLUTION_LOST, state.t, f"spectral tail {record.tail:.2e}")

    trace.stop_time = state.t
    return trace


def _stopped(trace: EvolutionTrace, reason: StopReason, t: float, message: str) -> EvolutionTrace:
    logger.warning(f"Blow-up surrogate triggered: {reason.value} at t = {t:.6g} ({message})")
    trace.stop_reason = reason
    trace.stop_time = t
    trace.message = message
    return trace
