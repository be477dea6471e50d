import logging

import numpy as np

from app.field import Field3, ScaleSpec, grad_norm_sq, scale_field
from app.functionals import Params, volume_report
from app.profiles import DopingProfile
from app.shared.enums import StopReason
from app.shared.exceptions import InstabilityError, TraceError

from .integrator import evolve, variance, variance_velocity
from .models import EvolutionTrace, EvolveOptions, InstabilityReport, VirialReport

logger = logging.getLogger(__name__)

MIN_VIRIAL_SAMPLES = 5
WINDOW_GRAD_RATIO = 3.0


def free_variance(psi0: Field3, times) -> np.ndarray:
    """Free Schrodinger variance V(0) + V'(0) t + 4 A t^2."""
    t = np.asarray(times, dtype=float)
    return variance(psi0) + variance_velocity(psi0) * t + 4.0 * grad_norm_sq(psi0) * t**2


def _window(trace: EvolutionTrace) -> int:
    """Length of the leading run of records with a defined V and bounded gradient."""
    records = trace.records
    if not records:
        return 0
    limit = WINDOW_GRAD_RATIO * records[0].gradnorm
    for i, record in enumerate(records):
        if record.V is None or record.gradnorm > limit:
            return i
    return len(records)


def virial_check(trace: EvolutionTrace) -> VirialReport:
    """Compare centered second differences of V with 8Q and first differences with V'.

    Only the smooth window is used: the leading records whose variance is
    defined and whose gradient norm stays within a factor of three of its
    initial value.
    """
    n = _window(trace)
    if n < MIN_VIRIAL_SAMPLES:
        raise TraceError(f"virial check needs {MIN_VIRIAL_SAMPLES} samples in the smooth window, got {n}")
    records = trace.records[:n]
    t = np.array([r.t for r in records])
    steps = np.diff(t)
    dt = steps.mean()
    if np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
        raise TraceError("virial check needs uniformly sampled records")

    V = np.array([r.V for r in records])
    Vp = np.array([r.Vp for r in records])
    Q8 = 8.0 * np.array([r.Q for r in records])

    d2V = (V[2:] - 2.0 * V[1:-1] + V[:-2]) / dt**2
    residual = np.abs(d2V - Q8[1:-1])
    scale = max(float(np.max(np.abs(Q8))), np.finfo(float).tiny)

    dV = (V[2:] - V[:-2]) / (2.0 * dt)
    velocity_residual = np.abs(dV - Vp[1:-1])
    velocity_scale = max(float(np.max(np.abs(Vp))), float(np.max(np.abs(dV))), np.finfo(float).tiny)

    report = VirialReport(
        samples=n,
        window_end=float(t[-1]),
        max_abs_residual=float(residual.max()),
        max_rel_residual=float(residual.max() / scale),
        max_rel_velocity_residual=float(velocity_residual.max() / velocity_scale),
    )
    logger.info(
        f"[virial] {n} samples to t = {report.window_end:.4g}: "
        f"|V'' - 8Q| max {report.max_abs_residual:.3e} (rel {report.max_rel_residual:.3e})"
    )
    return report


def _gradient_monotone(trace: EvolutionTrace) -> bool:
    grad = trace.column("gradnorm")
    return bool(np.all(np.diff(grad) >= -1e-9 * grad[:-1]))


def instability_experiment(
    u0: Field3,
    params: Params,
    rho: DopingProfile,
    lam: float,
    t_end: float,
    opts: EvolveOptions | None = None,
) -> tuple[InstabilityReport, EvolutionTrace]:
    """Evolve u0^lam and test the blow-up mechanism along the trajectory.

    Checks that 8Q(psi(t)) <= 16 (I(u0^lam) - I(u0)) at every sample, that
    membership in {I < I(u0), J < 0, Q < 0} persists and that the gradient
    norm grows monotonically until the run stops.
    """
    params.require_supercritical()
    if lam < 1.0:
        raise InstabilityError(f"lam must be >= 1, got {lam}")
    opts = opts or EvolveOptions()
    I_ground = volume_report(u0, params, rho).I

    psi0 = scale_field(u0, ScaleSpec.l2_invariant(lam), order="spectral")
    initial = volume_report(psi0, params, rho)
    band = opts.membership_band * (initial.A + params.omega * initial.B)
    initial_in_B = bool(initial.I < I_ground + band and initial.J < band and initial.Q < band)
    if lam > 1.0 and not initial_in_B:
        raise InstabilityError(
            f"u0^{lam:g} is not in the invariant set: I - I(u0) = {initial.I - I_ground:.3e}, "
            f"J = {initial.J:.3e}, Q = {initial.Q:.3e}"
        )

    logger.info(f"[evolve] lam = {lam:g}, I(u0) = {I_ground:.8g}, I(u0^lam) = {initial.I:.8g}")
    trace = evolve(psi0, params, rho, t_end, opts, ground_energy=I_ground)

    bound = 16.0 * (initial.I - I_ground)
    bound_holds = all(8.0 * r.Q <= bound + 8.0 * band for r in trace.records)
    membership = [r.in_B for r in trace.records]
    report = InstabilityReport(
        lam=lam,
        I_ground=I_ground,
        I_initial=initial.I,
        Q_initial=initial.Q,
        J_initial=initial.J,
        initial_in_B=initial_in_B,
        bound=bound,
        bound_holds=bound_holds,
        membership_persists=bool(all(membership)),
        gradient_monotone=_gradient_monotone(trace),
        stop_reason=trace.stop_reason,
        stop_time=trace.stop_time,
        blowup_triggered=trace.stop_reason is not StopReason.COMPLETED,
    )
    if report.blowup_triggered:
        logger.info(f"[evolve] blow-up surrogate triggered: {trace.stop_reason.value} at t = {trace.stop_time:.6g}")
    if not bound_holds:
        logger.warning(f"[evolve] 8Q exceeded the bound {bound:.6g} on some sample")
    return report, trace
