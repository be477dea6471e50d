import logging

import numpy as np
from pydantic import BaseModel

from app.dynamics import (
    EvolutionTrace,
    InstabilityReport,
    VirialReport,
    evolve,
    instability_experiment,
    virial_check,
)
from app.field import Field3, read_field, write_field
from app.functionals import FiberingCurve, FunctionalReport, fibering, volume_report
from app.groundstate import nls_soliton, solve_ground_state
from app.poisson import S1DecayReport, doping_mass_at_boundary, s1_decay_check
from app.profiles import (
    BallGeometry,
    ConditionReport,
    ProfileNorms,
    ball_geometry,
    check_smallness,
    dilation_condition,
    profile_norms,
)
from app.shared.exceptions import ConfigError, ProfileError, TraceError

from .checks import run_checks
from .config import Config, EvolveConfig
from .output import output_lock, write_json, write_json_lines, write_rows
from .plots import line_plot

logger = logging.getLogger(__name__)


class GroundStateSummary(BaseModel):
    sigma: float
    residual: float
    N_residual: float
    P_residual: float
    Q_residual: float
    J_residual: float
    decay_rate: float | None
    decay_bound: float
    smallness: float
    rho0: float
    smallness_ok: bool
    iterations: int
    converged: bool
    grad_norm: float
    seed_spread: float
    seed_modulus_spread: float
    gauge_gap: float | None = None
    soliton_deviation: float | None = None
    report: FunctionalReport


class EvolveSummary(BaseModel):
    lam: float
    t_end: float
    samples: int
    stop_reason: str
    stop_time: float
    message: str
    mass_drift: float
    energy_drift: float
    instability: InstabilityReport | None = None
    virial: VirialReport | None = None


class FiberingSummary(BaseModel):
    F_decreasing_beyond_one: bool
    G_negative_beyond_one: bool
    curve: FiberingCurve


class ProfileSummary(BaseModel):
    kind: str
    smallness: float
    rho0: float
    smallness_ok: bool
    norms: ProfileNorms
    boundary_mass: float
    condition: ConditionReport | None = None
    balls: list[BallGeometry] = []
    s1_decay: S1DecayReport | None = None


def _load_ground_state(config: Config, configured: str | None) -> Field3:
    path = config.input_path(configured)
    if not path.exists():
        raise ConfigError(f"Missing input {path}: run `groundstate` first or set `input`")
    u0 = read_field(path, real=True)
    if u0.grid != config.grid.build():
        raise ConfigError(f"{path} was written on {u0.grid}, config asks for {config.grid.build()}")
    return u0


def cmd_groundstate(config: Config) -> int:
    grid, params, rho = config.grid.build(), config.params, config.rho
    opts = config.groundstate
    small = check_smallness(rho, params.e, opts.rho0, grid)
    logger.info(f"[groundstate] smallness {small:.6g} vs rho0 = {opts.rho0:g}")

    with output_lock(config.out) as out:
        result = solve_ground_state(params, rho, grid, opts, seed=config.seed)
        rep = result.report
        scale = rep.A + params.omega * rep.B
        deviation = None
        if params.e == 0.0 or rho.is_zero:
            soliton = nls_soliton(params.omega, params.p, grid).values
            deviation = float(np.linalg.norm(result.u0.values - soliton) / np.linalg.norm(soliton))
        summary = GroundStateSummary(
            sigma=result.sigma,
            residual=result.residual,
            N_residual=abs(rep.N) / scale,
            P_residual=abs(rep.P) / scale,
            Q_residual=abs(rep.Q) / scale,
            J_residual=abs(rep.J) / scale,
            decay_rate=result.decay_rate,
            decay_bound=float(np.sqrt(params.omega)),
            smallness=small,
            rho0=opts.rho0,
            smallness_ok=small <= opts.rho0,
            iterations=result.iterations,
            converged=result.converged,
            grad_norm=result.grad_norm,
            seed_spread=result.seed_spread,
            seed_modulus_spread=result.seed_modulus_spread,
            gauge_gap=result.gauge_gap,
            soliton_deviation=deviation,
            report=rep,
        )
        write_field(out / "u0.bin", result.u0)
        write_json(out / "groundstate.json", summary)
    logger.info(f"[groundstate] sigma = {result.sigma:.10g} after {result.iterations} iterations")
    return 0


def _drift(trace: EvolutionTrace, column: str) -> float:
    values = trace.column(column)
    return float(np.max(np.abs(values - values[0])) / max(abs(values[0]), 1e-300))


def cmd_evolve(config: Config) -> int:
    params, rho = config.params, config.rho
    opts = config.evolve or EvolveConfig()
    u0 = _load_ground_state(config, opts.input)

    with output_lock(config.out) as out:
        instability = None
        if opts.lam > 1.0:
            instability, trace = instability_experiment(u0, params, rho, opts.lam, opts.t_end, opts)
        else:
            I_ground = volume_report(u0, params, rho).I
            trace = evolve(u0, params, rho, opts.t_end, opts, ground_energy=I_ground)
        trace.to_csv(out / "trace.csv")

        virial = None
        try:
            virial = virial_check(trace)
        except TraceError as e:
            logger.warning(f"[evolve] virial check skipped: {e}")

        summary = EvolveSummary(
            lam=opts.lam,
            t_end=opts.t_end,
            samples=len(trace.records),
            stop_reason=trace.stop_reason.value,
            stop_time=trace.stop_time,
            message=trace.message,
            mass_drift=_drift(trace, "mass"),
            energy_drift=_drift(trace, "energy"),
            instability=instability,
            virial=virial,
        )
        write_json(out / "evolve.json", summary)
        if opts.plots:
            t = trace.column("t")
            line_plot(out / "V.svg", t, {"V(t)": trace.column("V")}, xlabel="t", ylabel="V")
            line_plot(out / "Q.svg", t, {"Q(psi(t))": trace.column("Q")}, xlabel="t", ylabel="Q")
    if trace.blew_up:
        logger.info(f"[evolve] blow-up surrogate triggered: {trace.stop_reason.value} at t = {trace.stop_time:.6g}")
    return 0


def cmd_fibering(config: Config) -> int:
    params, rho = config.params, config.rho
    u0 = _load_ground_state(config, config.fibering.input)
    curve = fibering(u0, params, rho, config.fibering.sweep())

    lams = np.asarray(curve.lambdas)
    beyond = lams > 1.0
    F = np.asarray(curve.F)
    summary = FiberingSummary(
        F_decreasing_beyond_one=bool(np.all(np.diff(F[beyond]) < 0)),
        G_negative_beyond_one=bool(np.all(np.asarray(curve.G)[beyond] < 0)),
        curve=curve,
    )
    columns = ["lam", "J", "f", "F", "G", "dF", "d2F", "dG", "d2F_analytic", "uniqueness_remainder"]
    data = curve.model_dump()
    rows = [{c: data["lambdas" if c == "lam" else c][i] for c in columns} for i in range(len(lams))]

    with output_lock(config.out) as out:
        write_rows(out / "fibering.csv", columns, rows)
        write_json(out / "fibering.json", summary)
        if config.fibering.plots:
            for name in ("f", "F", "G"):
                line_plot(out / f"{name}.svg", lams, {f"{name}(lam)": data[name]}, xlabel="lam", vline=1.0)
    return 0


def cmd_verify(config: Config) -> int:
    records = run_checks(config)
    with output_lock(config.out) as out:
        write_json_lines(out / "verify.jsonl", records)
    for record in records:
        print(record.model_dump_json(by_alias=True))
    return 0 if all(r.passed for r in records) else 1


def cmd_profile_check(config: Config) -> int:
    grid, rho, e = config.grid.build(), config.rho, config.params.e
    rho0 = config.groundstate.rho0
    small = check_smallness(rho, e, rho0, grid)

    condition = None
    if rho.is_smooth and not rho.is_zero:
        try:
            condition = dilation_condition(rho, np.linspace(1e-3, grid.box_half_width, 400))
        except ProfileError as err:
            logger.warning(f"[profile] dilation condition skipped: {err}")
    summary = ProfileSummary(
        kind=rho.kind,
        smallness=small,
        rho0=rho0,
        smallness_ok=small <= rho0,
        norms=profile_norms(rho, grid),
        boundary_mass=doping_mass_at_boundary(grid, rho),
        condition=condition,
        balls=[ball_geometry(b.center, b.radius) for b in rho.ball_list()],
        s1_decay=None if rho.is_zero else s1_decay_check(rho, grid),
    )
    if condition is not None and not condition.holds:
        logger.warning(f"[profile] dilation condition fails on {condition.negative_intervals}")
    with output_lock(config.out) as out:
        write_json(out / "profile.json", summary)
    return 0
