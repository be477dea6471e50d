"""Verification suites run by ``verify``.

Each check evaluates one identity or inequality on the configured grid
and emits a ``CheckRecord``. Checks run as tasks; a check that raises is
recorded as failed with the exception text.
"""

import logging
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field
from scipy import special

from app import settings
from app.field import (
    Field3,
    Gaussian,
    Grid,
    ScaleSpec,
    grad_norm_sq,
    integrate,
    norm_l2sq,
    norm_lp,
    random_mixture,
    scale_field,
)
from app.functionals import (
    FiberingMap,
    PairingContext,
    Params,
    descent_constant,
    energy_inequality_check,
    fit_remainder_constant,
    g_poly,
    mollified_e2,
    nehari_projection,
    omega_lambda,
    reference_root_check,
    report,
)
from app.groundstate import verify_dilation_signs
from app.poisson import (
    coulomb_convolve,
    doping_potentials,
    doping_virial_residual,
    pair_energy,
    pair_potential,
    pair_virial_residual,
)
from app.profiles import (
    Ball,
    GaussianProfile,
    ball_geometry,
    dilation_condition,
    gaussian_sign_change_radii,
    torsion_check,
)
from app.utils.task_manager import Task, TaskManager

from .config import Config

logger = logging.getLogger(__name__)


class CheckRecord(BaseModel):
    """One verify line, serialized as {name, paper_ref, residual, tolerance, pass}."""

    name: str
    identity: str = Field(serialization_alias="paper_ref")
    residual: float
    tolerance: float
    passed: bool = Field(serialization_alias="pass")

    @classmethod
    def of(cls, name: str, identity: str, residual: float, tolerance: float) -> "CheckRecord":
        residual = float(residual)
        return cls(
            name=name,
            identity=identity,
            residual=residual,
            tolerance=tolerance,
            passed=bool(np.isfinite(residual) and residual <= tolerance),
        )


def _rel(a: float, b: float, scale: float | None = None) -> float:
    return abs(a - b) / max(abs(b) if scale is None else scale, 1e-300)


@Task.create_task
def gaussian_potential(grid: Grid, beta: float) -> list[CheckRecord]:
    f = Field3.from_generator(grid, Gaussian(beta=beta))
    s0 = coulomb_convolve(f).values
    r = grid.radius()
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = (np.pi / beta) ** 1.5 * special.erf(np.sqrt(beta) * r) / (8.0 * np.pi * r)
    exact[r == 0.0] = 1.0 / (4.0 * beta)
    centre = (grid.n // 2,) * 3
    return [
        CheckRecord.of(
            f"poisson.erf[beta={beta:g}]",
            "(1/(8 pi |x|)) * exp(-beta|x|^2) = (pi/beta)^{3/2} erf(sqrt(beta) r) / (8 pi r)",
            np.max(np.abs(s0 - exact)),
            1e-4,
        ),
        CheckRecord.of(
            f"poisson.origin[beta={beta:g}]",
            "S0(0) = 1/(4 beta) for the Gaussian density exp(-beta|x|^2)",
            abs(s0[centre] - 1.0 / (4.0 * beta)),
            1e-4,
        ),
    ]


@Task.create_task
def kernel_duality(config: Config) -> list[CheckRecord]:
    grid = config.grid.build()
    rho = config.rho if config.rho.is_smooth and not config.rho.is_zero else GaussianProfile(epsilon=1.0, alpha=1.0)
    rng = np.random.default_rng(config.seed)
    f = Field3.from_generator(grid, random_mixture(rng, complex_amplitudes=False))
    g = Field3.from_generator(grid, random_mixture(rng, complex_amplitudes=False, spread=2.0))
    fg = integrate(grid, coulomb_convolve(f).values * g.values.real)
    gf = integrate(grid, coulomb_convolve(g).values * f.values.real)

    u = Field3.from_generator(grid, Gaussian(beta=1.0))
    X, Y, Z = grid.coords()
    paired = -0.25 * integrate(grid, pair_potential(u).values * rho.eval(X, Y, Z))
    volume = 0.25 * integrate(grid, doping_potentials(grid, rho).s1.values * u.density())
    return [
        CheckRecord.of("poisson.symmetry", "int (K * f) g = int (K * g) f", _rel(fg, gf), 1e-10),
        CheckRecord.of("poisson.E1_dual", "-(1/4) int S0(u) rho = (1/4) int S1 |u|^2", _rel(paired, volume), 1e-8),
    ]


@Task.create_task
def algebraic_identities(config: Config) -> list[CheckRecord]:
    grid, params, rho = config.grid.build(), config.params, config.rho
    rng = np.random.default_rng(config.seed)
    worst = {"Q": 0.0, "J": 0.0, "f1": 0.0, "G1": 0.0}
    for _ in range(config.verify.random_fields):
        u = Field3.from_generator(grid, random_mixture(rng))
        context = PairingContext(u, rho)
        rep = report(u, params, rho, context=context)
        fmap = FiberingMap(u, params, rho, context=context)
        e2 = params.e**2
        scale = rep.A + params.omega * rep.B + rep.C + e2 * (abs(rep.D) + abs(rep.E1) + abs(rep.E2))
        worst["Q"] = max(worst["Q"], _rel(rep.Q, 1.5 * rep.N - rep.P, scale))
        worst["J"] = max(worst["J"], _rel(rep.J, 2.0 * rep.N - rep.P, scale))
        worst["f1"] = max(worst["f1"], _rel(fmap.f(1.0), rep.I - 0.5 * rep.Q, scale))
        worst["G1"] = max(worst["G1"], _rel(fmap.G(1.0), rep.Q, scale))
    statements = {
        "Q": "Q = (3/2) N - P",
        "J": "J = 2N - P",
        "f1": "f(1) = I - Q/2",
        "G1": "G(1) = Q",
    }
    return [CheckRecord.of(f"identities.{key}", statements[key], worst[key], 1e-12) for key in statements]


@Task.create_task
def scaling_laws(config: Config, lam: float) -> list[CheckRecord]:
    grid, p = config.grid.build(), config.params.p
    rng = np.random.default_rng(config.seed)
    u = Field3.from_generator(grid, random_mixture(rng, n_terms=2, beta_range=(0.8, 1.2)))
    v = scale_field(u, ScaleSpec.l2_invariant(lam))
    tag = f"lam={lam:g}"
    return [
        CheckRecord.of(f"scaling.B[{tag}]", "B(u^lam) = B(u)", _rel(norm_l2sq(v), norm_l2sq(u)), 1e-13),
        CheckRecord.of(
            f"scaling.A[{tag}]", "A(u^lam) = lam^2 A(u)", _rel(grad_norm_sq(v), lam**2 * grad_norm_sq(u)), 1e-4
        ),
        CheckRecord.of(
            f"scaling.C[{tag}]",
            "C(u^lam) = lam^{3(p-1)/2} C(u)",
            _rel(norm_lp(v, p + 1, power=True), lam ** (1.5 * (p - 1)) * norm_lp(u, p + 1, power=True)),
            1e-4,
        ),
        CheckRecord.of(f"scaling.D[{tag}]", "D(u^lam) = lam D(u)", _rel(pair_energy(v), lam * pair_energy(u)), 1e-4),
    ]


@Task.create_task
def virial_identities(config: Config) -> list[CheckRecord]:
    grid = config.grid.build()
    rho = config.rho
    if rho.is_zero or not rho.is_smooth:
        rho = GaussianProfile(epsilon=1.0, alpha=1.0)
    u = Field3.from_generator(grid, Gaussian(beta=1.0))
    return [
        CheckRecord.of(
            "virial.pair",
            "int (x.grad S0(u)) |u|^2 = -(1/2) int S0(u) |u|^2",
            pair_virial_residual(u),
            1e-4,
        ),
        CheckRecord.of(
            "virial.doping",
            "int (x.grad S1) |u|^2 = 2 int S1 |u|^2 - int S2 |u|^2",
            doping_virial_residual(u, rho),
            1e-4,
        ),
    ]


@Task.create_task
def gaussian_condition(alpha: float) -> list[CheckRecord]:
    radii = np.linspace(1e-3, 5.0 / np.sqrt(alpha), 400)
    found = dilation_condition(GaussianProfile(epsilon=1.0, alpha=alpha), radii).roots
    expected = gaussian_sign_change_radii(alpha)
    residual = max(abs(a - b) for a, b in zip(found, expected)) if len(found) == 2 else float("inf")
    return [
        CheckRecord.of(
            f"condition.gaussian[alpha={alpha:g}]",
            "8 rho + 7 x.grad rho + x.D^2 rho x changes sign at r = sqrt((2 -+ sqrt 2)/alpha)",
            residual,
            1e-10,
        )
    ]


def pohozaev_gaussian(grid: Grid, params: Params, amplitude_factor: float = 1.0, center=(0.0, 0.0, 0.0)) -> Field3:
    """a exp(-beta |x|^2) with Q = J = 0 at e = 0: beta = omega (p-1)/(5-p)."""
    p, omega = params.p, params.omega
    beta = omega * (p - 1.0) / (5.0 - p)
    amplitude = (2.0 * beta * (p + 1.0) / (p - 1.0) * (0.5 * (p + 1.0)) ** 1.5) ** (1.0 / (p - 1.0))
    return Field3.from_generator(grid, Gaussian(amplitude=amplitude_factor * amplitude, beta=beta, center=center))


@Task.create_task
def g_constants(config: Config) -> list[CheckRecord]:
    p = config.params.require_supercritical().p
    delta_star = config.verify.delta_star
    s = 1e-5
    lam = np.linspace(delta_star, 1.0, 400)
    floor = 4.0 * (p + 1.0) * descent_constant(p, delta_star) * (1.0 - lam) ** 2
    return [
        CheckRecord.of("fibering.g_one", "g(1) = 0", abs(g_poly(p, 1.0)), 1e-14),
        CheckRecord.of(
            "fibering.dg_one", "g'(1) = 0", abs(g_poly(p, 1.0 + s) - g_poly(p, 1.0 - s)) / (2.0 * s), 1e-8
        ),
        CheckRecord.of(
            "fibering.g_floor",
            "g(lam) >= 4(p+1) C1 (1-lam)^2 on [delta*, 1]",
            max(0.0, float(np.max(floor - g_poly(p, lam)))),
            1e-12,
        ),
    ]


@Task.create_task
def fibering_inequalities(config: Config) -> list[CheckRecord]:
    grid, params, rho = config.grid.build(), config.params.require_supercritical(), config.rho
    delta_star = config.verify.delta_star
    lambdas = np.linspace(delta_star, 0.95, 8).tolist()
    training = [pohozaev_gaussian(grid, params, factor) for factor in (1.2, 1.4, 1.6)]
    C2 = fit_remainder_constant(training, params, rho, lambdas)
    fresh = [
        pohozaev_gaussian(grid, params, 1.3, center=(0.3, 0.0, 0.0)),
        pohozaev_gaussian(grid, params, 1.5, center=(0.0, -0.2, 0.1)),
    ]
    violation = 0.0
    mass = 0.0
    for u in fresh:
        result = energy_inequality_check(u, params, rho, lambdas, C2=C2, delta_star=delta_star)
        H1 = grad_norm_sq(u) + norm_l2sq(u)
        C = norm_lp(u, params.p + 1, power=True)
        scale = H1 + C
        for point in result.points:
            violation = max(violation, (point.lhs - point.descent_term - point.remainder_term) / scale)
        if result.J <= 0:
            mass = max(mass, (H1 - result.mass_bound_C0 * C) / (result.mass_bound_C0 * C))
    return [
        CheckRecord.of(
            "fibering.energy_inequality",
            "f(lam) - f(1) <= -C1 (1-lam)^2 C(u) + C2 (1-lam)^2 smallness ||u||^2 with C2 fitted on other fields",
            max(violation, 0.0),
            1e-12,
        ),
        CheckRecord.of("fibering.mass_bound", "J(u) <= 0 implies ||u||^2 <= C0 C(u)", max(mass, 0.0), 0.0),
    ]


@Task.create_task
def nehari_reference(config: Config) -> list[CheckRecord]:
    grid, params, rho = config.grid.build(), config.params, config.rho
    u = Field3.from_generator(grid, Gaussian(amplitude=3.0, beta=1.0))
    proj = nehari_projection(u, params, rho)
    reference = reference_root_check(u, params, rho)
    return [
        CheckRecord.of("nehari.residual", "J(u^lam*) = 0", abs(proj.J_residual), proj.tolerance),
        CheckRecord.of(
            "nehari.reference",
            "lam* >= lam0 / 2 for the root lam0 of the e = 0 fibering map",
            max(0.0, 0.5 * reference.lam_zero - reference.lam_star),
            0.0,
        ),
    ]


@Task.create_task
def dilation_signs(config: Config) -> list[CheckRecord]:
    grid, params, rho = config.grid.build(), config.params.require_supercritical(), config.rho
    u = pohozaev_gaussian(grid, params)
    verdict = verify_dilation_signs(u, params, rho, np.linspace(1.1, 3.0, 20))
    worst = max(max(c.I_gap, c.Q, c.J, c.d2F) for c in verdict.checks)
    return [
        CheckRecord.of(
            "fibering.dilation_signs",
            "I(u^lam) < I(u), Q(u^lam) < 0, J(u^lam) < 0 and F''(lam) < 0 for lam > 1",
            max(0.0, worst) if verdict.passed else max(worst, np.finfo(float).tiny),
            0.0,
        )
    ]


@Task.create_task
def ball_machinery(config: Config) -> list[CheckRecord]:
    unit = ball_geometry((0.0, 0.0, 0.0), 1.0)
    volume = 4.0 * np.pi / 3.0
    expected_size = volume ** (1 / 6) * 6.0 * np.sqrt(np.pi) * np.sqrt(3.0 * volume ** (1 / 3) + 1.0)
    torsion = torsion_check(unit, seed=config.seed)

    grid = config.grid.build()
    u = Field3.from_generator(grid, Gaussian(beta=1.0))
    ball = Ball(sigma=1.0, center=(0.0, 0.0, 0.0), radius=1.0)
    step = 1e-3
    terms = omega_lambda(u, ball, [1.0 - step, 1.0, 1.0 + step])
    omega_m, omega_0, omega_p = terms.omega
    d_fd = (omega_p - omega_m) / (2.0 * step)
    d2_fd = (omega_p - 2.0 * omega_0 + omega_m) / step**2
    return [
        CheckRecord.of("balls.kappa2", "dw/dn = 1 on the unit sphere for w = |x|^2/2", torsion["normal_derivative_residual"], 1e-5),
        CheckRecord.of("balls.size", "D(B_1) matches its closed form", _rel(unit.size, expected_size), 1e-12),
        CheckRecord.of("balls.d_omega", "Omega'(1) matches the centred difference of Omega", _rel(terms.d_omega[1], d_fd), 1e-3),
        CheckRecord.of("balls.d2_omega", "Omega''(1) matches the second difference of Omega", _rel(terms.d2_omega[1], d2_fd), 1e-3),
    ]


@Task.create_task
def mollified_ball(config: Config) -> list[CheckRecord]:
    # widths down to 0.2 need h <= 0.125
    grid = Grid(n=64, box_half_width=4.0)
    u = Field3.from_generator(grid, Gaussian(beta=1.0))
    ball = Ball(sigma=1.0, center=(0.0, 0.0, 0.0), radius=1.0)
    errors = []
    for width in (0.4, 0.2):
        sharp, smooth = mollified_e2(u, ball, width)
        errors.append(_rel(smooth, sharp))
    return [
        CheckRecord.of("balls.mollified_E2", "E2 of a tanh-mollified ball tends to the surface form", errors[1], 0.05),
        CheckRecord.of("balls.mollified_trend", "the E2 gap shrinks with the mollification width", errors[1] / errors[0], 1.0),
    ]


def build_tasks(config: Config) -> list[Task[list[CheckRecord]]]:
    grid = config.grid.build()
    suites: dict[str, Callable[[], list[Task]]] = {
        "poisson": lambda: [*(gaussian_potential(grid, beta) for beta in (1.0, 2.0)), kernel_duality(config)],
        "identities": lambda: [algebraic_identities(config)],
        "scaling": lambda: [scaling_laws(config, lam) for lam in config.verify.scaling_lambdas],
        "virial": lambda: [virial_identities(config)],
        "condition": lambda: [gaussian_condition(alpha) for alpha in config.verify.gaussian_alphas],
        "fibering": lambda: [
            g_constants(config),
            fibering_inequalities(config),
            nehari_reference(config),
            dilation_signs(config),
        ],
        "balls": lambda: [ball_machinery(config), mollified_ball(config)],
    }
    return [task for suite in config.verify.suites for task in suites[suite]()]


def run_checks(config: Config) -> list[CheckRecord]:
    manager = TaskManager(thread_number=settings.SPOISON_THREADS)
    for task in build_tasks(config):
        manager.add_task(task)
    records: list[CheckRecord] = []
    for task in manager.run_tasks():
        if task.result is not None:
            records.extend(task.result)
            continue
        error = task.metadata.get("exception")
        logger.exception(f"Check {task.id} raised", exc_info=error)
        records.append(
            CheckRecord(name=task.id, identity=f"raised {type(error).__name__}: {error}", residual=float("nan"), tolerance=0.0, passed=False)
        )
    failed = [r.name for r in records if not r.passed]
    logger.info(f"[verify] {len(records) - len(failed)}/{len(records)} checks passed")
    if failed:
        logger.warning(f"[verify] failed: {', '.join(failed)}")
    return records
