import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, optimize, special

from app.field import Field3, Gaussian, Grid, ScaleSpec, grad_norm_sq, norm_l2sq, norm_lp, scale_field
from app.functionals import (
    FiberingCurve,
    FiberingMap,
    Params,
    PairingContext,
    ball_virial_sides,
    build_report,
    descent_constant,
    dynamics_energy,
    energy_form,
    energy_inequality_check,
    fibering,
    fit_remainder_constant,
    g_poly,
    mass_bound_constant,
    mollified_e2,
    nehari_projection,
    omega_lambda,
    reference_root_check,
    remainder,
    report,
    tau,
    volume_report,
)
from app.poisson import pair_energy
from app.profiles import smallness
from app.shared.enums import EnergyForm
from app.shared.exceptions import ParameterError, ProjectionError


@pytest.fixture(scope="module")
def bump(grid64) -> Field3:
    """Gaussian with J(u) > 0 whose Nehari root stays resolved on the 64^3 grid."""
    return Field3.from_generator(grid64, Gaussian(amplitude=3.0, beta=1.0))


@pytest.fixture(scope="module")
def heavy(grid64) -> Field3:
    """Gaussian with J(u) < 0."""
    return Field3.from_generator(grid64, Gaussian(amplitude=4.0, beta=1.0))


class TestParams:
    def test_defaults(self):
        params = Params()
        assert (params.omega, params.e, params.p) == (1.0, 0.0, 3.0)
        assert params.fibering_power == pytest.approx(3.0)

    @pytest.mark.parametrize("kwargs", [{"omega": 0.0}, {"e": -0.1}, {"p": 5.0}, {"p": 1.0}])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValidationError):
            Params(**kwargs)

    def test_supercritical_range(self):
        Params(p=3.0).require_supercritical()
        with pytest.raises(ParameterError, match="7/3"):
            Params(p=2.2).require_supercritical()

    def test_with_coupling_copies(self, cubic):
        coupled = cubic.with_coupling(0.4)
        assert coupled.e == 0.4
        assert cubic.e == 0.0


class TestBuildReport:
    """Linear relations between the functionals hold for any inputs."""

    @pytest.fixture
    def rep(self, rng):
        A, B, C, D, E1, E2, E3 = rng.uniform(-2.0, 2.0, size=7)
        return build_report(Params(omega=1.7, e=0.4, p=3.5), A, B, C, D, E1, E2, E3, F_const=0.3)

    def test_J_is_twice_N_minus_P(self, rep):
        assert rep.J == pytest.approx(2.0 * rep.N - rep.P, abs=1e-13)

    def test_Q_is_three_halves_N_minus_P(self, rep):
        assert rep.Q == pytest.approx(1.5 * rep.N - rep.P, abs=1e-13)

    def test_J_is_Q_plus_half_N(self, rep):
        assert rep.J == pytest.approx(rep.Q + 0.5 * rep.N, abs=1e-13)

    def test_script_I_adds_self_energy(self, rep):
        assert rep.I_script == pytest.approx(rep.I + 0.4**2 * 0.3)


class TestReports:
    def test_uncoupled_report_has_no_doping(self, gaussian64, cubic, gaussian_rho):
        rep = report(gaussian64, cubic, gaussian_rho)
        A, B, C = rep.A, rep.B, rep.C
        assert rep.I == pytest.approx(0.5 * A + 0.5 * B - C / 4.0)
        assert rep.B == pytest.approx((np.pi / 2.0) ** 1.5, rel=1e-10)
        assert rep.A == pytest.approx(3.0 * rep.B, rel=1e-8)

    def test_pairing_and_volume_forms_agree(self, gaussian64, coupled, gaussian_rho):
        paired = report(gaussian64, coupled, gaussian_rho)
        volume = volume_report(gaussian64, coupled, gaussian_rho)
        assert paired.E1 == pytest.approx(volume.E1, rel=1e-4)
        assert paired.E2 == pytest.approx(volume.E2, rel=1e-4)
        assert paired.I == pytest.approx(volume.I, rel=1e-4)

    def test_balls_have_no_volume_E3(self, gaussian64, coupled, ball_rho):
        assert np.isnan(volume_report(gaussian64, coupled, ball_rho).E3)

    def test_dynamics_energy_drops_mass_term(self, gaussian64, coupled, gaussian_rho):
        rep = volume_report(gaussian64, coupled, gaussian_rho)
        energy = dynamics_energy(gaussian64, coupled, gaussian_rho)
        assert energy == pytest.approx(rep.I - 0.5 * coupled.omega * rep.B, rel=1e-12)


class TestFiberingConstants:
    def test_g_poly(self):
        assert g_poly(3.0, 0.5) == pytest.approx(1.0)
        assert g_poly(3.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_tau(self):
        assert tau(3.0) == pytest.approx(0.25)
        for p in (2.5, 3.0, 4.0, 4.9):
            assert 0.0 < tau(p) < 1.0

    def test_descent_constant_positive(self):
        for p in (2.5, 3.0, 4.0):
            assert descent_constant(p) > 0.0

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
    def test_g_vanishes_to_first_order_at_one(self, p):
        s = 1e-5
        assert g_poly(p, 1.0) == pytest.approx(0.0, abs=1e-14)
        assert (g_poly(p, 1.0 + s) - g_poly(p, 1.0 - s)) / (2 * s) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
    def test_g_positive_below_one(self, p):
        lam = np.linspace(0.05, 0.999, 400)
        assert np.all(g_poly(p, lam) > 0.0)

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
    def test_g_dominates_descent_constant(self, p):
        lam = np.linspace(0.25, 1.0, 400)
        floor = 4 * (p + 1) * descent_constant(p, delta_star=0.25) * (1 - lam) ** 2
        assert np.all(g_poly(p, lam) >= floor - 1e-12)

    def test_mass_bound_constant(self):
        assert mass_bound_constant(Params(omega=1.0, p=3.0)) == pytest.approx(5.0)
        assert mass_bound_constant(Params(omega=4.0, p=3.0)) == pytest.approx(5.0 / 3.0)

    def test_energy_form_switch(self):
        assert energy_form(1.0) is EnergyForm.RESCALED_PROFILE
        assert energy_form(0.25) is EnergyForm.PULLED_BACK_POTENTIAL


class TestFiberingMap:
    def test_uncoupled_closed_form(self, gaussian64, cubic, zero_rho):
        fmap = FiberingMap(gaussian64, cubic, zero_rho)
        for lam in (0.3, 1.0, 2.0):
            expected = 1.5 * lam**2 * fmap.A + 0.5 * fmap.B - 1.25 * lam**3 * fmap.C
            assert fmap.J(lam) == pytest.approx(expected, rel=1e-13)

    def test_closed_form_matches_rescaled_field(self, gaussian64, coupled, gaussian_rho):
        fmap = FiberingMap(gaussian64, coupled, gaussian_rho)
        lam = 1.3
        scaled = scale_field(gaussian64, ScaleSpec.l2_invariant(lam))
        rep = report(scaled, coupled, gaussian_rho)
        assert fmap.F(lam) == pytest.approx(rep.I, rel=1e-4)
        assert fmap.G(lam) == pytest.approx(rep.Q, rel=1e-4)
        assert fmap.J(lam) == pytest.approx(rep.J, rel=1e-4)

    def test_f_at_one(self, gaussian64, coupled, gaussian_rho):
        fmap = FiberingMap(gaussian64, coupled, gaussian_rho)
        rep = report(gaussian64, coupled, gaussian_rho)
        assert fmap.f(1.0) == pytest.approx(rep.I - 0.5 * rep.Q, rel=1e-12)

    @pytest.mark.parametrize("lam", [0.8, 1.0, 1.5])
    def test_derivatives(self, gaussian64, coupled, gaussian_rho, lam):
        point = FiberingMap(gaussian64, coupled, gaussian_rho).point(lam)
        # dI(u^lam)/dlam = Q(u^lam)/lam
        assert point.dF == pytest.approx(point.G / lam, rel=1e-6)
        assert point.d2F == pytest.approx(point.d2F_analytic, rel=1e-4)

    def test_remainder_vanishes_at_one(self, gaussian64, coupled, gaussian_rho):
        assert remainder(gaussian64, coupled, gaussian_rho, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_remainder_zero_without_coupling(self, gaussian64, cubic, gaussian_rho):
        assert remainder(gaussian64, cubic, gaussian_rho, 0.7) == 0.0

    def test_remainder_forms_agree_for_balls(self, gaussian64, coupled, ball_rho):
        # raises ConvergenceError when the two assemblies disagree
        remainder(gaussian64, coupled, ball_rho, 0.8)


class TestFiberingCurve:
    def test_sweep(self, gaussian32, coupled, gaussian_rho):
        lambdas = [0.25, 0.5, 1.0, 2.0]
        curve = fibering(gaussian32, coupled, gaussian_rho, lambdas)
        assert curve.lambdas == lambdas
        assert len(curve.J) == len(lambdas)
        assert not curve.overflow

    def test_rejects_unsorted_lambdas(self):
        columns = {name: [0.0, 0.0] for name in ("J", "f", "F", "G", "dF", "d2F", "dG", "d2F_analytic", "uniqueness_remainder")}
        with pytest.raises(ValidationError):
            FiberingCurve(lambdas=[1.0, 0.5], **columns)


class TestNehariProjection:
    def test_uncoupled_root(self, bump, cubic, zero_rho):
        proj = nehari_projection(bump, cubic, zero_rho)
        assert proj.within_tolerance
        fmap = FiberingMap(bump, cubic, zero_rho)
        assert fmap.J(proj.lam) == pytest.approx(0.0, abs=1e-9 * fmap.B)
        assert all(fmap.J(lam) > 0 for lam in np.linspace(0.1, 0.999 * proj.lam, 20))

    def test_projected_field_is_on_manifold(self, bump, coupled, gaussian_rho):
        proj = nehari_projection(bump, coupled, gaussian_rho)
        rep = report(proj.field, coupled, gaussian_rho)
        assert abs(rep.J) <= 1e-5 * (rep.A + rep.B + rep.C)

    def test_fixed_point(self, bump, cubic, zero_rho):
        on = nehari_projection(bump, cubic, zero_rho).field
        again = nehari_projection(on, cubic, zero_rho)
        assert again.lam == pytest.approx(1.0, abs=1e-8)

    def test_zero_field_rejected(self, grid32, cubic, zero_rho):
        with pytest.raises(ProjectionError):
            nehari_projection(Field3.zeros(grid32), cubic, zero_rho)

    def test_reference_root(self, bump, coupled, gaussian_rho):
        result = reference_root_check(bump, coupled, gaussian_rho)
        assert result.holds
        assert result.lam_star > 0.0

    def test_matches_scalar_root_without_doping(self, bump, coupled, zero_rho):
        A, B = grad_norm_sq(bump), norm_l2sq(bump)
        C, D = norm_lp(bump, 4.0, power=True), pair_energy(bump)
        e2 = coupled.e**2

        def J(lam):
            return 1.5 * lam**2 * A + 0.5 * B - 1.25 * lam**3 * C + 3 * e2 * lam * D

        proj = nehari_projection(bump, coupled, zero_rho)
        expected = optimize.brentq(J, *proj.bracket, xtol=1e-15)
        assert proj.lam == pytest.approx(expected, rel=1e-10)

    def test_non_positive_J_projects_inward(self, heavy, coupled, gaussian_rho):
        fmap = FiberingMap(heavy, coupled, gaussian_rho)
        assert fmap.J(1.0) <= 0.0
        proj = nehari_projection(heavy, coupled, gaussian_rho)
        assert 0.0 < proj.lam <= 1.0


class TestEnergyInequality:
    def test_uncoupled_descent(self, bump, cubic, zero_rho):
        lambdas = np.linspace(0.25, 0.95, 8).tolist()
        result = energy_inequality_check(bump, cubic, zero_rho, lambdas, C2=0.0)
        assert result.smallness == 0.0
        assert result.passed
        assert result.C1 == pytest.approx(descent_constant(3.0))

    def test_remainder_term_uses_full_norm(self, heavy, coupled, gaussian_rho):
        result = energy_inequality_check(heavy, coupled, gaussian_rho, [0.5], C2=1.0)
        fmap = FiberingMap(heavy, coupled, gaussian_rho)
        assert result.J <= 0.0
        expected = 0.25 * smallness(gaussian_rho, coupled.e) * (fmap.A + fmap.B)
        assert result.points[0].remainder_term == pytest.approx(expected, rel=1e-12)

    def test_mass_bound_on_non_positive_J(self, heavy, coupled, gaussian_rho):
        result = energy_inequality_check(heavy, coupled, gaussian_rho, [0.5], C2=1.0)
        assert result.J <= 0.0
        assert result.mass_bound_holds is True
        H1 = grad_norm_sq(heavy) + norm_l2sq(heavy)
        assert H1 <= mass_bound_constant(coupled) * norm_lp(heavy, 4.0, power=True)

    def test_mass_bound_skipped_for_positive_J(self, bump, coupled, gaussian_rho):
        result = energy_inequality_check(bump, coupled, gaussian_rho, [0.5], C2=1.0)
        assert result.J > 0.0
        assert result.mass_bound_holds is None

    def test_fitted_constant_covers_fresh_fields(self, grid32, coupled, gaussian_rho):
        lambdas = np.linspace(0.25, 0.95, 8).tolist()
        training = [
            Field3.from_generator(grid32, Gaussian(amplitude=a, beta=b))
            for a, b in [(4.0, 1.0), (4.5, 0.8), (5.0, 1.2)]
        ]
        C2 = fit_remainder_constant(training, coupled, gaussian_rho, lambdas)
        assert C2 >= 0.0
        fresh = [
            Gaussian(amplitude=4.2, beta=0.9, center=(0.3, 0.0, 0.0)),
            Gaussian(amplitude=4.8, beta=1.1, center=(0.0, -0.2, 0.1)),
        ]
        for generator in fresh:
            u = Field3.from_generator(grid32, generator)
            result = energy_inequality_check(u, coupled, gaussian_rho, lambdas, C2=C2)
            assert result.J <= 0.0
            assert result.passed


class TestBallSurfaceTerms:
    def test_derivatives_match_differences(self, gaussian64, unit_ball):
        step = 1e-3
        terms = omega_lambda(gaussian64, unit_ball, [1.0 - step, 1.0, 1.0 + step])
        lo, mid, hi = terms.omega
        assert terms.d_omega[1] == pytest.approx((hi - lo) / (2 * step), rel=1e-3)
        assert terms.d2_omega[1] == pytest.approx((hi - 2 * mid + lo) / step**2, rel=1e-3)

    def test_omega_is_potential_integrated_over_ball(self, gaussian64, unit_ball, zero_rho):
        context = PairingContext(gaussian64, zero_rho)
        omega = omega_lambda(gaussian64, unit_ball, [1.0], context=context).omega[0]
        # |u|^2 = exp(-2 r^2) gives S0(r) = (pi / 2)^{3/2} erf(sqrt(2) r) / (8 pi r)
        exact, _ = integrate.quad(
            lambda r: 4 * np.pi * r**2 * (np.pi / 2) ** 1.5 * special.erf(np.sqrt(2) * r) / (8 * np.pi * r), 0.0, 1.0
        )
        assert omega == pytest.approx(exact, rel=2e-3)

    def test_ball_virial_identity(self, gaussian64, ball_rho):
        lhs, rhs = ball_virial_sides(gaussian64, ball_rho)
        assert lhs == pytest.approx(rhs, rel=1e-3)

    @pytest.mark.slow
    def test_mollified_ball_approaches_surface_form(self, unit_ball):
        grid = Grid(n=64, box_half_width=4.0)
        u = Field3.from_generator(grid, Gaussian(beta=1.0))
        errors = []
        for width in (0.4, 0.2):
            sharp, smooth = mollified_e2(u, unit_ball, width)
            errors.append(abs(smooth - sharp) / abs(sharp))
        assert errors[1] < errors[0]
        assert errors[1] < 0.05
