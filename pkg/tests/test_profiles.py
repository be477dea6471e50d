import numpy as np
import pytest
from pydantic import ValidationError

from app.profiles import (
    Ball,
    BallsProfile,
    GaussianProfile,
    MollifiedBallProfile,
    PowerLawProfile,
    SumProfile,
    ZeroProfile,
    ball_geometry,
    ball_potential,
    ball_quadrature,
    balls_self_energy,
    dilation_condition,
    gaussian_sign_change_radii,
    power_law_sign_change_radii,
    profile_adapter,
    radial_lp_norm,
    size_lower_bound_constant,
    smallness,
    sphere_quadrature,
    torsion_check,
)
from app.shared.exceptions import ProfileError

SMOOTH = [
    GaussianProfile(epsilon=0.7, alpha=1.3, center=(0.3, -0.2, 0.1)),
    PowerLawProfile(epsilon=0.4, alpha=4.0, center=(0.0, 0.5, 0.0)),
    MollifiedBallProfile(sigma=1.0, radius=1.0, width=0.3),
]


@pytest.fixture
def points(rng):
    return rng.uniform(-2.0, 2.0, size=(3, 50))


class TestSmoothProfiles:
    """Closed-form x.grad(rho) and x.(D^2 rho x) against derivatives along t -> rho(t x)."""

    @pytest.mark.parametrize("rho", SMOOTH, ids=lambda r: r.kind)
    def test_xgrad(self, rho, points):
        X, Y, Z = points
        t = 1e-5
        fd = (rho.eval((1 + t) * X, (1 + t) * Y, (1 + t) * Z) - rho.eval((1 - t) * X, (1 - t) * Y, (1 - t) * Z)) / (2 * t)
        assert np.allclose(rho.eval_xgrad(X, Y, Z), fd, rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("rho", SMOOTH, ids=lambda r: r.kind)
    def test_xhess(self, rho, points):
        X, Y, Z = points
        t = 1e-4
        fd = (
            rho.eval((1 + t) * X, (1 + t) * Y, (1 + t) * Z)
            - 2 * rho.eval(X, Y, Z)
            + rho.eval((1 - t) * X, (1 - t) * Y, (1 - t) * Z)
        ) / t**2
        assert np.allclose(rho.eval_xhess(X, Y, Z), fd, rtol=1e-5, atol=1e-6)

    def test_xhess_finite_at_centre(self):
        rho = GaussianProfile(epsilon=1.0, alpha=1.0)
        assert rho.eval_xhess(np.zeros(1), np.zeros(1), np.zeros(1))[0] == 0.0

    def test_power_law_needs_integrable_decay(self):
        with pytest.raises(ValidationError):
            PowerLawProfile(epsilon=1.0, alpha=2.0)


class TestProfileModels:
    def test_adapter_dispatches_on_kind(self):
        rho = profile_adapter.validate_python({"kind": "gaussian", "epsilon": 1.0, "alpha": 2.0})
        assert isinstance(rho, GaussianProfile)
        assert rho.center == (0.0, 0.0, 0.0)

    def test_adapter_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            profile_adapter.validate_python({"kind": "gaussian", "epsilon": 1.0, "alpha": 2.0, "beta": 1.0})

    def test_overlapping_balls_rejected(self):
        with pytest.raises(ValidationError, match="overlap"):
            BallsProfile(balls=(Ball(sigma=1.0, radius=1.0), Ball(sigma=1.0, center=(1.5, 0.0, 0.0), radius=1.0)))

    def test_touching_balls_accepted(self):
        rho = BallsProfile(balls=(Ball(sigma=1.0, radius=1.0), Ball(sigma=1.0, center=(2.0, 0.0, 0.0), radius=1.0)))
        assert len(rho.ball_list()) == 2

    def test_sum_with_balls_has_no_pointwise_derivatives(self, unit_ball):
        rho = SumProfile(parts=(GaussianProfile(epsilon=1.0, alpha=1.0), BallsProfile(balls=(unit_ball,))))
        assert not rho.is_smooth
        assert len(rho.smooth_parts()) == 1
        with pytest.raises(ProfileError):
            rho.eval_xgrad(np.zeros(1), np.zeros(1), np.zeros(1))

    def test_zero_profile(self):
        rho = ZeroProfile()
        assert rho.is_zero
        assert np.all(rho.eval(np.ones(3), np.ones(3), np.ones(3)) == 0.0)


class TestNorms:
    def test_gaussian_six_fifths_norm(self):
        rho = GaussianProfile(epsilon=0.5, alpha=2.0)
        exact = 0.5 * (np.pi / (1.2 * 2.0)) ** 1.25
        assert radial_lp_norm(rho.radial) == pytest.approx(exact, rel=1e-9)

    def test_smallness_scales_with_coupling(self, gaussian_rho):
        assert smallness(gaussian_rho, 0.2) == pytest.approx(4.0 * smallness(gaussian_rho, 0.1), rel=1e-12)

    def test_zero_profile_has_zero_smallness(self):
        assert smallness(ZeroProfile(), 1.0) == 0.0

    def test_off_centre_profile_needs_grid(self):
        with pytest.raises(ProfileError):
            smallness(SMOOTH[0], 1.0)

    def test_balls_use_boundary_size(self, ball_rho):
        assert smallness(ball_rho, 1.0) == pytest.approx(ball_geometry((0.0, 0.0, 0.0), 1.0).size)


class TestDilationCondition:
    """Sign of 8 rho + 7 x.grad(rho) + x.(D^2 rho x)."""

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_gaussian_sign_change_radii(self, alpha):
        radii = np.linspace(1e-3, 5.0 / np.sqrt(alpha), 400)
        report = dilation_condition(GaussianProfile(epsilon=1.0, alpha=alpha), radii)
        expected = [np.sqrt((2 - np.sqrt(2)) / alpha), np.sqrt((2 + np.sqrt(2)) / alpha)]
        assert not report.holds
        assert np.allclose(report.roots, expected, rtol=0.0, atol=1e-10)
        assert np.allclose(gaussian_sign_change_radii(alpha), expected, rtol=1e-14)
        assert len(report.negative_intervals) == 1

    def test_power_law_roots(self):
        rho = PowerLawProfile(epsilon=1.0, alpha=6.0)
        report = dilation_condition(rho, np.linspace(1e-3, 3.0, 600))
        assert np.allclose(report.roots, power_law_sign_change_radii(6.0), rtol=1e-9)

    def test_zero_profile_is_degenerate(self):
        report = dilation_condition(ZeroProfile(), np.linspace(0.0, 1.0, 5))
        assert report.degenerate
        assert not report.holds

    def test_off_centre_rejected(self):
        with pytest.raises(ProfileError):
            dilation_condition(SMOOTH[0], np.linspace(0.0, 1.0, 5))


class TestBallGeometry:
    def test_unit_ball_size(self):
        volume = 4.0 * np.pi / 3.0
        expected = volume ** (1 / 6) * 6.0 * np.sqrt(np.pi) * np.sqrt(3.0 * volume ** (1 / 3) + 1.0)
        size = ball_geometry((0.0, 0.0, 0.0), 1.0).size
        assert size == pytest.approx(expected, rel=1e-12)
        assert size == pytest.approx(32.6, abs=0.05)

    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_curvature_norm_is_scale_free(self, R):
        assert ball_geometry((1.0, 0.0, 0.0), R).curvature_l2 == pytest.approx(4.0 * np.sqrt(np.pi))

    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_size_lower_bound(self, R):
        geometry = ball_geometry((0.0, 0.0, 0.0), R)
        assert geometry.size >= size_lower_bound_constant() * geometry.chi_norm

    def test_torsion_function(self):
        residuals = torsion_check(ball_geometry((0.5, 0.0, -0.5), 1.5))
        assert residuals["laplacian_residual"] < 1e-5
        assert residuals["normal_derivative_residual"] < 1e-6
        assert residuals["kappa2"] == pytest.approx(1.0, abs=1e-6)


class TestQuadrature:
    def test_sphere(self):
        directions, weights = sphere_quadrature()
        assert weights.sum() == pytest.approx(4.0 * np.pi, rel=1e-13)
        assert np.sum(weights * directions[2] ** 2) == pytest.approx(4.0 * np.pi / 3.0, rel=1e-13)
        assert np.sum(weights * directions[0] ** 4) == pytest.approx(4.0 * np.pi / 5.0, rel=1e-13)

    def test_ball(self):
        points, weights = ball_quadrature()
        assert weights.sum() == pytest.approx(4.0 * np.pi / 3.0, rel=1e-13)
        assert np.sum(weights * np.sum(points**2, axis=0)) == pytest.approx(4.0 * np.pi / 5.0, rel=1e-13)


class TestBallPotentials:
    def test_centre_and_far_field(self, unit_ball):
        zero = np.zeros(1)
        assert ball_potential(unit_ball, zero, zero, zero)[0] == pytest.approx(0.5)
        far = ball_potential(unit_ball, np.array([5.0]), zero, zero)[0]
        assert far == pytest.approx(unit_ball.charge / (4.0 * np.pi * 5.0))

    def test_continuous_at_surface(self, unit_ball):
        r = np.array([1.0 - 1e-9, 1.0 + 1e-9])
        values = ball_potential(unit_ball, r, np.zeros(2), np.zeros(2))
        assert values[0] == pytest.approx(values[1], abs=1e-8)

    def test_self_energy_of_two_balls(self):
        a = Ball(sigma=1.0, radius=1.0)
        b = Ball(sigma=1.0, center=(3.0, 0.0, 0.0), radius=1.0)
        expected = 2 * np.pi / 15.0 + a.charge * b.charge / (16.0 * np.pi * 3.0)
        assert balls_self_energy([a, b]) == pytest.approx(expected, rel=1e-14)
