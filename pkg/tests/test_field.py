import numpy as np
import pytest
from pydantic import ValidationError

from app.field import (
    Field3,
    Gaussian,
    Grid,
    PlaneWave,
    ScaleSpec,
    grad_norm_sq,
    gradient,
    laplacian,
    norm_l2sq,
    norm_lp,
    random_mixture,
    read_field,
    scale_field,
    spectral_rescale,
    spectral_tail,
    transform_forward,
    transform_inverse,
    write_field,
)
from app.field.io import sidecar_path
from app.shared.exceptions import FieldError


class TestGrid:
    """Uniform periodic box [-L, L)^3."""

    def test_spacing_and_axis(self):
        grid = Grid(n=32, box_half_width=8.0)
        assert grid.h == 0.5
        assert grid.axis[0] == -8.0
        assert grid.axis[16] == 0.0
        assert grid.axis[-1] == pytest.approx(7.5)

    @pytest.mark.parametrize("n", [6, 12, 48])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(ValidationError):
            Grid(n=n, box_half_width=8.0)

    def test_rejects_non_positive_box(self):
        with pytest.raises(ValidationError):
            Grid(n=32, box_half_width=0.0)

    def test_doubled_keeps_spacing(self):
        grid = Grid(n=32, box_half_width=8.0)
        assert grid.doubled().h == grid.h

    def test_wavenumbers_follow_fft_convention(self):
        grid = Grid(n=16, box_half_width=np.pi)
        assert np.allclose(grid.wavenumbers(), np.fft.fftfreq(16, d=1.0 / 16))


class TestField3:
    def test_rejects_non_finite(self, grid32):
        values = np.zeros(grid32.shape)
        values[0, 0, 0] = np.nan
        with pytest.raises(FieldError):
            Field3(grid=grid32, values=values)

    def test_rejects_wrong_shape(self, grid32):
        with pytest.raises(FieldError):
            Field3(grid=grid32, values=np.zeros((8, 8, 8)))

    def test_values_are_read_only(self, gaussian32):
        with pytest.raises(ValueError):
            gaussian32.values[0, 0, 0] = 1.0

    def test_scalar_multiple_keeps_generator(self, gaussian32):
        doubled = 2.0 * gaussian32
        assert doubled.generator is not None
        assert np.allclose(doubled.values, 2.0 * gaussian32.values)


class TestNorms:
    """Quadratures against closed forms for u = exp(-beta |x|^2)."""

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_l2_norm(self, grid64, beta):
        u = Field3.from_generator(grid64, Gaussian(beta=beta))
        assert norm_l2sq(u) == pytest.approx((np.pi / (2 * beta)) ** 1.5, rel=1e-10)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_gradient_norm(self, grid64, beta):
        u = Field3.from_generator(grid64, Gaussian(beta=beta))
        exact = 3.0 * beta * (np.pi / (2 * beta)) ** 1.5
        assert grad_norm_sq(u) == pytest.approx(exact, rel=1e-8)

    def test_lp_norm_power(self, gaussian64):
        # int exp(-4 |x|^2) = (pi/4)^{3/2}
        assert norm_lp(gaussian64, 4.0, power=True) == pytest.approx((np.pi / 4) ** 1.5, rel=1e-10)
        assert norm_lp(gaussian64, 4.0) == pytest.approx((np.pi / 4) ** (1.5 / 4), rel=1e-10)

    def test_lp_rejects_small_exponent(self, gaussian64):
        with pytest.raises(FieldError):
            norm_lp(gaussian64, 0.5)


class TestSpectral:
    def test_forward_inverse(self, grid32, rng):
        u = Field3.from_generator(grid32, random_mixture(rng))
        back = transform_inverse(transform_forward(u))
        assert np.allclose(back.values, u.values, atol=1e-13)

    def test_parseval(self, grid32, rng):
        u = Field3.from_generator(grid32, random_mixture(rng))
        coefficients = transform_forward(u).values
        spectral = grid32.cell_volume * float(np.sum(np.abs(coefficients) ** 2)) / grid32.n**3
        assert spectral == pytest.approx(norm_l2sq(u), rel=1e-12)

    def test_constant_field_lives_in_zero_mode(self, grid32):
        coefficients = transform_forward(Field3(grid=grid32, values=np.ones(grid32.shape, dtype=complex))).values.copy()
        assert coefficients[0, 0, 0] == pytest.approx(grid32.n**3)
        coefficients[0, 0, 0] = 0.0
        assert np.max(np.abs(coefficients)) < 1e-9

    def test_plane_wave_derivatives(self, grid32):
        k = 2 * np.pi / 16.0
        u = Field3.from_generator(grid32, PlaneWave((k, 2 * k, 0.0)))
        dx, dy, dz = gradient(u)
        assert np.allclose(dx, 1j * k * u.values, atol=1e-12)
        assert np.allclose(dy, 2j * k * u.values, atol=1e-12)
        assert np.allclose(dz, 0.0, atol=1e-12)
        assert np.allclose(laplacian(u), -5 * k**2 * u.values, atol=1e-12)

    def test_smooth_field_has_negligible_tail(self, gaussian64):
        assert spectral_tail(gaussian64) < 1e-12

    def test_checkerboard_is_all_tail(self, grid32):
        u = Field3.from_generator(grid32, PlaneWave((np.pi / grid32.h, 0.0, 0.0)))
        assert spectral_tail(u) == pytest.approx(1.0)


class TestScaling:
    """v(x) = lam^a u(lam^b x)."""

    # exp(-8|x|^2) on h = 0.25 is resolved to about 1e-8
    @pytest.mark.parametrize(("lam", "rel"), [(0.5, 1e-13), (2.0, 1e-7)])
    def test_l2_invariant_scaling_keeps_mass(self, gaussian64, lam, rel):
        v = scale_field(gaussian64, ScaleSpec.l2_invariant(lam))
        assert norm_l2sq(v) == pytest.approx(norm_l2sq(gaussian64), rel=rel)

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_kinetic_term_scales_quadratically(self, gaussian64, lam):
        v = scale_field(gaussian64, ScaleSpec.l2_invariant(lam))
        assert grad_norm_sq(v) == pytest.approx(lam**2 * grad_norm_sq(gaussian64), rel=1e-4)

    def test_identity_scale_returns_input(self, gaussian32):
        assert scale_field(gaussian32, ScaleSpec.l2_invariant(1.0)) is gaussian32

    def test_spectral_rescale_matches_closed_form(self, grid64):
        u = Field3(grid=grid64, values=Field3.from_generator(grid64, Gaussian(beta=1.0)).values)
        assert u.generator is None
        v = scale_field(u, ScaleSpec.l2_invariant(1.2), order="spectral")
        exact = 1.2**1.5 * Field3.from_generator(grid64, Gaussian(beta=1.44)).values
        assert np.max(np.abs(v.values - exact)) < 1e-8

    def test_spectral_rescale_reproduces_grid_values(self, grid32, rng):
        values = rng.normal(size=grid32.shape)
        assert np.allclose(spectral_rescale(values, grid32, 1.0), values, atol=1e-12)

    def test_cubic_spline_is_close(self, grid64):
        u = Field3(grid=grid64, values=Field3.from_generator(grid64, Gaussian(beta=1.0)).values)
        v = scale_field(u, ScaleSpec.l2_invariant(0.8), order=3)
        assert norm_l2sq(v) == pytest.approx(norm_l2sq(u), rel=1e-3)


class TestFieldIO:
    def test_write_then_read(self, tmp_path, grid32, rng):
        u = Field3.from_generator(grid32, random_mixture(rng))
        path = write_field(tmp_path / "u.bin", u)
        assert path.stat().st_size == 32 + 16 * grid32.n**3
        assert sidecar_path(path).exists()
        back = read_field(path)
        assert back.grid == grid32
        assert np.array_equal(back.values, u.values)

    def test_real_read_rejects_complex(self, tmp_path, grid32, rng):
        u = Field3.from_generator(grid32, random_mixture(rng, complex_amplitudes=True))
        path = write_field(tmp_path / "u.bin", u)
        with pytest.raises(FieldError, match="not real"):
            read_field(path, real=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FieldError, match="not found"):
            read_field(tmp_path / "nope.bin")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"XXXX" + bytes(28))
        with pytest.raises(FieldError, match="magic"):
            read_field(path)


class TestGenerators:
    def test_random_mixture_is_reproducible(self, grid32):
        a = Field3.from_generator(grid32, random_mixture(np.random.default_rng(7)))
        b = Field3.from_generator(grid32, random_mixture(np.random.default_rng(7)))
        assert np.array_equal(a.values, b.values)
