import numpy as np
import pytest
from PIL import Image

from ctkrylov.imaging import (
    DEFAULT_MIXING,
    CrossChannelSpec,
    GaussianBlurSpec,
    add_noise,
    build_blur_operator,
    checkerboard,
    gaussian_band_matrix,
    kron_oracle,
    load_image,
    make_blur_problem,
    radial_gradient,
    random_smooth,
    relative_error,
    save_image,
    snr,
    synthetic_image,
)
from ctkrylov.operators import adjoint_check
from ctkrylov.tensor import fro_norm


class TestGaussianBand:
    def test_diagonal_value(self):
        spec = GaussianBlurSpec(size=8, sigma=4.0, bandwidth=6)
        m = gaussian_band_matrix(spec)
        assert m[0, 0] == pytest.approx(1.0 / (4.0 * np.sqrt(2.0 * np.pi)))
        assert m[0, 0] == pytest.approx(0.0997356, abs=1e-7)

    def test_zero_bandwidth_is_diagonal(self):
        spec = GaussianBlurSpec(size=6, sigma=2.0, bandwidth=0)
        m = gaussian_band_matrix(spec)
        assert np.allclose(m, m[0, 0] * np.eye(6))

    def test_symmetric_toeplitz_banded(self):
        spec = GaussianBlurSpec(size=10, sigma=3.0, bandwidth=4)
        m = gaussian_band_matrix(spec)
        assert np.allclose(m, m.T)
        for d in range(10):
            diag = np.diag(m, d)
            assert np.allclose(diag, diag[0])
            if d > 4:
                assert np.all(diag == 0.0)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            GaussianBlurSpec(size=8, sigma=0.0, bandwidth=2)
        with pytest.raises(ValueError):
            GaussianBlurSpec(size=8, sigma=1.0, bandwidth=8)


class TestCrossChannel:
    def test_paper_matrix_accepted(self):
        spec = CrossChannelSpec(mixing=DEFAULT_MIXING)
        assert np.allclose(spec.mixing.sum(axis=1), 1.0)

    def test_row_sum_violation_rejected(self):
        bad = np.array([[0.9, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
        with pytest.raises(ValueError):
            CrossChannelSpec(mixing=bad)

    def test_asymmetric_mixing_rejected(self):
        bad = np.array([[0.8, 0.15, 0.05], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
        with pytest.raises(ValueError):
            CrossChannelSpec(mixing=bad)


class TestBlurOperator:
    def test_identity_case(self):
        rng = np.random.default_rng(0)
        eye = np.eye(8)
        _, _, op = build_blur_operator(eye, eye, CrossChannelSpec(mixing=np.eye(3)))
        x = rng.standard_normal((8, 8, 3))
        assert np.abs(op.apply(x) - x).max() < 1e-12

    def test_tensor_slices_follow_first_column(self):
        within = gaussian_band_matrix(GaussianBlurSpec(size=8, sigma=2.0, bandwidth=3))
        a, b, _ = build_blur_operator(within, within, CrossChannelSpec(DEFAULT_MIXING))
        assert np.allclose(a[:, :, 0], 0.8 * within)
        assert np.allclose(a[:, :, 1], 0.1 * within)
        assert np.allclose(a[:, :, 2], 0.1 * within)
        assert np.allclose(b[:, :, 0], within.T)
        assert np.all(b[:, :, 1:] == 0.0)

    def test_adjoint_identity(self):
        within = gaussian_band_matrix(GaussianBlurSpec(size=8, sigma=2.0, bandwidth=3))
        _, _, op = build_blur_operator(within, within, CrossChannelSpec(DEFAULT_MIXING))
        assert adjoint_check(op, trials=10) < 1e-10

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            build_blur_operator(np.eye(4), np.eye(5), CrossChannelSpec(DEFAULT_MIXING))


class TestKronOracle:
    def test_identity_case(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((6, 6, 3))
        out = kron_oracle(np.eye(6), np.eye(6), CrossChannelSpec(np.eye(3)), x)
        assert np.abs(out - x).max() < 1e-12

    def test_pure_channel_mixing_by_hand(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 2, 3))
        out = kron_oracle(np.eye(2), np.eye(2), CrossChannelSpec(DEFAULT_MIXING), x)
        for k in range(3):
            expected = 0.8 * x[:, :, k] + 0.1 * (x.sum(axis=2) - x[:, :, k])
            assert np.allclose(out[:, :, k], expected)

    def test_matches_operator_without_channel_mixing(self):
        # with trivial mixing the tensor sandwich and the dense model agree
        rng = np.random.default_rng(3)
        within = gaussian_band_matrix(GaussianBlurSpec(size=8, sigma=2.0, bandwidth=3))
        cross = CrossChannelSpec(np.eye(3))
        _, _, op = build_blur_operator(within, within, cross)
        for _ in range(5):
            x = rng.standard_normal((8, 8, 3))
            ref = kron_oracle(within, within, cross, x)
            assert fro_norm(op.apply(x) - ref) / fro_norm(ref) < 1e-10

    def test_size_guard(self):
        with pytest.raises(ValueError):
            kron_oracle(np.eye(80), np.eye(80), CrossChannelSpec(np.eye(3)),
                        np.zeros((80, 80, 3)))


class TestMassPreservation:
    def test_interior_means_preserved_without_mixing(self):
        n, r = 24, 3
        spec = GaussianBlurSpec(size=n, sigma=2.0, bandwidth=r)
        within = gaussian_band_matrix(spec)
        within /= within[n // 2].sum()  # interior rows now sum to one
        _, _, op = build_blur_operator(within, within, CrossChannelSpec(np.eye(3)))
        const = np.full((n, n, 3), 0.6)
        out = op.apply(const)
        interior = out[r:-r, r:-r, :]
        assert np.abs(interior - 0.6).max() < 1e-12


class TestNoise:
    def test_zero_level(self):
        clean = np.random.default_rng(4).uniform(size=(6, 6, 3))
        observed, noise = add_noise(clean, 0.0, seed=1)
        assert np.array_equal(observed, clean)
        assert np.all(noise == 0.0)

    def test_exact_ratio(self):
        clean = np.random.default_rng(5).uniform(0.1, 1.0, size=(16, 16, 3))
        _, noise = add_noise(clean, 1e-3, seed=2)
        assert fro_norm(noise) / fro_norm(clean) == pytest.approx(1e-3, rel=1e-12)

    def test_deterministic(self):
        clean = np.random.default_rng(6).uniform(size=(8, 8, 3))
        _, n1 = add_noise(clean, 0.05, seed=9)
        _, n2 = add_noise(clean, 0.05, seed=9)
        assert np.array_equal(n1, n2)

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            add_noise(np.ones((2, 2, 2)), -0.1)


class TestMetrics:
    def test_relative_error_values(self):
        truth = np.random.default_rng(7).uniform(0.1, 1.0, size=(5, 5, 3))
        assert relative_error(truth, truth) == 0.0
        assert relative_error(np.zeros_like(truth), truth) == pytest.approx(1.0)
        assert relative_error(1.1 * truth, truth) == pytest.approx(0.1, abs=1e-14)

    def test_relative_error_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            relative_error(np.ones((2, 2, 2)), np.zeros((2, 2, 2)))

    def test_snr_log_law(self):
        rng = np.random.default_rng(8)
        truth = rng.uniform(0.2, 0.8, size=(6, 6, 3))
        err = rng.standard_normal(truth.shape)
        a = snr(truth + 0.01 * err, truth)
        b = snr(truth + 0.1 * err, truth)
        assert a - b == pytest.approx(20.0, abs=1e-9)

    def test_snr_zero_decibels_at_matched_energy(self):
        rng = np.random.default_rng(9)
        truth = rng.uniform(0.2, 0.8, size=(6, 6, 3))
        signal = fro_norm(truth - truth.mean())
        err = rng.standard_normal(truth.shape)
        err *= signal / fro_norm(err)
        assert snr(truth + err, truth) == pytest.approx(0.0, abs=1e-9)

    def test_snr_exact_match_is_infinite(self):
        truth = np.random.default_rng(10).uniform(size=(4, 4, 3))
        assert snr(truth, truth) == float("inf")


class TestImageIO:
    def test_round_trip_half_gray(self, tmp_path):
        t = np.full((8, 8, 3), 0.5)
        path = tmp_path / "img.png"
        save_image(t, path)
        back = load_image(path)
        assert np.abs(back - t).max() <= 1.0 / 255.0 + 1e-12

    def test_pure_red_two_by_two(self, tmp_path):
        t = np.zeros((2, 2, 3))
        t[:, :, 0] = 1.0
        path = tmp_path / "red.png"
        save_image(t, path)
        back = load_image(path)
        assert np.all(back[:, :, 0] == 1.0)
        assert np.all(back[:, :, 1:] == 0.0)

    def test_clamping(self, tmp_path):
        t = np.full((2, 2, 3), 1.7)
        path = tmp_path / "hot.png"
        save_image(t, path)
        assert np.all(np.asarray(Image.open(path)) == 255)

    def test_non_rgb_rejected(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.new("L", (4, 4)).save(path)
        with pytest.raises(ValueError):
            load_image(path)

    def test_non_square_cropped_with_warning(self, tmp_path):
        path = tmp_path / "wide.png"
        Image.new("RGB", (6, 4)).save(path)
        with pytest.warns(UserWarning):
            img = load_image(path)
        assert img.shape == (4, 4, 3)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_image(tmp_path / "absent.png")


class TestPatterns:
    @pytest.mark.parametrize("name", ["checkerboard", "gradient", "random-smooth"])
    def test_shapes_and_range(self, name):
        img = synthetic_image(name, 32, seed=4)
        assert img.shape == (32, 32, 3)
        assert img.min() >= 0.0 and img.max() <= 1.0

    def test_random_smooth_deterministic(self):
        assert np.array_equal(random_smooth(16, 3), random_smooth(16, 3))

    def test_checkerboard_alternates(self):
        img = checkerboard(16, cell=4)
        assert not np.allclose(img[0, 0], img[0, 4])
        assert np.allclose(img[0, 0], img[4, 4])

    def test_gradient_is_smooth(self):
        img = radial_gradient(32)
        assert np.abs(np.diff(img, axis=0)).max() < 0.2

    def test_unknown_pattern_rejected(self):
        with pytest.raises(ValueError):
            synthetic_image("plaid", 16)


class TestBlurProblem:
    def test_noise_ratio_invariant(self):
        img = synthetic_image("gradient", 24)
        prob = make_blur_problem(img, sigma=3.0, bandwidth=4, noise_level=1e-3, seed=3)
        ratio = fro_norm(prob.observed - prob.blurred_clean) / fro_norm(prob.blurred_clean)
        assert ratio == pytest.approx(1e-3, rel=1e-12)

    def test_operator_consistency(self):
        img = synthetic_image("checkerboard", 16)
        prob = make_blur_problem(img, sigma=2.0, bandwidth=3, noise_level=0.0, seed=0)
        assert np.array_equal(prob.observed, prob.blurred_clean)
        assert np.abs(prob.operator.apply(img) - prob.blurred_clean).max() < 1e-12

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            make_blur_problem(np.zeros((4, 6, 3)), sigma=1.0, bandwidth=1)
