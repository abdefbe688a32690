import math

import numpy as np
import pytest

from fpatp.diffusion import DiffusionParams, diffuse, diffuse_step


def naive_step(img, sigma, step):
    """Scalar reference: per-pixel update with replicate borders."""
    rows, cols = img.shape
    out = np.zeros_like(img, dtype=np.float64)
    for i in range(rows):
        for j in range(cols):
            c = img[i, j]
            total = 0.0
            for di, dj in ((-1, 0), (1, 0), (0, 1), (0, -1)):
                ni = min(max(i + di, 0), rows - 1)
                nj = min(max(j + dj, 0), cols - 1)
                g = img[ni, nj] - c
                total += math.exp(-((g / sigma) ** 2)) * g
            out[i, j] = c + step * total
    return out


def params(sigma=40.0, iterations=1, step=0.25):
    return DiffusionParams(sigma=sigma, iterations=iterations, step=step)


class TestSingleStep:
    def test_constant_image_is_fixed_point(self):
        img = np.full((9, 7), 7.0)
        out = diffuse_step(img, params())
        assert np.array_equal(out, img)

    def test_hand_value_center_of_spike(self):
        # [0, 100, 0]: both horizontal gradients are -100 at the center,
        # c = exp(-(100/40)^2), vertical gradients vanish by replication.
        img = np.array([[0.0, 100.0, 0.0]])
        out = diffuse_step(img, params())
        c = math.exp(-((100.0 / 40.0) ** 2))
        expected = 100.0 + 0.25 * (2.0 * (-100.0) * c)
        assert out[0, 1] == pytest.approx(expected, abs=1e-12)
        assert out[0, 1] == pytest.approx(99.9035, abs=1e-4)

    def test_large_sigma_limit_is_laplacian_averaging(self):
        img = np.array([[0.0, 100.0, 0.0]])
        out = diffuse_step(img, params(sigma=1e12))
        assert out[0, 1] == pytest.approx(50.0, abs=1e-9)

    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            img = rng.uniform(0, 255, size=rng.integers(1, 12, size=2))
            got = diffuse_step(img, params())
            want = naive_step(img, 40.0, 0.25)
            assert np.allclose(got, want, atol=1e-12)


class TestIterated:
    def test_one_iteration_equals_single_step(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(0, 255, size=(8, 8))
        assert np.array_equal(diffuse(img, params(iterations=1)), diffuse_step(img, params()))

    def test_constant_invariant_many_iterations(self):
        img = np.full((12, 12), 42.5)
        assert np.array_equal(diffuse(img, params(iterations=50)), img)

    def test_two_steps_match_scalar_recurrence(self):
        img = np.array([[0.0, 100.0, 0.0]])
        got = diffuse(img, params(iterations=2))
        want = naive_step(naive_step(img, 40.0, 0.25), 40.0, 0.25)
        assert np.allclose(got, want, atol=1e-12)


class TestProperties:
    def test_maximum_principle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            img = rng.uniform(-50, 300, size=(16, 16))
            out = diffuse(img, params(iterations=10))
            assert out.min() >= img.min() - 1e-12
            assert out.max() <= img.max() + 1e-12

    def test_transpose_equivariance_is_exact(self):
        rng = np.random.default_rng(3)
        img = rng.uniform(0, 255, size=(10, 14))
        assert np.array_equal(diffuse(img.T, params(iterations=5)), diffuse(img, params(iterations=5)).T)

    def test_flip_equivariance_is_exact(self):
        rng = np.random.default_rng(4)
        img = rng.uniform(0, 255, size=(11, 9))
        out = diffuse(img, params(iterations=5))
        assert np.array_equal(diffuse(img[::-1], params(iterations=5)), out[::-1])
        assert np.array_equal(diffuse(img[:, ::-1], params(iterations=5)), out[:, ::-1])

    def test_total_variation_non_increasing(self):
        def tv(x):
            return np.abs(np.diff(x, axis=0)).sum() + np.abs(np.diff(x, axis=1)).sum()

        rng = np.random.default_rng(5)
        for _ in range(20):
            img = rng.uniform(0, 255, size=(12, 12))
            out = diffuse_step(img, params())
            assert tv(out) <= tv(img) + 1e-9


class TestParams:
    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            DiffusionParams(sigma=0.0)

    def test_rejects_bad_iterations(self):
        with pytest.raises(ValueError):
            DiffusionParams(iterations=0)

    @pytest.mark.parametrize("step", [0.0, -0.1, 0.26, 1.0])
    def test_rejects_bad_step(self, step):
        with pytest.raises(ValueError):
            DiffusionParams(step=step)

    def test_defaults(self):
        p = DiffusionParams()
        assert p.sigma == 40.0
        assert p.iterations == 15
        assert p.step == 0.25
