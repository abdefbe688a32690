import numpy as np
import pytest

from fpatp.wavelet import (
    ATP_SUBBAND_NAMES,
    SubbandSet,
    decompose3,
    haar_dwt2,
    haar_idwt2,
    reconstruct3,
)


def subband_energy(bands):
    """Energy of the non-redundant bands of a 3-level pyramid."""
    return sum(float(np.sum(bands.band(n) ** 2)) for n in ATP_SUBBAND_NAMES)


class TestSingleLevel:
    def test_constant_block(self):
        a, h, v, d = haar_dwt2(np.ones((2, 2)))
        assert a.tolist() == [[2.0]]
        assert h.tolist() == v.tolist() == d.tolist() == [[0.0]]

    def test_hand_block(self):
        a, h, v, d = haar_dwt2(np.array([[4.0, 2.0], [2.0, 0.0]]))
        assert (a[0, 0], h[0, 0], v[0, 0], d[0, 0]) == (4.0, 2.0, 2.0, 0.0)

    def test_inverse_of_hand_block(self):
        one = np.ones((1, 1))
        out = haar_idwt2(4.0 * one, 2.0 * one, 2.0 * one, 0.0 * one)
        assert out.tolist() == [[4.0, 2.0], [2.0, 0.0]]

    def test_inverse_of_constant(self):
        one = np.ones((1, 1))
        assert haar_idwt2(2.0 * one, 0 * one, 0 * one, 0 * one).tolist() == [
            [1.0, 1.0],
            [1.0, 1.0],
        ]

    def test_round_trip_even_dims(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            shape = 2 * rng.integers(1, 16, size=2)
            x = rng.standard_normal(shape)
            back = haar_idwt2(*haar_dwt2(x))
            assert np.max(np.abs(back - x)) <= 1e-12 * max(1.0, np.max(np.abs(x)))

    def test_forward_of_inverse(self):
        rng = np.random.default_rng(1)
        subs = [rng.standard_normal((5, 7)) for _ in range(4)]
        again = haar_dwt2(haar_idwt2(*subs))
        for got, want in zip(again, subs):
            assert np.allclose(got, want, atol=1e-12)

    def test_energy_conservation(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((8, 8))
        a, h, v, d = haar_dwt2(x)
        total = sum(np.sum(s * s) for s in (a, h, v, d))
        assert total == pytest.approx(np.sum(x * x), rel=1e-12)

    def test_odd_dims_replicate(self):
        x = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        a, h, v, d = haar_dwt2(x)  # pads to 2x4 by repeating the last column
        assert a.shape == (1, 2)
        assert a[0, 1] == pytest.approx((3 + 3 + 6 + 6) / 2)

    def test_rejects_tiny(self):
        with pytest.raises(ValueError):
            haar_dwt2(np.ones((1, 5)))

    def test_idwt_rejects_mismatched(self):
        with pytest.raises(ValueError, match="shapes differ"):
            haar_idwt2(np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)))


class TestPyramid:
    def test_dims_halve_per_level(self):
        bands = decompose3(np.zeros((96, 96)))
        assert bands.a1.shape == bands.h1.shape == (48, 48)
        assert bands.v1.shape == bands.d1.shape == (48, 48)
        assert bands.a2.shape == bands.d2.shape == (24, 24)
        assert bands.a3.shape == bands.d3.shape == (12, 12)

    def test_constant_gain_per_level(self):
        bands = decompose3(np.full((8, 8), 3.0))
        assert np.all(bands.a3 == 24.0)  # gain 2 per level on the approximation
        for name in ATP_SUBBAND_NAMES:
            if name != "a3":
                assert np.all(bands.band(name) == 0.0)

    def test_energy_identity(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((16, 16))
        assert subband_energy(decompose3(x)) == pytest.approx(np.sum(x * x), rel=1e-9)

    def test_three_level_round_trip(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 255, size=(24, 40))
        back = reconstruct3(decompose3(x))
        assert np.max(np.abs(back - x)) <= 1e-12 * np.max(np.abs(x))

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal((2, 16, 16))
        lhs = decompose3(2.5 * x - 1.5 * y)
        bx, by = decompose3(x), decompose3(y)
        for name in ("a1", "h2", "d3", "a3"):
            assert np.allclose(
                lhs.band(name), 2.5 * bx.band(name) - 1.5 * by.band(name), atol=1e-10
            )

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            decompose3(np.ones((7, 16)))

    def test_band_lookup(self):
        bands = decompose3(np.zeros((8, 8)))
        assert bands.band("h2") is bands.h2
        with pytest.raises(KeyError):
            bands.band("h4")

    def test_atp_inputs_order(self):
        bands = decompose3(np.zeros((8, 8)))
        assert tuple(bands.atp_inputs()) == ATP_SUBBAND_NAMES
