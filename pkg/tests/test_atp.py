import json
import math

import numpy as np
import pytest

from fpatp.atp import (
    DegenerateReferenceError,
    ThresholdTable,
    atp_transform,
    default_threshold_table,
    derive_subband_thresholds,
    derive_thresholds,
    local_extrema,
    threshold_schedule,
)
from fpatp.diffusion import DiffusionParams
from fpatp.wavelet import ATP_SUBBAND_NAMES


def naive_atp(subband, thresholds):
    """Triple-loop reference for the pattern transform."""
    subband = np.asarray(subband, dtype=np.float64)
    rows, cols = subband.shape
    out = np.zeros((rows, cols), dtype=np.int64)
    for m in range(rows):
        for n in range(cols):
            total = 0
            for t in thresholds:
                bit_index = 0
                r_k = 0
                for i in (m - 1, m, m + 1):
                    for j in (n - 1, n, n + 1):
                        if i == m and j == n:
                            continue
                        bit_index += 1
                        ci = min(max(i, 0), rows - 1)
                        cj = min(max(j, 0), cols - 1)
                        if subband[ci, cj] > t:
                            r_k += 2 ** bit_index
                total += r_k
            out[m, n] = total
    return out


class TestPatternTransform:
    def test_hand_coded_bits(self):
        # Neighbors of the center, row-major: [1,0,1,0,0,1,0,1] vs T=0.5
        # fires bits 1, 3, 6, 8 -> 2 + 8 + 64 + 256 = 330.
        sub = np.array([[1.0, 0.0, 1.0], [0.0, 0.3, 0.0], [1.0, 0.0, 1.0]])
        out = atp_transform(sub, [0.5])
        assert out[1, 1] == 330

    def test_all_zero_subband(self):
        out = atp_transform(np.zeros((6, 6)), [0.1, 1.0, 50.0])
        assert np.all(out == 0)

    def test_saturated_pattern(self):
        out = atp_transform(np.full((5, 5), 10.0), [0.5] * 5)
        assert np.all(out == 5 * 510)

    def test_matches_naive_reference_exactly(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            k = int(rng.integers(1, 4))
            sub = rng.uniform(-5, 5, size=(5, 5))
            thresholds = np.sort(rng.uniform(-4, 4, size=k))[::-1]
            assert np.array_equal(atp_transform(sub, thresholds), naive_atp(sub, thresholds))

    def test_range_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            k = int(rng.integers(1, 6))
            sub = rng.uniform(-100, 100, size=(7, 7))
            out = atp_transform(sub, rng.uniform(-50, 50, size=k))
            assert out.min() >= 0
            assert out.max() <= k * 510

    def test_monotone_in_thresholds(self):
        rng = np.random.default_rng(2)
        sub = rng.uniform(0, 10, size=(6, 6))
        lo = atp_transform(sub, [1.0, 2.0])
        hi = atp_transform(sub, [1.5, 2.5])
        assert np.all(hi <= lo)

    def test_additive_over_threshold_lists(self):
        rng = np.random.default_rng(3)
        sub = rng.uniform(-3, 3, size=(5, 5))
        a = [0.5, 1.5]
        b = [-1.0, 2.0, 0.1]
        combined = atp_transform(sub, a + b)
        assert np.array_equal(combined, atp_transform(sub, a) + atp_transform(sub, b))

    def test_strict_inequality_at_ties(self):
        sub = np.full((3, 3), 1.0)
        assert np.all(atp_transform(sub, [1.0]) == 0)

    def test_rejects_empty_thresholds(self):
        with pytest.raises(ValueError, match="empty"):
            atp_transform(np.ones((3, 3)), [])

    def test_rejects_tiny_subband(self):
        with pytest.raises(ValueError):
            atp_transform(np.ones((2, 3)), [1.0])


class TestLocalExtrema:
    def test_against_naive_window(self):
        rng = np.random.default_rng(4)
        sub = rng.uniform(-10, 10, size=(6, 8))
        high, low = local_extrema(sub)
        rows, cols = sub.shape
        for m in range(rows):
            for n in range(cols):
                window = [
                    sub[min(max(m + di, 0), rows - 1), min(max(n + dj, 0), cols - 1)]
                    for di in (-1, 0, 1)
                    for dj in (-1, 0, 1)
                ]
                assert high[m, n] == max(window)
                assert low[m, n] == min(window)


class TestScheduleDerivation:
    def test_hand_case_h2_l1(self):
        # Every usable pixel of this subband sees max 2, min 1, so the
        # reduced schedule is exactly 2.2 * 1 * exp(-2k).
        sub = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 2.0], [1.0, 1.0, 1.0]])
        got = derive_subband_thresholds(sub, beta=2.2, k=5)
        want = [2.2 * math.exp(-2.0 * k) for k in range(5)]
        assert np.allclose(got, want, rtol=1e-12)
        # First values, as commonly quoted to four figures
        assert got[0] == pytest.approx(2.2, abs=1e-12)
        assert got[1] == pytest.approx(0.2977, rel=1e-3)
        assert got[2] == pytest.approx(0.04029, rel=1e-3)
        assert got[3] == pytest.approx(0.005451, rel=1e-3)
        assert got[4] == pytest.approx(0.0007376, rel=1e-3)

    def test_schedule_helper(self):
        sched = threshold_schedule(t0=1.0, alpha=2.0, beta=2.2, k=3)
        assert np.allclose(sched, [2.2, 2.2 * math.exp(-2), 2.2 * math.exp(-4)])

    def test_constant_subband_is_degenerate(self):
        with pytest.raises(DegenerateReferenceError, match="flat"):
            derive_subband_thresholds(np.full((4, 4), 3.0), beta=2.2, k=5, name="flat")

    def test_k1_equals_beta_times_max_range(self):
        rng = np.random.default_rng(5)
        sub = rng.uniform(0, 50, size=(9, 9))
        high, low = local_extrema(sub)
        got = derive_subband_thresholds(sub, beta=2.2, k=1)
        assert got.shape == (1,)
        assert got[0] == pytest.approx(2.2 * np.max(high - low), rel=1e-12)

    def test_non_increasing_for_random_subbands(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            sub = rng.uniform(-20, 60, size=(8, 8))
            sched = derive_subband_thresholds(sub, beta=1.7, k=6)
            assert np.all(np.diff(sched) <= 1e-15)

    def test_negative_only_neighborhoods_are_skipped(self):
        # One pixel with H < 0 must not push the schedule upward at large k.
        sub = np.array(
            [
                [-1.0, -3.0, -1.0],
                [-3.0, -1.0, -3.0],
                [-1.0, -3.0, -1.0],
            ]
        )
        with pytest.raises(DegenerateReferenceError):
            derive_subband_thresholds(sub, beta=2.2, k=5)


class TestDeriveFull:
    def test_full_reference_derivation(self):
        rng = np.random.default_rng(7)
        reference = rng.uniform(0, 255, size=(32, 32))
        table = derive_thresholds(reference, beta=2.2, k=5, ad=DiffusionParams(iterations=3))
        assert table.K == 5
        assert set(table.thresholds) == set(ATP_SUBBAND_NAMES)
        for name in ATP_SUBBAND_NAMES:
            sched = np.asarray(table.thresholds[name])
            assert np.all(sched >= 0)
            assert np.all(np.diff(sched) <= 1e-12)

    def test_constant_reference_is_degenerate(self):
        with pytest.raises(DegenerateReferenceError):
            derive_thresholds(np.full((32, 32), 9.0), beta=2.2, k=5, ad=DiffusionParams(iterations=1))


class TestThresholdTable:
    def good_thresholds(self, k=3):
        return {name: list(np.linspace(5.0, 1.0, k)) for name in ATP_SUBBAND_NAMES}

    def test_json_round_trip(self, tmp_path):
        table = ThresholdTable(beta=2.2, thresholds=self.good_thresholds())
        path = tmp_path / "t.json"
        table.save(path)
        again = ThresholdTable.load(path)
        assert again.beta == table.beta
        assert again.thresholds == table.thresholds
        doc = json.loads(path.read_text())
        assert set(doc) == {"beta", "K", "subbands"}
        assert doc["K"] == 3

    def test_rejects_missing_subband(self):
        bad = self.good_thresholds()
        del bad["h2"]
        with pytest.raises(ValueError, match="h2"):
            ThresholdTable(beta=2.2, thresholds=bad)

    def test_rejects_increasing_sequence(self):
        bad = self.good_thresholds()
        bad["v1"] = [1.0, 2.0, 3.0]
        with pytest.raises(ValueError, match="non-increasing"):
            ThresholdTable(beta=2.2, thresholds=bad)

    def test_rejects_ragged_k(self):
        bad = self.good_thresholds()
        bad["d3"] = [5.0, 1.0]
        with pytest.raises(ValueError, match="d3"):
            ThresholdTable(beta=2.2, thresholds=bad)

    def test_rejects_negative_values(self):
        bad = self.good_thresholds()
        bad["a3"] = [5.0, 1.0, -0.5]
        with pytest.raises(ValueError, match="a3"):
            ThresholdTable(beta=2.2, thresholds=bad)

    def test_rejects_bad_beta(self):
        with pytest.raises(ValueError, match="beta"):
            ThresholdTable(beta=0.0, thresholds=self.good_thresholds())


class TestBundledTable:
    def test_shape_and_params(self):
        table = default_threshold_table()
        assert table.beta == 2.2
        assert table.K == 5
        assert set(table.thresholds) == set(ATP_SUBBAND_NAMES)

    def test_known_entries(self):
        table = default_threshold_table()
        assert table.thresholds["h1"][0] == pytest.approx(547.5502, abs=5e-5)
        assert table.thresholds["a3"][4] == pytest.approx(0.0113, abs=5e-5)
        assert table.thresholds["d3"][2] == pytest.approx(297.6996, abs=5e-5)

    def test_round_trips_to_four_decimals(self, tmp_path):
        table = default_threshold_table()
        path = tmp_path / "roundtrip.json"
        table.save(path)
        again = ThresholdTable.load(path)
        for name in ATP_SUBBAND_NAMES:
            assert np.allclose(again.thresholds[name], table.thresholds[name], atol=5e-5)
            assert again.thresholds[name] == table.thresholds[name]
