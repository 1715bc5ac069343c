"""
Tests for mutual-information estimates.
"""
import numpy as np
import pytest
from sklearn.metrics import mutual_info_score

from src.harness.information import histogram_discretize, mi_frame, mutual_information, slot_relevance
from src.mappings.report_format import MI_MATRIX_COLUMNS


class TestDiscretize:
    """
    Test cases for histogram_discretize.
    """

    def test_few_values_keep_codes(self):
        np.testing.assert_array_equal(histogram_discretize([3, 1, 3, 2], bins=4), [2, 0, 2, 1])

    def test_continuous_values_use_bins(self):
        codes = histogram_discretize(np.linspace(0, 1, 1000), bins=16)
        assert np.unique(codes).size == 16


class TestMutualInformation:
    """
    Test cases for mutual_information and mi_frame.
    """

    def test_self_information_is_entropy(self):
        rng = np.random.default_rng(0)
        factor = rng.integers(0, 4, size=3000)
        codes = histogram_discretize(factor, 16)
        entropy = mutual_info_score(codes, codes)
        assert mutual_information(factor, factor) == pytest.approx(entropy)
        counts = np.bincount(factor) / factor.size
        assert entropy == pytest.approx(-np.sum(counts * np.log(counts)))

    def test_independent_pairs_small(self):
        rng = np.random.default_rng(1)
        assert mutual_information(rng.random(10 ** 4), rng.random(10 ** 4)) < 0.05

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            mutual_information(np.zeros(10), np.zeros(10))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mutual_information(np.zeros(3000), np.zeros(2999))

    def test_frame(self):
        rng = np.random.default_rng(2)
        readouts = rng.random((2500, 3))
        factors = {'pile0.height': (readouts[:, 1] * 4).astype(int), 'pile0.offset': rng.integers(-3, 4, 2500)}
        frame = mi_frame(readouts, factors, bins=8)
        assert list(frame.columns) == MI_MATRIX_COLUMNS
        assert len(frame) == 6
        best = frame.loc[frame['factor'] == 'pile0.height'].sort_values('mi').iloc[-1]
        assert best['slot'] == 1

    def test_relevance_prefers_informative_slots(self):
        rng = np.random.default_rng(3)
        readouts = rng.random((400, 4))
        factors = {'height': (readouts[:, 0] * 3).astype(int)}
        usage = np.array([10.0, 0.0, 0.0, 0.0])
        result = slot_relevance(readouts, factors, usage, random_slots=np.array([2, 3]), bins=4)
        assert result['selected_mi'] > result['random_mi']
        assert result['n'] == 400
