import numpy as np
import pytest

from pplp.discretize import (
    entropy_distance,
    equal_frequency,
    equal_width,
    occupancy,
    _distance,
)
from pplp.errors import ContractError, DegenerateInputError


class TestEqualWidth:
    def test_five_bins(self):
        assert equal_width(list(range(11)), 5).cutpoints == (0, 2, 4, 6, 8, 10)

    def test_single_bin(self):
        assert equal_width([0.0, 3.0, 10.0], 1).cutpoints == (0.0, 10.0)

    def test_negative_span(self):
        got = equal_width([-1.0, 0.2, 1.0], 4).cutpoints
        assert got == pytest.approx((-1.0, -0.5, 0.0, 0.5, 1.0), abs=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            equal_width([2.0, 2.0, 2.0], 3)
        with pytest.raises(DegenerateInputError):
            equal_width([1.0, 2.0], 0)

    def test_unsorted_rejected(self):
        with pytest.raises(ContractError):
            equal_width([3.0, 1.0, 2.0], 2)


class TestEqualFrequency:
    def test_median_split(self):
        assert equal_frequency(list(range(1, 11)), 2).cutpoints == (1, 5, 10)

    def test_index_formula(self):
        assert equal_frequency(list(range(1, 10)), 3).cutpoints == (1, 3, 6, 9)

    def test_single_bin(self):
        assert equal_frequency([1.0, 4.0, 9.0], 1).cutpoints == (1.0, 9.0)

    def test_too_few_distinct(self):
        with pytest.raises(DegenerateInputError):
            equal_frequency([1.0, 1.0, 2.0, 2.0], 3)

    def test_tie_shifts_to_midpoint(self):
        # the 3rd element sits inside a run of 2s: cut moves past the run
        data = [1.0, 2.0, 2.0, 2.0, 3.0, 4.0]
        got = equal_frequency(data, 2)
        assert got.cutpoints == (1.0, 2.5, 4.0)

    def test_ties_can_merge_bins(self):
        # the cut lands in a run of the maximum value: no room to shift,
        # so the bins merge
        data = [1.0, 2.0, 2.0, 2.0, 2.0, 2.0]
        got = equal_frequency(data, 2)
        assert got.cutpoints == (1.0, 2.0)
        assert got.bins == 1


class TestEntropyDistance:
    def test_single_boundary(self):
        got = entropy_distance([(1, "A"), (2, "A"), (3, "B"), (4, "B")], 2)
        assert got.cutpoints == (1.0, 2.5, 4.0)
        assert not got.auto_stopped

    def test_exhaustive_midpoint_choice(self):
        # evaluating all three adjacent midpoints: only the class boundary
        # carries zero normalised distance
        labels = ["A", "A", "B", "B"]
        dists = [_distance(labels, s) for s in (1, 2, 3)]
        assert min(range(3), key=lambda i: dists[i]) == 1
        assert dists[1] == pytest.approx(0.0, abs=1e-12)

    def test_single_class_falls_back(self):
        got = entropy_distance([(1, "A"), (2, "A"), (3, "A")], 2)
        assert got.cutpoints == (1.0, 3.0)
        assert got.auto_stopped

    def test_single_bin_request(self):
        got = entropy_distance([(1, "A"), (2, "B")], 1)
        assert got.cutpoints == (1.0, 2.0)
        assert not got.auto_stopped

    def test_auto_mode(self):
        got = entropy_distance([(1, "A"), (2, "B"), (3, "A")], None)
        assert got.bins >= 2
        assert got.auto_stopped


class TestInvariants:
    def test_span(self):
        rng = np.random.default_rng(0)
        data = np.sort(rng.uniform(-7, 13, 40))
        labels = rng.integers(0, 2, 40)
        for disc in (
            equal_width(data, 6),
            equal_frequency(data, 6),
            entropy_distance(list(zip(data, labels)), 4),
        ):
            assert disc.cutpoints[0] == data[0]
            assert disc.cutpoints[-1] == data[-1]

    def test_equal_widths(self):
        rng = np.random.default_rng(1)
        data = np.sort(rng.uniform(0, 113.7, 50))
        disc = equal_width(data, 9)
        widths = np.diff(disc.cutpoints)
        assert np.all(np.abs(widths - widths[0]) <= 1e-12 * widths[0])

    def test_occupancy_balance_without_duplicates(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            n = int(rng.integers(10, 60))
            l = int(rng.integers(1, 8))
            if n < l + 1:
                continue
            data = np.sort(rng.normal(0, 10, n))
            disc = equal_frequency(data, l)
            counts = occupancy(disc, data)
            assert sum(counts) == n
            assert max(counts) - min(counts) <= 1

    def test_greedy_matches_exhaustive_at_max_bins(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            n = int(rng.integers(4, 13))
            values = np.sort(rng.uniform(0, 10, n))
            while len(set(values)) < n:
                values = np.sort(rng.uniform(0, 10, n))
            labels = rng.integers(0, 3, n)
            pairs = list(zip(values, labels))
            # exhaustive: all achievable split sets, maximal size
            from pplp.discretize import _boundary_splits

            candidates = _boundary_splits(values, list(labels))
            greedy = entropy_distance(pairs, len(candidates) + 1)
            best_cuts = {
                (values[s - 1] + values[s]) / 2.0 for s in candidates
            }
            assert set(greedy.cutpoints[1:-1]) == best_cuts
