import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bruteforce import knapsack_best_value
from rcpe.errors import DimensionError, InvalidSpecError
from rcpe.knapsack import KnapsackTable, solve_knapsack, solve_knapsack_batch


class TestSolveKnapsack:
    def test_two_items(self):
        pi = solve_knapsack([5, 6], [3, 4], 10)
        assert pi.tolist() == [2, 1]
        assert pi @ [5, 6] == 16

    def test_zero_capacity(self):
        assert solve_knapsack([4.0, -1.0, 9.0], [1, 2, 3], 0).tolist() == [0, 0, 0]

    def test_single_item(self):
        pi = solve_knapsack([3], [2], 7)
        assert pi.tolist() == [3]
        assert pi @ [3] == 9

    def test_nonpositive_values_never_packed(self):
        assert solve_knapsack([-1.0, 0.0, -5.0], [1, 1, 2], 9).tolist() == [0, 0, 0]
        assert solve_knapsack([-1.0, 2.0], [1, 3], 7).tolist() == [0, 2]

    def test_tie_keeps_incumbent(self):
        # item 0 (w=1, v=1) and item 1 (w=2, v=2) tie at every even capacity
        assert solve_knapsack([1.0, 2.0], [1, 2], 4).tolist() == [4, 0]

    @pytest.mark.parametrize("weights", [[0, 1], [-2, 1], [1.5, 1]])
    def test_bad_weights(self, weights):
        with pytest.raises(InvalidSpecError, match="weights"):
            solve_knapsack([1.0, 1.0], weights, 5)

    def test_bad_capacity(self):
        with pytest.raises(InvalidSpecError, match="capacity"):
            solve_knapsack([1.0], [1], -1)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            solve_knapsack([1.0, 2.0], [1], 3)

    def test_nan_values_rejected(self):
        with pytest.raises(InvalidSpecError, match="finite"):
            solve_knapsack([np.nan], [1], 3)

    @settings(max_examples=150, deadline=None)
    @given(
        data=st.data(),
        d=st.integers(1, 5),
        capacity=st.integers(0, 25),
    )
    def test_matches_brute_force(self, data, d, capacity):
        weights = data.draw(st.lists(st.integers(1, 12), min_size=d, max_size=d))
        values = data.draw(st.lists(st.integers(-5, 30), min_size=d, max_size=d))
        pi = solve_knapsack(values, weights, capacity)
        assert pi @ weights <= capacity
        assert np.all(pi == np.round(pi)) and np.all(pi >= 0)
        assert pi @ values == knapsack_best_value(values, weights, capacity)


class TestTable:
    def test_smaller_capacities_match_fresh_solves(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=6)
        weights = rng.integers(1, 9, size=6)
        table = KnapsackTable(values, weights, 40)
        for c in range(41):
            assert np.array_equal(table.solution(c), solve_knapsack(values, weights, c))

    def test_capacity_outside_table(self):
        with pytest.raises(ValueError, match="outside"):
            KnapsackTable([1.0], [1], 3).solution(4)


class TestBatch:
    def test_matches_single_solves(self):
        rng = np.random.default_rng(1)
        weights = rng.integers(1, 30, size=7)
        values = rng.uniform(-2, 10, size=(50, 7))
        values[:5] = np.round(values[:5])  # integer rows exercise ties
        out = solve_knapsack_batch(values, weights, 60)
        for k in range(values.shape[0]):
            assert np.array_equal(out[k], solve_knapsack(values[k], weights, 60))

    def test_requires_2d(self):
        with pytest.raises(DimensionError, match="2-D"):
            solve_knapsack_batch([1.0, 2.0], [1, 2], 3)
