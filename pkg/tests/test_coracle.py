import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bruteforce import knapsack_vectors, transport_plans
from rcpe.coracle import (
    BOTTOM,
    AssignmentSet,
    coracle,
    possible_pi,
    probe_coracle,
    solve_enumerated,
)
from rcpe.errors import InvalidSpecError
from rcpe.model import EnumeratedSpec, KnapsackSpec, TransportSpec


def brute_class(spec):
    if isinstance(spec, KnapsackSpec):
        return knapsack_vectors(spec.weights, spec.capacity)
    if isinstance(spec, TransportSpec):
        return np.array([p.reshape(-1) for p in transport_plans(spec.supplies, spec.demands)])
    return spec.actions


def restrict(A, S):
    mask = np.ones(len(A), dtype=bool)
    for e, x in S.items():
        mask &= A[:, e] == x
    return A[mask]


@st.composite
def small_specs(draw):
    kind = draw(st.sampled_from(["knapsack", "transport", "enumerated"]))
    if kind == "knapsack":
        d = draw(st.integers(1, 4))
        weights = draw(st.lists(st.integers(1, 8), min_size=d, max_size=d))
        return KnapsackSpec(weights, draw(st.integers(0, 16)))
    if kind == "transport":
        m, n = draw(st.integers(1, 3)), draw(st.integers(1, 3))
        supplies = draw(st.lists(st.integers(1, 3), min_size=m, max_size=m))
        demands = [1] * n
        for _ in range(sum(supplies) - n):
            demands[draw(st.integers(0, n - 1))] += 1
        if sum(supplies) < n:
            supplies[0] += n - sum(supplies)
        return TransportSpec(supplies, demands)
    d = draw(st.integers(1, 4))
    rows = draw(st.lists(st.lists(st.integers(0, 3), min_size=d, max_size=d), min_size=1, max_size=8, unique_by=tuple))
    return EnumeratedSpec(rows)


class TestAssignmentSet:
    def test_one_pair_per_arm(self):
        with pytest.raises(ValueError, match="twice"):
            AssignmentSet([(0, 1), (0, 2)])
        with pytest.raises(ValueError, match="already"):
            AssignmentSet({0: 1}).with_pair(0, 3)

    def test_is_a_mapping(self):
        S = AssignmentSet({2: 1.0}).with_pair(0, 3)
        assert dict(S) == {2: 1.0, 0: 3.0}
        assert S.satisfied_by([3, 9, 1])
        assert not S.satisfied_by([3, 9, 2])


class TestPossiblePi:
    def test_knapsack(self):
        assert possible_pi(KnapsackSpec([3, 4], 10), 0).tolist() == [0, 1, 2, 3]

    def test_transport(self):
        # cell (1, 2) in one-based terms
        assert possible_pi(TransportSpec([2, 1], [1, 2]), 1).tolist() == [0, 1, 2]

    def test_enumerated(self):
        assert possible_pi(EnumeratedSpec([[1, 0], [0, 1]]), 1).tolist() == [0, 1]

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            possible_pi(KnapsackSpec([1], 2), 1)


class TestSolveEnumerated:
    def test_examples(self):
        assert solve_enumerated([1, 0], [[1, 0], [0, 1]]).tolist() == [1, 0]
        assert solve_enumerated([0, 0], [[1, 0], [0, 1]]).tolist() == [1, 0]
        assert solve_enumerated([1, 0.5], [[2, 0], [0, 1], [1, 1]]).tolist() == [2, 0]

    def test_empty(self):
        with pytest.raises(InvalidSpecError, match="empty"):
            solve_enumerated([1.0], [])


class TestCoracle:
    def test_knapsack_over_capacity(self):
        assert coracle(KnapsackSpec([3, 4], 10), [5, 6], {0: 4}) is BOTTOM

    def test_knapsack_residual(self):
        assert coracle(KnapsackSpec([3, 4], 10), [5, 6], {0: 3}).tolist() == [3, 0]

    def test_knapsack_unconstrained_is_offline_oracle(self):
        assert coracle(KnapsackSpec([3, 4], 10), [5, 6], {}).tolist() == [2, 1]

    def test_knapsack_rejects_fractional_assignment(self):
        with pytest.raises(InvalidSpecError, match="integer"):
            coracle(KnapsackSpec([3, 4], 10), [5, 6], {0: 0.5})

    def test_transport_forced_residual(self):
        pi = coracle(TransportSpec([1, 1], [1, 1]), [0, 0, 0, 0], {0: 1})
        assert pi.tolist() == [1, 0, 0, 1]

    def test_transport_fixed_edge_gets_no_extra_flow(self):
        # a large reward on cell (0, 0) must not pull more than the fixed unit
        pi = coracle(TransportSpec([2, 1], [2, 1]), [100, 0, 0, 0], {0: 1})
        assert pi.tolist() == [1, 1, 1, 0]

    def test_transport_negative_residual(self):
        assert coracle(TransportSpec([1, 1], [1, 1]), [0] * 4, {0: 1, 1: 1}) is BOTTOM

    def test_transport_unroutable_residual(self):
        # row 0 keeps one unit but both of its cells are fixed to zero
        assert coracle(TransportSpec([1, 1], [1, 1]), [0] * 4, {0: 0, 1: 0}) is BOTTOM

    def test_enumerated_empty_restriction(self):
        assert coracle(EnumeratedSpec([[1, 0], [0, 1]]), [1, 1], {0: 0.5}) is BOTTOM

    def test_enumerated_tie_goes_to_first(self):
        spec = EnumeratedSpec([[1, 0, 1], [0, 1, 1], [1, 1, 0]])
        assert coracle(spec, [1, 1, 1], {2: 1}).tolist() == [1, 0, 1]

    @settings(max_examples=250, deadline=None)
    @given(spec=small_specs(), data=st.data())
    def test_feasible_and_optimal(self, spec, data):
        A = brute_class(spec)
        mu = np.array(data.draw(st.lists(st.integers(-4, 6), min_size=spec.d, max_size=spec.d)), dtype=float)
        arms = data.draw(st.lists(st.integers(0, spec.d - 1), unique=True, max_size=spec.d))
        S = AssignmentSet((e, data.draw(st.sampled_from(possible_pi(spec, e).tolist()))) for e in arms)
        res = coracle(spec, mu, S)
        A_S = restrict(A, S)
        if len(A_S) == 0:
            assert res is BOTTOM
            return
        assert res is not BOTTOM
        assert S.satisfied_by(res)
        assert any(np.array_equal(res, a) for a in A_S)
        assert res @ mu == np.max(A_S @ mu)

    @settings(max_examples=150, deadline=None)
    @given(spec=small_specs(), data=st.data())
    def test_adding_a_pair_never_helps(self, spec, data):
        mu = np.array(data.draw(st.lists(st.integers(-4, 6), min_size=spec.d, max_size=spec.d)), dtype=float)
        e = data.draw(st.integers(0, spec.d - 1))
        x = data.draw(st.sampled_from(possible_pi(spec, e).tolist()))
        base = coracle(spec, mu, {})
        tighter = coracle(spec, mu, {e: x})
        if tighter is not BOTTOM:
            assert tighter @ mu <= base @ mu

    @settings(max_examples=150, deadline=None)
    @given(spec=small_specs(), data=st.data())
    def test_probe_matches_individual_queries(self, spec, data):
        mu = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=spec.d, max_size=spec.d)))
        arms = data.draw(st.lists(st.integers(0, spec.d - 1), unique=True, min_size=1, max_size=spec.d))
        e, fixed = arms[0], arms[1:]
        S = AssignmentSet((u, possible_pi(spec, u)[0]) for u in fixed)
        values = possible_pi(spec, e)
        probes = probe_coracle(spec, mu, S, e, values)
        for x, got in zip(values, probes):
            want = coracle(spec, mu, S.with_pair(e, x))
            if want is None:
                assert got is None
            else:
                assert np.array_equal(got, want)
