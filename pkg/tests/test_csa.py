import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcpe.coracle import AssignmentSet
from rcpe.csa import CsaState, harmonic, phase_schedule, run_csa, select_assign_arm
from rcpe.errors import InsufficientBudgetError
from rcpe.metrics import best_action_bruteforce
from rcpe.model import BanditInstance, EnumeratedSpec, KnapsackSpec, PullLog, TransportSpec


class TestSchedule:
    def test_example(self):
        assert harmonic(3) == pytest.approx(11 / 6)
        assert phase_schedule(13, 3) == [2, 3, 6]

    def test_single_arm(self):
        assert phase_schedule(17, 1) == [16]

    @pytest.mark.parametrize("T, d", [(3, 3), (1, 4), (0, 1)])
    def test_budget_too_small(self, T, d):
        with pytest.raises(InsufficientBudgetError, match="exceed"):
            phase_schedule(T, d)

    @settings(max_examples=300, deadline=None)
    @given(d=st.integers(1, 60), extra=st.integers(1, 10**6))
    def test_monotone_and_within_budget(self, d, extra):
        T = d + extra
        sched = phase_schedule(T, d)
        assert sched[0] >= 1
        assert all(a <= b for a, b in zip(sched, sched[1:]))
        pulls = sum((d - t) * (sched[t] - (sched[t - 1] if t else 0)) for t in range(d))
        assert pulls == sum(sched) <= T


class TestSelectAssignArm:
    def test_tie_goes_to_lowest_arm(self):
        alts = {0: np.array([0.0, 1.0]), 1: np.array([0.0, 1.0])}
        assert select_assign_arm([1, 0.2], [1, 0], alts, [0, 1]) == 0

    def test_forced_arm_wins(self):
        alts = {0: np.array([0.0, 1.0]), 1: None}
        assert select_assign_arm([100, 0], [1, 0], alts, [0, 1]) == 1

    def test_single_active(self):
        assert select_assign_arm([1, 2, 3], [0, 1, 0], {2: np.array([0, 1, 1])}, [2]) == 2

    def test_absolute_denominator(self):
        # alternative is larger at e, so pi_hat_e - alt_e is negative
        alts = {0: np.array([3.0, 0.0]), 1: np.array([0.0, 0.0])}
        mu = np.array([1.0, 1.0])
        pi = np.array([1.0, 1.0])
        # arm 0: <mu, (-2, 1)> / 2 = -0.5 ; arm 1: <mu, (1, 1)> / 1 = 2
        assert select_assign_arm(mu, pi, alts, [0, 1]) == 1


def enum_instance(actions, mu, sigma=0.0):
    return BanditInstance(mu, sigma, EnumeratedSpec(actions))


class TestRunCsa:
    def test_zero_noise_binary(self):
        out = run_csa(enum_instance([[1, 0], [0, 1]], [1.0, 0.0]), 10, np.random.default_rng(0))
        assert out.tolist() == [1, 0]

    @pytest.mark.parametrize("T", [3, 4, 50])
    def test_zero_noise_knapsack(self, T):
        inst = BanditInstance([5.0, 6.0], 0.0, KnapsackSpec([3, 4], 10))
        assert run_csa(inst, T, np.random.default_rng(1)).tolist() == [2, 1]

    def test_pull_accounting(self):
        log = PullLog(3)
        inst = enum_instance([[1, 0, 0], [0, 1, 1]], [0.3, 0.2, 0.2], sigma=1.0)
        run_csa(inst, 13, np.random.default_rng(0), log=log)
        assert log.total == 11
        # arm assigned first stops after phase 1, the last one runs all phases
        assert sorted(log.counts.tolist()) == [2, 3, 6]

    def test_state_progress(self):
        inst = BanditInstance([1.0, 2.0, 0.5, 1.5], 1.0, KnapsackSpec([2, 3, 1, 2], 7))
        state = CsaState(schedule=[], log=PullLog(4))
        out = run_csa(inst, 200, np.random.default_rng(4), state=state)
        assert state.phase == 4
        assert len(state.history) == 4
        assert sorted(e for e, _ in state.history) == [0, 1, 2, 3]
        assert state.frozen == {0, 1, 2, 3}
        assert all(out[e] == x for e, x in state.history)
        assert out @ [2, 3, 1, 2] <= 7

    def test_transport_output_is_a_plan(self):
        spec = TransportSpec([2, 1], [1, 2])
        inst = BanditInstance(np.arange(4) * 0.1, 1.0, spec)
        out = run_csa(inst, 400, np.random.default_rng(2)).reshape(2, 2)
        assert out.sum(axis=1).tolist() == [2, 1]
        assert out.sum(axis=0).tolist() == [1, 2]

    def test_deterministic(self):
        inst = BanditInstance([1.0, 2.0, 0.5], 2.0, KnapsackSpec([2, 3, 1], 9))
        logs = [PullLog(3), PullLog(3)]
        outs = [run_csa(inst, 300, np.random.default_rng(8), log=lg) for lg in logs]
        assert np.array_equal(outs[0], outs[1])
        assert np.array_equal(logs[0].sums, logs[1].sums)

    def test_budget_error_propagates(self):
        with pytest.raises(InsufficientBudgetError):
            run_csa(enum_instance([[1, 0], [0, 1]], [1, 0]), 2, np.random.default_rng(0))

    @settings(max_examples=60, deadline=None)
    @given(data=st.data(), d=st.integers(1, 6))
    def test_zero_noise_exact_enumerated(self, data, d):
        rows = data.draw(
            st.lists(st.lists(st.integers(0, 3), min_size=d, max_size=d), min_size=1, max_size=15, unique_by=tuple)
        )
        A = np.array(rows, dtype=float)
        mu = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d)))
        v = np.sort(A @ mu)
        if len(v) > 1 and v[-1] - v[-2] < 1e-9:
            return
        out = run_csa(enum_instance(A, mu), d + 1 + data.draw(st.integers(0, 100)), np.random.default_rng(0))
        assert np.array_equal(out, best_action_bruteforce(mu, A))

    @settings(max_examples=40, deadline=None)
    @given(data=st.data(), d=st.integers(1, 5))
    def test_noisy_output_respects_assignments(self, data, d):
        weights = data.draw(st.lists(st.integers(1, 6), min_size=d, max_size=d))
        inst = BanditInstance(
            data.draw(st.lists(st.floats(-1, 3), min_size=d, max_size=d)), 1.0, KnapsackSpec(weights, 12)
        )
        state = CsaState(schedule=[], log=PullLog(d))
        T = d + data.draw(st.integers(1, 500))
        out = run_csa(inst, T, np.random.default_rng(data.draw(st.integers(0, 99))), state=state)
        assert state.log.total <= T
        assert out is not None
        assert AssignmentSet(dict(state.S)).satisfied_by(out)
        assert out @ weights <= 12
