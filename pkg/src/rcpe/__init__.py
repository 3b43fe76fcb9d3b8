"""Fixed-budget best-action identification over real-valued combinatorial action classes."""

from .coracle import BOTTOM, AssignmentSet, coracle, possible_pi, probe_coracle, solve_enumerated
from .combsar import (
    allocation_lagrange,
    allocation_minimax,
    eliminate,
    phase_budget,
    run_minimax_combsar,
)
from .csa import phase_schedule, run_csa, select_assign_arm
from .knapsack import solve_knapsack, solve_knapsack_batch
from .metrics import best_action_bruteforce, g_gap, gap_report
from .model import (
    BanditInstance,
    EnumeratedSpec,
    KnapsackSpec,
    PullLog,
    TransportSpec,
    empirical_means,
    expected_value,
    sample_reward,
)
from .transport import solve_transport

__version__ = "0.1.0"

__all__ = [
    "BOTTOM",
    "AssignmentSet",
    "BanditInstance",
    "EnumeratedSpec",
    "KnapsackSpec",
    "PullLog",
    "TransportSpec",
    "allocation_lagrange",
    "allocation_minimax",
    "best_action_bruteforce",
    "coracle",
    "eliminate",
    "empirical_means",
    "expected_value",
    "g_gap",
    "gap_report",
    "phase_budget",
    "phase_schedule",
    "possible_pi",
    "probe_coracle",
    "run_csa",
    "run_minimax_combsar",
    "sample_reward",
    "select_assign_arm",
    "solve_enumerated",
    "solve_knapsack",
    "solve_knapsack_batch",
    "solve_transport",
]
