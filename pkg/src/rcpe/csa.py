"""Combinatorial Successive Assign (CSA) for fixed-budget best-action identification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from .coracle import AssignmentSet, OracleResult, coracle, possible_pi, probe_coracle
from .errors import InsufficientBudgetError
from .model import ACTION_ATOL, BanditInstance, PullLog, empirical_means, pull


def harmonic(n: int) -> Fraction:
    """``1 + 1/2 + ... + 1/n`` as an exact fraction."""
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def phase_schedule(T: int, d: int) -> list[int]:
    """Cumulative per-arm pull targets ``T~(1..d)``.

    Evaluated in exact rational arithmetic so that the ceilings, and with
    them the ``sum(T~) <= T`` budget guarantee, are not at the mercy of
    rounding.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if T <= d:
        raise InsufficientBudgetError(f"budget T={T} must exceed d={d}")
    h = harmonic(d)
    return [math.ceil(Fraction(T - d) / (h * (d - t + 1))) for t in range(1, d + 1)]


def select_assign_arm(
    mu_hat,
    pi_hat,
    alternatives: Mapping[int, Optional[np.ndarray]],
    active,
) -> int:
    """Active arm with the largest empirical gap ratio.

    Args:
        mu_hat: Current mean estimates.
        pi_hat: Constrained empirical best action.
        alternatives: For each active arm, the best action that differs from
            ``pi_hat`` there, or ``None`` when none exists.
        active: Unassigned arms.

    Returns:
        The chosen arm. An arm without alternatives scores ``+inf``; ties go
        to the lowest index.
    """
    mu_hat = np.asarray(mu_hat, dtype=float)
    pi_hat = np.asarray(pi_hat, dtype=float)
    best_arm, best_score = None, -math.inf
    for e in sorted(active):
        alt = alternatives.get(e)
        if alt is None:
            score = math.inf
        else:
            score = float(mu_hat @ (pi_hat - alt)) / abs(pi_hat[e] - alt[e])
        if best_arm is None or score > best_score:
            best_arm, best_score = e, score
    if best_arm is None:
        raise ValueError("no active arms")
    return best_arm


@dataclass
class CsaState:
    """Bookkeeping of one CSA run, exposed for inspection and tests."""

    schedule: list[int]
    log: PullLog
    S: AssignmentSet = field(default_factory=AssignmentSet)
    phase: int = 0
    history: list[tuple[int, float]] = field(default_factory=list)

    @property
    def frozen(self) -> set[int]:
        return set(self.S)


def _best_alternative(instance, mu_hat, S, e, pi_hat) -> Optional[np.ndarray]:
    values = [x for x in possible_pi(instance.spec, e) if abs(x - pi_hat[e]) > ACTION_ATOL]
    best, best_val = None, -math.inf
    # ascending candidate values, strict improvement: lowest value wins ties
    for res in probe_coracle(instance.spec, mu_hat, S, e, values):
        if res is None:
            continue
        val = float(mu_hat @ res)
        if val > best_val:
            best, best_val = res, val
    return best


def run_csa(
    instance: BanditInstance,
    T: int,
    rng: np.random.Generator,
    *,
    log: PullLog | None = None,
    state: CsaState | None = None,
) -> OracleResult:
    """Run CSA with budget ``T``.

    Args:
        instance: Bandit instance; its spec supplies the COracle.
        T: Total number of pulls allowed; must exceed ``d``.
        rng: Source of reward noise.
        log: Optional empty log that receives every pull.
        state: Optional fresh :class:`CsaState` filled in as the run
            progresses; overrides ``log``.

    Returns:
        The identified action, or ``None`` if a constrained query failed.
    """
    d = instance.d
    schedule = phase_schedule(T, d)
    if state is None:
        state = CsaState(schedule=schedule, log=log if log is not None else PullLog(d))
    else:
        state.schedule = schedule
    log = state.log
    S = AssignmentSet()
    prev = 0
    for t in range(1, d + 1):
        state.phase = t
        active = [e for e in range(d) if e not in S]
        n = schedule[t - 1] - prev
        prev = schedule[t - 1]
        for e in active:
            pull(instance, log, e, n, rng)
        mu_hat = empirical_means(log)
        pi_hat = coracle(instance.spec, mu_hat, S)
        if pi_hat is None:
            state.S = S
            return None
        alternatives = {e: _best_alternative(instance, mu_hat, S, e, pi_hat) for e in active}
        p = select_assign_arm(mu_hat, pi_hat, alternatives, active)
        S = S.with_pair(p, pi_hat[p])
        state.history.append((p, float(pi_hat[p])))
        state.S = S
    out = np.zeros(d)
    for e, x in S.items():
        out[e] = x
    return out
