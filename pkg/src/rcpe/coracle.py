"""Offline oracles with coordinate constraints (COracle) and POSSIBLE-PI.

A constrained query returns the best action whose coordinates match every
``(arm, value)`` pair of an :class:`AssignmentSet`, or ``None`` (written
``BOTTOM`` below) when no such action exists.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from .errors import DimensionError, InfeasibleError, InvalidSpecError
from .knapsack import KnapsackTable
from .model import (
    ACTION_ATOL,
    ActionClassSpec,
    EnumeratedSpec,
    KnapsackSpec,
    TransportSpec,
    as_action_array,
)
from .transport import solve_transport

BOTTOM = None
OracleResult = Optional[np.ndarray]


class AssignmentSet(Mapping):
    """Immutable map from arm index to its fixed value."""

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable[tuple[int, float]] | Mapping = ()):
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        fixed: dict[int, float] = {}
        for e, x in items:
            e = int(e)
            if e in fixed:
                raise ValueError(f"arm {e} assigned twice")
            fixed[e] = float(x)
        self._pairs = fixed

    def __getitem__(self, e: int) -> float:
        return self._pairs[e]

    def __iter__(self) -> Iterator[int]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __repr__(self) -> str:
        return f"AssignmentSet({sorted(self._pairs.items())})"

    def with_pair(self, e: int, x: float) -> "AssignmentSet":
        if int(e) in self._pairs:
            raise ValueError(f"arm {e} already assigned")
        return AssignmentSet([*self._pairs.items(), (int(e), x)])

    def satisfied_by(self, pi, atol: float = ACTION_ATOL) -> bool:
        pi = np.asarray(pi, dtype=float)
        return all(abs(pi[e] - x) <= atol for e, x in self._pairs.items())


def _check_arm(spec: ActionClassSpec, e: int) -> int:
    e = int(e)
    if not 0 <= e < spec.d:
        raise IndexError(f"arm {e} out of range for d={spec.d}")
    return e


def possible_pi(spec: ActionClassSpec, e: int) -> np.ndarray:
    """Ascending candidate values of coordinate ``e`` over the action class."""
    e = _check_arm(spec, e)
    if isinstance(spec, EnumeratedSpec):
        return np.unique(spec.actions[:, e])
    if isinstance(spec, KnapsackSpec):
        return np.arange(spec.capacity // int(spec.weights[e]) + 1, dtype=float)
    if isinstance(spec, TransportSpec):
        i, j = spec.cell(e)
        return np.arange(min(spec.supplies[i], spec.demands[j]) + 1, dtype=float)
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def solve_enumerated(mu, actions) -> np.ndarray:
    """Action with the largest ``mu @ pi``; the first one wins ties."""
    arr = as_action_array(actions)
    mu = np.asarray(mu, dtype=float)
    if mu.shape[0] != arr.shape[1]:
        raise DimensionError(f"mu has length {mu.shape[0]}, actions have {arr.shape[1]}")
    return arr[int(np.argmax(arr @ mu))].copy()


def _as_int(x: float) -> int:
    k = round(x)
    if abs(x - k) > ACTION_ATOL or k < 0:
        raise InvalidSpecError(f"assigned value {x} is not a nonnegative integer")
    return int(k)


def _knapsack_residual(spec: KnapsackSpec, S: AssignmentSet) -> int:
    return spec.capacity - sum(_as_int(x) * int(spec.weights[e]) for e, x in S.items())


def _coracle_knapsack(spec: KnapsackSpec, mu, S: AssignmentSet) -> OracleResult:
    residual = _knapsack_residual(spec, S)
    if residual < 0:
        return BOTTOM
    free = [e for e in range(spec.d) if e not in S]
    pi = np.zeros(spec.d)
    for e, x in S.items():
        pi[e] = _as_int(x)
    if free:
        table = KnapsackTable(mu[free], spec.weights[free], residual)
        pi[free] = table.solution(residual)
    return pi


def _coracle_transport(spec: TransportSpec, mu, S: AssignmentSet) -> OracleResult:
    m, n = spec.m, spec.n
    fixed = np.zeros((m, n))
    supplies = spec.supplies.astype(np.int64).copy()
    demands = spec.demands.astype(np.int64).copy()
    cost = -np.asarray(mu, dtype=float).reshape(m, n)
    for e, x in S.items():
        i, j = spec.cell(e)
        k = _as_int(x)
        fixed[i, j] = k
        supplies[i] -= k
        demands[j] -= k
        # no further flow on an assigned cell
        cost[i, j] = np.inf
    if np.any(supplies < 0) or np.any(demands < 0):
        return BOTTOM
    try:
        rest = solve_transport(cost, supplies, demands)
    except InfeasibleError:
        return BOTTOM
    return (fixed + rest).reshape(-1)


def _coracle_enumerated(spec: EnumeratedSpec, mu, S: AssignmentSet) -> OracleResult:
    A = spec.actions
    mask = np.ones(A.shape[0], dtype=bool)
    for e, x in S.items():
        mask &= np.abs(A[:, e] - x) <= ACTION_ATOL
    if not mask.any():
        return BOTTOM
    idx = np.flatnonzero(mask)
    return A[idx[int(np.argmax(A[idx] @ mu))]].copy()


def coracle(spec: ActionClassSpec, mu, S: AssignmentSet | Mapping = AssignmentSet()) -> OracleResult:
    """Best action agreeing with every pair in ``S``, or ``BOTTOM``.

    Args:
        spec: The action class.
        mu: Length-d value vector to maximize.
        S: Fixed coordinates.

    Returns:
        The constrained maximizer, or ``None`` when no action satisfies ``S``.
    """
    if not isinstance(S, AssignmentSet):
        S = AssignmentSet(S)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape[0] != spec.d:
        raise DimensionError(f"mu has length {mu.shape[0]}, expected {spec.d}")
    for e in S:
        _check_arm(spec, e)
    if isinstance(spec, KnapsackSpec):
        return _coracle_knapsack(spec, mu, S)
    if isinstance(spec, TransportSpec):
        return _coracle_transport(spec, mu, S)
    if isinstance(spec, EnumeratedSpec):
        return _coracle_enumerated(spec, mu, S)
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def probe_coracle(
    spec: ActionClassSpec, mu, S: AssignmentSet, e: int, values
) -> list[OracleResult]:
    """``[coracle(spec, mu, S.with_pair(e, x)) for x in values]``, computed faster.

    For knapsack classes every probe shares the residual item set, so one DP
    table serves all of them.
    """
    mu = np.asarray(mu, dtype=float).reshape(-1)
    e = _check_arm(spec, e)
    if e in S:
        raise ValueError(f"arm {e} already assigned")
    if not isinstance(spec, KnapsackSpec):
        return [coracle(spec, mu, S.with_pair(e, x)) for x in values]
    residual = _knapsack_residual(spec, S)
    w_e = int(spec.weights[e])
    ks = [_as_int(x) for x in values]
    free = [u for u in range(spec.d) if u not in S and u != e]
    top = max([residual - k * w_e for k in ks], default=-1)
    table = KnapsackTable(mu[free], spec.weights[free], top) if free and top >= 0 else None
    base = np.zeros(spec.d)
    for u, x in S.items():
        base[u] = _as_int(x)
    out: list[OracleResult] = []
    for k in ks:
        r = residual - k * w_e
        if r < 0:
            out.append(BOTTOM)
            continue
        pi = base.copy()
        pi[e] = k
        if table is not None:
            pi[free] = table.solution(r)
        out.append(pi)
    return out
