"""Unbounded knapsack by dynamic programming over capacities.

The recurrence is ``best[c] = max(best[c-1], max_i best[c-w_i] + v_i)``.
Capacities are scanned in ascending order and items in ascending index
order; an item replaces the running choice only on a strict improvement, so
ties keep the incumbent. Items with value ``<= 0`` can never improve on
``best[c-1]`` and are therefore never packed.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvalidSpecError


def _check_inputs(values, weights, capacity):
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights)
    if w.ndim != 1:
        raise DimensionError("weights must be 1-D")
    if v.shape[-1] != w.shape[0]:
        raise DimensionError(f"{v.shape[-1]} values for {w.shape[0]} weights")
    if not np.all(np.equal(np.mod(w, 1), 0)):
        raise InvalidSpecError("weights must be integers")
    w = w.astype(np.int64)
    if np.any(w < 1):
        raise InvalidSpecError("weights must be positive")
    if int(capacity) != capacity or capacity < 0:
        raise InvalidSpecError("capacity must be a nonnegative integer")
    if not np.all(np.isfinite(v)):
        raise InvalidSpecError("values must be finite")
    return v, w, int(capacity)


class KnapsackTable:
    """DP table for one value vector, reusable for every capacity up to ``capacity``.

    Solutions at a smaller capacity are identical to what a fresh solve at
    that capacity would return, because the table is filled bottom-up.
    """

    def __init__(self, values, weights, capacity: int):
        v, w, cap = _check_inputs(values, weights, capacity)
        self.weights = w
        self.capacity = cap
        items = [(i, int(w[i]), float(v[i])) for i in range(w.shape[0]) if v[i] > 0 and w[i] <= cap]
        best = [0.0] * (cap + 1)
        choice = [-1] * (cap + 1)
        for c in range(1, cap + 1):
            b = best[c - 1]
            ch = -1
            for i, wi, vi in items:
                if wi <= c:
                    cand = best[c - wi] + vi
                    if cand > b:
                        b = cand
                        ch = i
            best[c] = b
            choice[c] = ch
        self._best = best
        self._choice = choice

    def value(self, capacity: int) -> float:
        return self._best[capacity]

    def solution(self, capacity: int) -> np.ndarray:
        if not 0 <= capacity <= self.capacity:
            raise ValueError(f"capacity {capacity} outside table range 0..{self.capacity}")
        counts = np.zeros(self.weights.shape[0])
        c = capacity
        while c > 0:
            i = self._choice[c]
            if i < 0:
                c -= 1
            else:
                counts[i] += 1
                c -= self.weights[i]
        return counts


def solve_knapsack(values, weights, capacity: int) -> np.ndarray:
    """Best item counts for an unbounded knapsack.

    Args:
        values: Length-d per-copy values (may be negative).
        weights: Length-d positive integer weights.
        capacity: Nonnegative integer capacity.

    Returns:
        Float array of nonnegative integer counts.
    """
    return KnapsackTable(values, weights, capacity).solution(int(capacity))


def solve_knapsack_batch(values, weights, capacity: int) -> np.ndarray:
    """Solve many knapsacks sharing weights and capacity.

    ``values`` has shape ``(n, d)``. Row ``k`` of the result equals
    ``solve_knapsack(values[k], weights, capacity)``.
    """
    v, w, cap = _check_inputs(values, weights, capacity)
    if v.ndim != 2:
        raise DimensionError("batched values must be 2-D")
    n, d = v.shape
    best = np.zeros((n, cap + 1))
    choice = np.full((n, cap + 1), -1, dtype=np.int64)
    order = [i for i in range(d) if w[i] <= cap]
    for c in range(1, cap + 1):
        b = best[:, c - 1].copy()
        ch = np.full(n, -1, dtype=np.int64)
        for i in order:
            if w[i] <= c:
                cand = best[:, c - w[i]] + v[:, i]
                better = cand > b
                b[better] = cand[better]
                ch[better] = i
        best[:, c] = b
        choice[:, c] = ch
    counts = np.zeros((n, d))
    rows = np.arange(n)
    c = np.full(n, cap, dtype=np.int64)
    while True:
        live = c > 0
        if not live.any():
            break
        r = rows[live]
        ch = choice[r, c[live]]
        skip = ch < 0
        c[r[skip]] -= 1
        take = r[~skip]
        items = ch[~skip]
        np.add.at(counts, (take, items), 1)
        c[take] -= w[items]
    return counts
