"""Hardness quantities for enumerable action classes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInstanceError, DimensionError, MetricsUnavailableError
from .model import (
    ACTION_ATOL,
    ActionClassSpec,
    EnumeratedSpec,
    KnapsackSpec,
    TransportSpec,
    as_action_array,
)

DEFAULT_ENUMERATION_CAP = 10**6


def best_action_bruteforce(mu, actions) -> np.ndarray:
    """Exhaustive argmax of ``mu @ pi``; the earliest action wins ties."""
    arr = as_action_array(actions)
    mu = np.asarray(mu, dtype=float)
    if mu.shape[0] != arr.shape[1]:
        raise DimensionError(f"mu has length {mu.shape[0]}, actions have {arr.shape[1]}")
    best, best_val = 0, -math.inf
    for k, pi in enumerate(arr):
        val = float(np.dot(mu, pi))
        if val > best_val:
            best, best_val = k, val
    return arr[best].copy()


def _unique_best(mu, arr: np.ndarray) -> tuple[int, np.ndarray]:
    values = arr @ mu
    k = int(np.argmax(values))
    top = values[k]
    tol = 1e-12 * max(1.0, abs(top))
    if np.count_nonzero(values >= top - tol) > 1:
        raise DegenerateInstanceError("the best action is not unique")
    return k, values


def _gaps(mu, arr: np.ndarray, k: int, values: np.ndarray) -> np.ndarray:
    diff = np.abs(arr[k] - arr)
    loss = values[k] - values
    d = arr.shape[1]
    gaps = np.full(d, np.nan)
    for s in range(d):
        differ = diff[:, s] > ACTION_ATOL
        if differ.any():
            gaps[s] = np.min(loss[differ] / diff[differ, s])
    return gaps


def g_gap(mu, actions, s: int) -> float:
    """G-gap of coordinate ``s``; ``nan`` when no action differs from the best there."""
    arr = as_action_array(actions)
    mu = np.asarray(mu, dtype=float)
    if not 0 <= s < arr.shape[1]:
        raise IndexError(f"coordinate {s} out of range")
    k, values = _unique_best(mu, arr)
    diff = np.abs(arr[k, s] - arr[:, s])
    differ = diff > ACTION_ATOL
    if not differ.any():
        return math.nan
    return float(np.min((values[k] - values[differ]) / diff[differ]))


def hardness(gaps) -> tuple[float, float]:
    """``(H, H2)`` from a gap vector, ignoring undefined (``nan``) entries.

    ``H`` is summed with :func:`math.fsum` so that ``H2 <= H`` holds exactly
    in floating point.
    """
    g = np.asarray(gaps, dtype=float)
    g = np.sort(g[~np.isnan(g)])
    if g.size == 0:
        return 0.0, 0.0
    inv = 1.0 / (g * g)
    H = math.fsum(inv)
    H2 = max((i + 1) * float(inv[i]) for i in range(inv.size))
    return H, H2


def constant_L(actions) -> float:
    """Largest ratio of the farthest to the nearest distinct value, per coordinate."""
    arr = as_action_array(actions)
    best = math.nan
    for e in range(arr.shape[1]):
        vals = np.unique(arr[:, e])
        if vals.size < 2:
            continue
        far = np.maximum(vals - vals[0], vals[-1] - vals)
        gaps = np.diff(vals)
        near = np.minimum(np.r_[np.inf, gaps], np.r_[gaps, np.inf])
        ratio = float(np.max(far / near))
        best = ratio if math.isnan(best) else max(best, ratio)
    return best


def _l1_over_min(diff: np.ndarray) -> np.ndarray:
    nz = np.where(diff > ACTION_ATOL, diff, np.inf).min(axis=1)
    return diff.sum(axis=1) / nz


def constant_U(actions) -> float:
    """Max over action pairs and differing coordinates of ``|pi - pi'|_1 / |pi_e - pi'_e|``."""
    arr = as_action_array(actions)
    best = math.nan
    for i in range(arr.shape[0] - 1):
        diff = np.abs(arr[i + 1 :] - arr[i])
        ratio = _l1_over_min(diff)
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size:
            r = float(ratio.max())
            best = r if math.isnan(best) else max(best, r)
    return best


def constant_V(actions, best: np.ndarray) -> tuple[float, float]:
    """Both forms of the elimination constant relative to ``best``.

    Returns:
        ``(V, V_alt)`` where ``V`` squares the ratio of the L1 distance to the
        largest coordinate difference and ``V_alt`` is the unsquared ratio to
        the smallest nonzero coordinate difference.
    """
    arr = as_action_array(actions)
    diff = np.abs(arr - best)
    others = diff.max(axis=1) > ACTION_ATOL
    if not others.any():
        return math.nan, math.nan
    diff = diff[others]
    # argmax picks the lowest coordinate on ties, and the value is the same
    V = float(np.max((diff.sum(axis=1) / diff.max(axis=1)) ** 2))
    V_alt = float(np.max(_l1_over_min(diff)))
    return V, V_alt


@dataclass(frozen=True, eq=False)
class GapReport:
    gaps: np.ndarray
    H: float
    H2: float
    L: float
    U_A: float
    V: float
    V_alt: float
    best: np.ndarray

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or math.isnan(x) else float(x)

        return {
            "gaps": [num(g) for g in self.gaps],
            "H": num(self.H),
            "H2": num(self.H2),
            "L": num(self.L),
            "U_A": num(self.U_A),
            "V": num(self.V),
            "V_alt": num(self.V_alt),
            "best": [float(x) for x in self.best],
        }


def gap_report(mu, actions) -> GapReport:
    """Gaps, ``H``, ``H2``, ``L``, ``U_A`` and ``V`` of an enumerated class.

    Raises:
        DegenerateInstanceError: if the best action is not unique.
    """
    arr = as_action_array(actions)
    mu = np.asarray(mu, dtype=float)
    if mu.shape[0] != arr.shape[1]:
        raise DimensionError(f"mu has length {mu.shape[0]}, actions have {arr.shape[1]}")
    k, values = _unique_best(mu, arr)
    gaps = _gaps(mu, arr, k, values)
    H, H2 = hardness(gaps)
    V, V_alt = constant_V(arr, arr[k])
    return GapReport(
        gaps=gaps,
        H=H,
        H2=H2,
        L=constant_L(arr),
        U_A=constant_U(arr),
        V=V,
        V_alt=V_alt,
        best=arr[k].copy(),
    )


# ---------------------------------------------------------------- enumeration


def enumerate_knapsack(spec: KnapsackSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Every count vector that fits the capacity."""
    W = spec.capacity
    partial = np.zeros((1, 0))
    used = np.zeros(1, dtype=np.int64)
    for w in spec.weights:
        w = int(w)
        reps = (W - used) // w + 1
        total = int(reps.sum())
        if total > cap:
            raise MetricsUnavailableError(f"more than {cap} candidate vectors")
        rows = np.repeat(np.arange(partial.shape[0]), reps)
        starts = np.repeat(np.cumsum(reps) - reps, reps)
        counts = np.arange(total) - starts
        partial = np.hstack([partial[rows], counts[:, None].astype(float)])
        used = used[rows] + counts * w
    return partial


def enumerate_transport(spec: TransportSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Every integer plan with the given marginals, flattened row-major."""
    m, n = spec.m, spec.n
    plans: list[list[int]] = []
    cells = [0] * (m * n)

    def fill(e: int, rows: list[int], cols: list[int]) -> None:
        if len(plans) > cap:
            raise MetricsUnavailableError(f"more than {cap} candidate vectors")
        if e == m * n:
            if not any(rows) and not any(cols):
                plans.append(list(cells))
            return
        i, j = divmod(e, n)
        if j == n - 1:
            # last cell of a row must absorb the remaining supply
            choices = [rows[i]] if rows[i] <= cols[j] else []
        else:
            choices = range(min(rows[i], cols[j]) + 1)
        for x in choices:
            cells[e] = x
            rows[i] -= x
            cols[j] -= x
            fill(e + 1, rows, cols)
            rows[i] += x
            cols[j] += x
        cells[e] = 0

    fill(0, [int(x) for x in spec.supplies], [int(x) for x in spec.demands])
    return np.array(plans, dtype=float).reshape(-1, m * n)


def enumerate_action_class(spec: ActionClassSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """All actions of ``spec`` as a ``(K, d)`` array.

    Knapsack and transport classes are enumerated as their full feasible
    sets. Raises :class:`MetricsUnavailableError` above ``cap`` vectors.
    """
    if isinstance(spec, EnumeratedSpec):
        return spec.actions.copy()
    if isinstance(spec, KnapsackSpec):
        return enumerate_knapsack(spec, cap)
    if isinstance(spec, TransportSpec):
        return enumerate_transport(spec, cap)
    raise TypeError(f"unknown spec type {type(spec).__name__}")
