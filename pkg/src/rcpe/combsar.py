"""Minimax-CombSAR: successive halving over an enumerated action class.

Each round spreads ``m(r)`` pulls over the arms according to an allocation
vector chosen from the surviving actions, then keeps the top half of those
actions by estimated value.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateClassError, InsufficientBudgetError, InvalidSpecError
from .model import ACTION_ATOL, BanditInstance, PullLog, as_action_array, empirical_means, pull


class AllocationConvergenceWarning(RuntimeWarning):
    """The minimax allocation solver stopped before certifying optimality."""


def ceil_log2(d: int) -> int:
    return (int(d) - 1).bit_length()


def _phase_budget(T_prime: int, d: int, r: int) -> Fraction:
    R = ceil_log2(d)
    if T_prime <= d * R:
        raise InsufficientBudgetError(f"residual budget {T_prime} must exceed d*ceil(log2 d) = {d * R}")
    if not 1 <= r <= R:
        raise ValueError(f"round {r} outside 1..{R}")
    B = 2**R - 1
    return Fraction(T_prime - d * R, B) * 2 ** (r - 1)


def phase_budget(T_prime: int, d: int, r: int) -> float:
    """Pulls ``m(r)`` available in round ``r`` (real-valued, doubling each round)."""
    return float(_phase_budget(T_prime, d, r))


# ---------------------------------------------------------------- allocation


def _max_pair(A: np.ndarray, w: np.ndarray | None = None, block: int = 64):
    """Pair ``(i, j)``, ``i < j``, maximizing ``sum_s w_s (A_is - A_js)**2``.

    Ties go to the first pair in row-major order.
    """
    K = A.shape[0]
    best_val, best_pair = -math.inf, None
    for lo in range(0, K - 1, block):
        hi = min(lo + block, K - 1)
        sq = (A[lo:hi, None, :] - A[None, :, :]) ** 2
        vals = sq.sum(axis=2) if w is None else sq @ w
        rows = np.arange(lo, hi)[:, None]
        vals[np.arange(K)[None, :] <= rows] = -math.inf
        flat = int(np.argmax(vals))
        i, j = divmod(flat, K)
        if vals[i, j] > best_val:
            best_val, best_pair = float(vals[i, j]), (lo + i, j)
    return best_val, best_pair


def allocation_lagrange(active, log: PullLog | None = None, m: float | None = None) -> np.ndarray:
    """Closed-form allocation from the pair of surviving actions that is hardest to separate.

    With a uniform allocation every pair's variance proxy is proportional to
    its squared Euclidean distance, so that pair is the farthest one. The
    returned weights are its absolute coordinate differences, normalized.
    ``log`` and ``m`` do not change the result and are accepted for a uniform
    call signature.
    """
    A = as_action_array(active)
    if A.shape[0] < 2:
        raise ValueError("need at least two actions")
    val, (i, j) = _max_pair(A)
    if val <= ACTION_ATOL**2:
        raise DegenerateClassError("all actions are identical")
    diff = np.abs(A[i] - A[j])
    diff[diff <= ACTION_ATOL] = 0.0
    return diff / diff.sum()


def _minimax_value(C: np.ndarray, base: np.ndarray, m: float, p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = 1.0 / (base + m * p)
    inv[(C == 0).all(axis=0)] = 0.0
    return C @ inv


def _solve_restricted(C, base, m, x0):
    """min over the simplex of max_k sum_s C_ks / (base_s + m p_s), via an epigraph SLSQP."""
    d = C.shape[1]
    scale = float(_minimax_value(C, base, m, x0).max())
    Cs = C / scale
    lb = np.where(base > 0, 0.0, 1e-12)

    def constraints(z):
        p, t = z[:d], z[d]
        return t - Cs @ (1.0 / (base + m * p))

    def jac(z):
        p = z[:d]
        g = np.empty((Cs.shape[0], d + 1))
        g[:, :d] = Cs * (m / (base + m * p) ** 2)
        g[:, d] = 1.0
        return g

    z0 = np.r_[x0, float((Cs @ (1.0 / (base + m * x0))).max())]
    res = minimize(
        lambda z: z[d],
        z0,
        jac=lambda z: np.r_[np.zeros(d), 1.0],
        method="SLSQP",
        bounds=[(lb[s], 1.0) for s in range(d)] + [(0.0, None)],
        constraints=[
            {"type": "ineq", "fun": constraints, "jac": jac},
            {"type": "eq", "fun": lambda z: z[:d].sum() - 1.0, "jac": lambda z: np.r_[np.ones(d), 0.0]},
        ],
        options={"ftol": 1e-16, "maxiter": 2000},
    )
    p = np.clip(res.x[:d], lb, None)
    return p / p.sum()


def allocation_minimax(
    active,
    log: PullLog,
    m: float,
    *,
    objective: str = "kappa",
    max_cuts: int = 100,
) -> np.ndarray:
    """Allocation minimizing the worst pairwise variance proxy over surviving actions.

    The proxy for a pair ``(a, b)`` is ``sum_s (a_s - b_s)**2 / (T_s + m p_s)``
    with ``T_s`` the pulls so far (``objective="kappa"``) or
    ``sum_s (a_s - b_s)**2 / (m p_s)`` (``objective="lambda"``). Ceilings on
    per-arm pulls are ignored, which makes the problem convex. Pairs enter a
    working set one at a time (most violated first) until the working-set
    optimum is also optimal for all pairs.

    Returns:
        A point of the simplex. If ``max_cuts`` is exhausted the best iterate
        is returned and an :class:`AllocationConvergenceWarning` is issued.
    """
    A = as_action_array(active)
    if A.shape[0] < 2:
        raise ValueError("need at least two actions")
    if objective not in ("kappa", "lambda"):
        raise ValueError(f"unknown objective {objective!r}")
    if m <= 0:
        raise ValueError("m must be positive")
    support = np.ptp(A, axis=0) > ACTION_ATOL
    if not support.any():
        raise DegenerateClassError("all actions are identical")
    base_full = log.counts.astype(float) if objective == "kappa" else np.zeros(A.shape[1])
    sub = A[:, support]
    base = base_full[support]

    def worst(p):
        with np.errstate(divide="ignore"):
            w = 1.0 / (base + m * p)
        return _max_pair(sub, w)

    _, first = _max_pair(sub)
    pairs = [first]
    x0 = np.abs(sub[first[0]] - sub[first[1]]) + 1e-3
    x0 /= x0.sum()
    best_p, best_val = x0, worst(x0)[0]
    converged = False
    for _ in range(max_cuts):
        C = np.array([(sub[i] - sub[j]) ** 2 for i, j in pairs])
        p = _solve_restricted(C, base, m, best_p)
        restricted = float(_minimax_value(C, base, m, p).max())
        val, pair = worst(p)
        if val < best_val:
            best_p, best_val = p, val
        if val <= restricted * (1 + 1e-10) or pair in pairs:
            converged = True
            break
        pairs.append(pair)
    if not converged:
        warnings.warn("minimax allocation hit the cut limit", AllocationConvergenceWarning)
    out = np.zeros(A.shape[1])
    out[support] = best_p
    return out / out.sum()


# ---------------------------------------------------------------- elimination


def estimate_values(actions: np.ndarray, mu_hat: np.ndarray) -> np.ndarray:
    """``mu_hat @ pi`` per action; ``-inf`` if it relies on a never-pulled arm."""
    undefined = np.isnan(mu_hat)
    vals = actions @ np.where(undefined, 0.0, mu_hat)
    if undefined.any():
        vals[(actions[:, undefined] > 0).any(axis=1)] = -math.inf
    return vals


def eliminate(estimates, active: list, d: int, r: int) -> list:
    """Keep the ``ceil(d / 2**r)`` entries of ``active`` with the largest estimates.

    Survivors keep their original order; on ties the earlier entry wins.
    When fewer candidates remain than the cut, all of them survive.
    """
    est = np.asarray(estimates, dtype=float)
    if est.shape[0] != len(active):
        raise ValueError("one estimate per active action is required")
    keep = min(len(active), -(-d // 2**r))
    order = sorted(range(len(active)), key=lambda k: (-est[k], k))
    return [active[k] for k in sorted(order[:keep])]


# ---------------------------------------------------------------- driver


def _beta_fraction(beta: float) -> Fraction:
    # decimal reading, so that e.g. 0.3 * 100 is exactly 30
    return Fraction(repr(float(beta)))


def run_minimax_combsar(
    instance: BanditInstance,
    actions,
    T: int,
    beta: float = 0.2,
    mode: str = "lagrange",
    rng: np.random.Generator | None = None,
    *,
    log: PullLog | None = None,
    trace: list | None = None,
    objective: str = "kappa",
) -> np.ndarray:
    """Identify the best of ``actions`` with at most ``T`` pulls.

    Args:
        instance: Bandit instance supplying the rewards.
        actions: Enumerated action class, ``(K, d)``.
        T: Total budget.
        beta: Fraction of the budget spent on uniform initial sampling.
        mode: ``"lagrange"`` (closed form) or ``"minimax"``.
        rng: Source of reward noise.
        log: Optional empty log that receives every pull.
        trace: Optional list; the number of survivors after each round is
            appended to it.
        objective: Minimax objective, ``"kappa"`` or ``"lambda"``.

    Returns:
        The surviving action.
    """
    A = as_action_array(actions, instance.d)
    d = instance.d
    if not 0 <= beta <= 1:
        raise InvalidSpecError("beta must lie in [0, 1]")
    if mode not in ("lagrange", "minimax"):
        raise ValueError(f"unknown allocation mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng()
    log = log if log is not None else PullLog(d)
    T = int(T)
    n0 = math.floor(Fraction(T) * _beta_fraction(beta) / d)
    T_prime = T - n0 * d
    R = ceil_log2(d)
    if T_prime <= d * R:
        raise InsufficientBudgetError(
            f"budget T={T} leaves {T_prime} pulls after initialization; need more than {d * R}"
        )
    for s in range(d):
        pull(instance, log, s, n0, rng)

    active = list(range(A.shape[0]))
    if R == 0 and len(active) > 1:
        # single arm: no halving rounds, decide from the initial sample
        est = estimate_values(A, empirical_means(log))
        active = [int(np.argmax(est))]
    for r in range(1, R + 1):
        if len(active) == 1:
            break
        m = _phase_budget(T_prime, d, r)
        mf = float(m)
        if mode == "lagrange":
            p = allocation_lagrange(A[active], log, mf)
        else:
            p = allocation_minimax(A[active], log, mf, objective=objective)
        counts = [math.ceil(p[s] * mf) if p[s] > 0 else 0 for s in range(d)]
        if log.total + sum(counts) > T:
            raise RuntimeError("round would exceed the budget")
        for s in range(d):
            pull(instance, log, s, counts[s], rng)
        est = estimate_values(A[active], empirical_means(log))
        before = len(active)
        active = eliminate(est, active, d, r)
        if len(active) != min(before, -(-d // 2**r)):
            raise AssertionError(f"round {r} kept {len(active)} actions")
        if trace is not None:
            trace.append(len(active))
    if len(active) != 1:
        raise AssertionError(f"{len(active)} actions survived")
    return A[active[0]].copy()
