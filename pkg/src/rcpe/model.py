"""Bandit instances, action classes, reward sampling and pull bookkeeping.

Arms are indexed ``0..d-1`` throughout the package. An action is a 1-D
``float64`` array of length ``d`` with nonnegative entries; an action class
given by enumeration is stored as a ``(K, d)`` array, one action per row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, InvalidSpecError

#: Two actions are equal when every entry differs by at most this amount.
ACTION_ATOL = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_action(pi, d: int | None = None) -> np.ndarray:
    """Convert ``pi`` to a validated action vector.

    Args:
        pi: Sequence of nonnegative reals.
        d: Expected length, or ``None`` to accept any length.

    Returns:
        A fresh 1-D float64 array.
    """
    vec = np.array(pi, dtype=float).reshape(-1)
    if d is not None and vec.shape[0] != d:
        raise DimensionError(f"action has length {vec.shape[0]}, expected {d}")
    if np.any(vec < 0) or not np.all(np.isfinite(vec)):
        raise InvalidSpecError("action entries must be finite and nonnegative")
    return vec


def as_action_array(actions, d: int | None = None) -> np.ndarray:
    """Stack a list of actions into a ``(K, d)`` float array."""
    arr = np.array(actions, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        raise InvalidSpecError("action list is empty")
    if arr.ndim != 2:
        raise DimensionError("actions must form a 2-D array")
    if arr.shape[0] == 0:
        raise InvalidSpecError("action list is empty")
    if d is not None and arr.shape[1] != d:
        raise DimensionError(f"actions have length {arr.shape[1]}, expected {d}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidSpecError("action entries must be finite and nonnegative")
    return arr


def actions_equal(a, b, atol: float = ACTION_ATOL) -> bool:
    """Entrywise equality within ``atol``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return False
    return bool(np.all(np.abs(a - b) <= atol))


def dedup_actions(actions, atol: float = ACTION_ATOL) -> np.ndarray:
    """Drop repeated rows, keeping the first occurrence of each action.

    Exact duplicates are removed by hashing; the survivors are then
    compared pairwise with tolerance ``atol``.
    """
    arr = as_action_array(actions)
    _, first = np.unique(arr, axis=0, return_index=True)
    candidates = arr[np.sort(first)]
    keep: list[int] = []
    for i in range(candidates.shape[0]):
        if keep:
            diff = np.abs(candidates[keep] - candidates[i]).max(axis=1)
            if np.any(diff <= atol):
                continue
        keep.append(i)
    return candidates[keep]


@dataclass(frozen=True, eq=False)
class EnumeratedSpec:
    """Action class given as an explicit list of distinct actions."""

    actions: np.ndarray

    def __post_init__(self):
        arr = as_action_array(self.actions)
        if dedup_actions(arr).shape[0] != arr.shape[0]:
            raise InvalidSpecError("enumerated actions must be pairwise distinct")
        object.__setattr__(self, "actions", _frozen(arr))

    @property
    def d(self) -> int:
        return int(self.actions.shape[1])


@dataclass(frozen=True, eq=False)
class KnapsackSpec:
    """Unbounded knapsack: integer counts with total weight at most ``capacity``."""

    weights: np.ndarray
    capacity: int

    def __post_init__(self):
        w = np.array(self.weights).reshape(-1)
        if w.size == 0:
            raise InvalidSpecError("knapsack needs at least one item")
        if not np.all(np.equal(np.mod(w, 1), 0)):
            raise InvalidSpecError("knapsack weights must be integers")
        w = w.astype(np.int64)
        if np.any(w < 1):
            raise InvalidSpecError("knapsack weights must be positive")
        cap = self.capacity
        if int(cap) != cap or cap < 0:
            raise InvalidSpecError("capacity must be a nonnegative integer")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "capacity", int(cap))

    @property
    def d(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True, eq=False)
class TransportSpec:
    """Integer transport plans with fixed row and column sums.

    Arm ``e`` corresponds to cell ``(i, j)`` with ``e = i * n + j``.
    """

    supplies: np.ndarray
    demands: np.ndarray

    def __post_init__(self):
        s = np.array(self.supplies).reshape(-1)
        t = np.array(self.demands).reshape(-1)
        for name, arr in (("supplies", s), ("demands", t)):
            if arr.size == 0:
                raise InvalidSpecError(f"{name} must be nonempty")
            if not np.all(np.equal(np.mod(arr, 1), 0)) or np.any(arr < 1):
                raise InvalidSpecError(f"{name} must be positive integers")
        s = s.astype(np.int64)
        t = t.astype(np.int64)
        if s.sum() != t.sum():
            raise InvalidSpecError(
                f"unbalanced marginals: supplies sum to {s.sum()}, demands to {t.sum()}"
            )
        object.__setattr__(self, "supplies", _frozen(s))
        object.__setattr__(self, "demands", _frozen(t))

    @property
    def m(self) -> int:
        return int(self.supplies.shape[0])

    @property
    def n(self) -> int:
        return int(self.demands.shape[0])

    @property
    def d(self) -> int:
        return self.m * self.n

    def cell(self, e: int) -> tuple[int, int]:
        """Row and column of arm ``e``."""
        return divmod(int(e), self.n)


ActionClassSpec = Union[EnumeratedSpec, KnapsackSpec, TransportSpec]


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """True means, Gaussian noise level and action class of one problem."""

    mu: np.ndarray
    noise_sigma: float
    spec: ActionClassSpec

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if mu.size < 1:
            raise InvalidSpecError("need at least one arm")
        if not np.all(np.isfinite(mu)):
            raise InvalidSpecError("means must be finite")
        if mu.size != self.spec.d:
            raise DimensionError(f"mu has length {mu.size} but the spec has d={self.spec.d}")
        sigma = float(self.noise_sigma)
        if not sigma >= 0:
            raise InvalidSpecError("noise_sigma must be nonnegative")
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "noise_sigma", sigma)

    @property
    def d(self) -> int:
        return int(self.mu.shape[0])

    def with_sigma(self, sigma: float) -> "BanditInstance":
        return BanditInstance(self.mu.copy(), sigma, self.spec)


class PullLog:
    """Per-arm pull counts and reward sums.

    Running means are maintained next to the sums so that repeated identical
    rewards reproduce their value bit for bit (``sums / counts`` can be off by
    an ulp). Both agree up to rounding.
    """

    def __init__(self, d: int):
        if d < 1:
            raise InvalidSpecError("d must be positive")
        self.counts = np.zeros(d, dtype=np.int64)
        self.sums = np.zeros(d, dtype=float)
        self._means = np.full(d, np.nan)

    @classmethod
    def from_arrays(cls, counts, sums) -> "PullLog":
        counts = np.asarray(counts, dtype=np.int64).reshape(-1)
        sums = np.asarray(sums, dtype=float).reshape(-1)
        if counts.shape != sums.shape:
            raise DimensionError("counts and sums differ in length")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        log = cls(counts.shape[0])
        log.counts[:] = counts
        log.sums[:] = sums
        pulled = counts > 0
        log._means[pulled] = sums[pulled] / counts[pulled]
        return log

    @property
    def d(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def defined(self) -> np.ndarray:
        return self.counts > 0

    def record(self, arm: int, rewards) -> None:
        """Add a batch of rewards observed on ``arm``."""
        rewards = np.asarray(rewards, dtype=float).reshape(-1)
        k = rewards.shape[0]
        if k == 0:
            return
        # shifted mean: exact when every reward is identical
        batch_mean = rewards[0] + np.mean(rewards - rewards[0])
        old = self.counts[arm]
        self.counts[arm] = old + k
        self.sums[arm] += rewards.sum()
        if old == 0:
            self._means[arm] = batch_mean
        else:
            m = self._means[arm]
            self._means[arm] = m + (batch_mean - m) * (k / (old + k))

    def means(self) -> np.ndarray:
        return self._means.copy()

    def copy(self) -> "PullLog":
        other = PullLog(self.d)
        other.counts[:] = self.counts
        other.sums[:] = self.sums
        other._means[:] = self._means
        return other


def empirical_means(log: PullLog) -> np.ndarray:
    """Per-arm empirical means; ``nan`` marks arms that were never pulled."""
    return log.means()


def _check_arm(instance: BanditInstance, arm: int) -> int:
    arm = int(arm)
    if not 0 <= arm < instance.d:
        raise IndexError(f"arm {arm} out of range for d={instance.d}")
    return arm


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    """One Gaussian reward ``mu[arm] + sigma * z``."""
    arm = _check_arm(instance, arm)
    return float(instance.mu[arm] + instance.noise_sigma * rng.standard_normal())


def sample_rewards(
    instance: BanditInstance, arm: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` rewards from ``arm``; same stream as ``n`` calls to :func:`sample_reward`."""
    arm = _check_arm(instance, arm)
    return instance.mu[arm] + instance.noise_sigma * rng.standard_normal(int(n))


def pull(
    instance: BanditInstance, log: PullLog, arm: int, n: int, rng: np.random.Generator
) -> None:
    """Draw ``n`` rewards from ``arm`` and record them."""
    if n > 0:
        log.record(arm, sample_rewards(instance, arm, n, rng))


def expected_value(mu, pi) -> float:
    """Inner product of the mean vector with an action."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    pi = np.asarray(pi, dtype=float).reshape(-1)
    if mu.shape != pi.shape:
        raise DimensionError(f"length mismatch: {mu.shape[0]} vs {pi.shape[0]}")
    return float(mu @ pi)


# ---------------------------------------------------------------- JSON


def _int_list(arr) -> list[int]:
    return [int(x) for x in arr]


def spec_to_dict(spec: ActionClassSpec) -> dict:
    if isinstance(spec, KnapsackSpec):
        return {"type": "knapsack", "weights": _int_list(spec.weights), "capacity": spec.capacity}
    if isinstance(spec, TransportSpec):
        return {
            "type": "transport",
            "supplies": _int_list(spec.supplies),
            "demands": _int_list(spec.demands),
        }
    if isinstance(spec, EnumeratedSpec):
        return {"type": "enumerated", "actions": spec.actions.tolist()}
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def spec_from_dict(data: dict) -> ActionClassSpec:
    kind = data.get("type")
    if kind == "knapsack":
        return KnapsackSpec(data["weights"], data["capacity"])
    if kind == "transport":
        return TransportSpec(data["supplies"], data["demands"])
    if kind == "enumerated":
        return EnumeratedSpec(data["actions"])
    raise InvalidSpecError(f"unknown spec type {kind!r}")


def instance_to_dict(instance: BanditInstance) -> dict:
    return {
        "d": instance.d,
        "mu": [float(x) for x in instance.mu],
        "sigma": instance.noise_sigma,
        "spec": spec_to_dict(instance.spec),
    }


def instance_from_dict(data: dict) -> BanditInstance:
    inst = BanditInstance(data["mu"], data["sigma"], spec_from_dict(data["spec"]))
    if inst.d != int(data["d"]):
        raise DimensionError(f"declared d={data['d']} but mu has length {inst.d}")
    return inst


def save_instance(instance: BanditInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance)) + "\n", encoding="utf-8")


def load_instance(path) -> BanditInstance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_actions(actions: Sequence, path) -> None:
    arr = as_action_array(actions)
    Path(path).write_text(json.dumps({"actions": arr.tolist()}) + "\n", encoding="utf-8")


def load_actions(path) -> np.ndarray:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data["actions"]
    return as_action_array(data)
