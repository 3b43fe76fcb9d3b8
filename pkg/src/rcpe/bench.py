"""Knapsack instance generators, seeded trials and sweep aggregation."""

from __future__ import annotations

import csv
import io
import os
import time
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .combsar import run_minimax_combsar
from .csa import run_csa
from .errors import InvalidSpecError, MetricsUnavailableError
from .knapsack import solve_knapsack, solve_knapsack_batch
from .metrics import best_action_bruteforce, enumerate_knapsack
from .model import (
    BanditInstance,
    EnumeratedSpec,
    KnapsackSpec,
    PullLog,
    actions_equal,
    dedup_actions,
)

FAMILIES = ("knapsack-exp", "knapsack-poly")
ALGORITHMS = ("csa", "combsar")
CSV_COLUMNS = (
    "algo",
    "d",
    "T",
    "beta",
    "alloc",
    "trials",
    "successes",
    "success_rate",
    "mean_pulls",
    "mean_ms",
)
#: Brute-force cross-check of the DP ground truth runs only below this many vectors.
CROSSCHECK_CAP = 200_000


def gen_knapsack_instance(
    d: int, rng: np.random.Generator, *, capacity: int = 200, sigma: float = 1.0
) -> BanditInstance:
    """Random knapsack instance: weights in 1..200, values ``w * U[1, 1.1]``."""
    if d < 1:
        raise ValueError("d must be positive")
    weights = rng.integers(1, 201, size=d)
    values = weights * rng.uniform(1.0, 1.1, size=d)
    return BanditInstance(values, sigma, KnapsackSpec(weights, capacity))


def gen_enumerated_actions(instance: BanditInstance, n: int, rng: np.random.Generator) -> np.ndarray:
    """Knapsack solutions for ``n`` perturbed value vectors, duplicates removed.

    Value ``s`` of each perturbation is drawn from ``U[w_s, 1.1 w_s]``.
    """
    spec = instance.spec
    if not isinstance(spec, KnapsackSpec):
        raise InvalidSpecError("action sampling needs a knapsack instance")
    if n < 1:
        raise ValueError("n must be positive")
    w = spec.weights.astype(float)
    values = rng.uniform(w, 1.1 * w, size=(n, spec.d))
    return dedup_actions(solve_knapsack_batch(values, spec.weights, spec.capacity))


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from a master seed and a tuple of labels."""
    ss = np.random.SeedSequence([_key(master), *(_key(p) for p in parts)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass
class TrialRecord:
    algo: str
    d: int
    T: int
    seed: int
    pulls: int
    output: Optional[list]
    correct: bool
    wall_ms: float
    beta: Optional[float] = None
    alloc: Optional[str] = None
    trial: int = 0
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepConfig:
    dims: Sequence[int]
    budgets: Sequence[int]
    trials: int
    algorithms: Sequence[str] = ("csa",)
    family: str = "knapsack-exp"
    beta: float = 0.2
    alloc: str = "lagrange"
    master_seed: int = 0
    n_actions: int = 2000
    sigma: Optional[float] = None
    record_timing: bool = True
    workers: Optional[int] = None

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        self.budgets = [int(T) for T in self.budgets]
        self.algorithms = list(self.algorithms)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.dims or not self.budgets:
            raise ValueError("dims and budgets must be nonempty")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if "combsar" in self.algorithms and self.family != "knapsack-poly":
            raise ValueError("combsar needs an enumerated class: use family knapsack-poly")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        return cls(**data)


def ground_truth(instance: BanditInstance, actions: np.ndarray | None = None) -> np.ndarray:
    """Best action of a knapsack instance (DP) or of an explicit action list.

    For small knapsack classes the DP answer is checked against brute force.
    """
    if actions is not None:
        return best_action_bruteforce(instance.mu, actions)
    spec = instance.spec
    best = solve_knapsack(instance.mu, spec.weights, spec.capacity)
    if instance.d <= 6:
        try:
            brute = best_action_bruteforce(instance.mu, enumerate_knapsack(spec, CROSSCHECK_CAP))
        except MetricsUnavailableError:
            return best
        if not np.isclose(instance.mu @ brute, instance.mu @ best, rtol=1e-12, atol=0):
            raise RuntimeError("knapsack DP disagrees with brute force")
    return best


def run_trial(
    instance: BanditInstance,
    algo: str,
    T: int,
    seed: int,
    *,
    truth: np.ndarray,
    actions: np.ndarray | None = None,
    beta: float = 0.2,
    alloc: str = "lagrange",
    trial: int = 0,
    timing: bool = True,
) -> TrialRecord:
    """One seeded run; failures are captured in the record instead of raised."""
    rng = np.random.default_rng(seed)
    log = PullLog(instance.d)
    output, error = None, None
    start = time.perf_counter()
    try:
        if algo == "csa":
            run_inst = instance
            if actions is not None:
                run_inst = BanditInstance(instance.mu, instance.noise_sigma, EnumeratedSpec(actions))
            output = run_csa(run_inst, T, rng, log=log)
        elif algo == "combsar":
            if actions is None:
                raise InvalidSpecError("combsar needs an explicit action list")
            output = run_minimax_combsar(instance, actions, T, beta, alloc, rng, log=log)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
    except Exception as exc:  # recorded, never fatal
        error = f"{type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - start) * 1000.0 if timing else 0.0
    correct = output is not None and actions_equal(output, truth)
    is_combsar = algo == "combsar"
    return TrialRecord(
        algo=algo,
        d=instance.d,
        T=int(T),
        seed=int(seed),
        pulls=log.total,
        output=None if output is None else [float(x) for x in output],
        correct=bool(correct),
        wall_ms=wall,
        beta=float(beta) if is_combsar else None,
        alloc=alloc if is_combsar else None,
        trial=trial,
        error=error,
    )


def _run_cell(args) -> list[TrialRecord]:
    config, d, trial = args
    inst_rng = np.random.default_rng(derive_seed(config.master_seed, "instance", config.family, d, trial))
    instance = gen_knapsack_instance(d, inst_rng)
    if config.sigma is not None:
        instance = instance.with_sigma(config.sigma)
    actions = None
    if config.family == "knapsack-poly":
        actions = gen_enumerated_actions(instance, config.n_actions, inst_rng)
    truth = ground_truth(instance, actions)
    records = []
    for algo in config.algorithms:
        for T in config.budgets:
            seed = derive_seed(config.master_seed, d, T, algo, trial)
            records.append(
                run_trial(
                    instance,
                    algo,
                    T,
                    seed,
                    truth=truth,
                    actions=actions,
                    beta=config.beta,
                    alloc=config.alloc,
                    trial=trial,
                    timing=config.record_timing,
                )
            )
    return records


def worker_count(requested: int | None = None) -> int:
    """Parallel workers: ``requested``, capped by ``CPE_THREADS`` when set."""
    n = requested or os.cpu_count() or 1
    env = os.environ.get("CPE_THREADS")
    if env:
        n = min(n, int(env))
    return max(1, n)


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[TrialRecord] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return aggregate(self.records)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())


def run_sweep(config: SweepConfig) -> SweepResult:
    """Run every (d, trial) cell for every algorithm and budget.

    Output depends only on ``config``: each cell draws its instance and each
    run its noise from seeds derived from the master seed.
    """
    cells = [(config, d, trial) for d in config.dims for trial in range(config.trials)]
    workers = worker_count(config.workers)
    if workers == 1 or len(cells) == 1:
        chunks = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell, cells))
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.algo, r.d, r.T, r.trial))
    return SweepResult(config, records)


def _group_order(item):
    algo, d, T, beta, alloc = item[0]
    return algo, d, T, str(beta), str(alloc)


def aggregate(records: Iterable[TrialRecord]) -> list[dict]:
    """One row per (algo, d, T, beta, alloc), ordered by those keys."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.algo, r.d, r.T, r.beta, r.alloc), []).append(r)
    rows = []
    for (algo, d, T, beta, alloc), recs in sorted(groups.items(), key=_group_order):
        n = len(recs)
        wins = sum(r.correct for r in recs)
        rows.append(
            {
                "algo": algo,
                "d": d,
                "T": T,
                "beta": "" if beta is None else beta,
                "alloc": "" if alloc is None else alloc,
                "trials": n,
                "successes": wins,
                "success_rate": wins / n,
                "mean_pulls": sum(r.pulls for r in recs) / n,
                "mean_ms": sum(r.wall_ms for r in recs) / n,
            }
        )
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def emit_plot_data(records: Sequence[TrialRecord], group_by: Sequence[str] = ("algo", "T")) -> dict:
    """Success fraction against ``d``, one series per ``group_by`` key.

    Returns:
        ``{key: [{"d", "successes", "trials", "y"}, ...]}`` with points sorted
        by ``d``. Empty groups are dropped with a warning.
    """
    if not records:
        raise ValueError("no records")
    series: dict[tuple, dict[int, list[bool]]] = {}
    for r in records:
        key = tuple(getattr(r, k) for k in group_by)
        series.setdefault(key, {}).setdefault(r.d, []).append(bool(r.correct))
    out = {}
    for key in sorted(series, key=lambda k: tuple(str(x) for x in k)):
        points = [
            {"d": d, "successes": sum(v), "trials": len(v), "y": sum(v) / len(v)}
            for d, v in sorted(series[key].items())
            if v
        ]
        if not points:
            warnings.warn(f"group {key} has no trials; omitted")
            continue
        out[key] = points
    return out


def plot_data_csv(series: dict, group_by: Sequence[str] = ("algo", "T")) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*group_by, "d", "successes", "trials", "y"])
    for key, points in series.items():
        for pt in points:
            writer.writerow([*key, pt["d"], pt["successes"], pt["trials"], repr(pt["y"])])
    return buf.getvalue()
