"""Command-line entry point: ``rcpe gen|actions|run|sweep|metrics``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    SweepConfig,
    derive_seed,
    gen_enumerated_actions,
    gen_knapsack_instance,
    ground_truth,
    run_sweep,
    run_trial,
)
from .coracle import solve_enumerated
from .metrics import DEFAULT_ENUMERATION_CAP, enumerate_action_class, gap_report
from .model import (
    EnumeratedSpec,
    KnapsackSpec,
    TransportSpec,
    load_actions,
    load_instance,
    save_actions,
    save_instance,
)
from .transport import solve_transport


def _cmd_gen(args) -> int:
    if args.family != "knapsack":
        raise SystemExit(f"unsupported family {args.family!r}")
    inst = gen_knapsack_instance(args.d, np.random.default_rng(args.seed), sigma=args.sigma)
    save_instance(inst, args.output)
    return 0


def _cmd_actions(args) -> int:
    inst = load_instance(args.instance)
    actions = gen_enumerated_actions(inst, args.n, np.random.default_rng(args.seed))
    save_actions(actions, args.output)
    print(f"{actions.shape[0]} distinct actions", file=sys.stderr)
    return 0


def _truth(inst, actions):
    if actions is not None:
        return ground_truth(inst, actions)
    spec = inst.spec
    if isinstance(spec, KnapsackSpec):
        return ground_truth(inst)
    if isinstance(spec, TransportSpec):
        return solve_transport(-inst.mu.reshape(spec.m, spec.n), spec.supplies, spec.demands).reshape(-1)
    return solve_enumerated(inst.mu, spec.actions)


def _cmd_run(args) -> int:
    inst = load_instance(args.instance)
    actions = load_actions(args.actions) if args.actions else None
    if actions is None and isinstance(inst.spec, EnumeratedSpec):
        actions = inst.spec.actions
    seed = args.seed if args.raw_seed else derive_seed(args.seed, inst.d, args.budget, args.algo, 0)
    record = run_trial(
        inst,
        args.algo,
        args.budget,
        seed,
        truth=_truth(inst, actions),
        actions=actions,
        beta=args.beta,
        alloc=args.alloc,
    )
    print(json.dumps(record.to_dict()))
    return 0 if record.error is None else 1


def _cmd_sweep(args) -> int:
    config = SweepConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    result = run_sweep(config)
    Path(args.output).write_text(result.to_csv(), encoding="utf-8")
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for r in result.records:
                fh.write(json.dumps(r.to_dict()) + "\n")
    return 0


def _cmd_metrics(args) -> int:
    inst = load_instance(args.instance)
    if args.actions:
        actions = load_actions(args.actions)
    else:
        actions = enumerate_action_class(inst.spec, args.cap)
    print(json.dumps(gap_report(inst.mu, actions).to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcpe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--family", default="knapsack")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("actions", help="sample an enumerated action class")
    p.add_argument("--instance", required=True)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_actions)

    p = sub.add_parser("run", help="run one trial and print its record as JSON")
    p.add_argument("--algo", choices=("csa", "combsar"), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--actions")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--alloc", choices=("lagrange", "minimax"), default="lagrange")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw-seed", action="store_true", help="use --seed directly as the noise seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a sweep from a JSON config and write the CSV")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--records", help="also write per-trial records as JSON lines")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("metrics", help="print gaps and hardness constants as JSON")
    p.add_argument("--instance", required=True)
    p.add_argument("--actions")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
