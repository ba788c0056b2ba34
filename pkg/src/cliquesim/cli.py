"""Command-line experiment runner: run | sweep | verify."""

import argparse
import os
import sys

from .model import ConfigError
from .experiments import (ExperimentSpec, run_experiment, records_to_csv,
                          records_to_jsonl, sweep, SCHEDULERS)
from . import acceptance

SEED_ENV = "CLIQUESIM_SEED"

_PARAM_FLAGS = ("ell", "k", "epsilon", "d", "g", "a", "b", "gamma")


def _int_list(s):
    return [int(x) for x in s.split(",")]


def _build_parser():
    p = argparse.ArgumentParser(
        prog="cliquesim",
        description="Leader-election simulation laboratory for clique "
                    "networks.")
    sub = p.add_subparsers(dest="cmd", required=True)
    default_seed = int(os.environ.get(SEED_ENV, "0"))

    def common(sp, multi_n=False):
        sp.add_argument("--algo", required=True,
                        choices=["improved_ag", "small_id", "las_vegas",
                                 "two_round", "async_tradeoff",
                                 "async_levels"])
        sp.add_argument("--n", type=_int_list if multi_n else int,
                        required=True)
        sp.add_argument("--ell", type=_int_list if multi_n else int)
        sp.add_argument("--k", type=_int_list if multi_n else int)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--d", type=_int_list if multi_n else int)
        sp.add_argument("--g", type=_int_list if multi_n else int)
        sp.add_argument("--a", type=float)
        sp.add_argument("--b", type=float)
        sp.add_argument("--gamma", type=int)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--seed", type=int, default=default_seed)
        sp.add_argument("--wake", default="simultaneous",
                        help="simultaneous|single|subset:<csv>|all")
        sp.add_argument("--scheduler", default="random",
                        choices=sorted(SCHEDULERS))
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", default="csv", choices=["csv", "jsonl"])
        sp.add_argument("--trace", action="store_true")

    common(sub.add_parser("run", help="run trials of one configuration"))
    common(sub.add_parser("sweep", help="summary CSV over a parameter grid"),
           multi_n=True)
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", default=None, help="substring filter")
    return p


def _params_from(args):
    return {k: getattr(args, k) for k in _PARAM_FLAGS
            if getattr(args, k, None) is not None}


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            spec = ExperimentSpec(args.algo, args.n, args.trials, args.seed,
                                  args.wake, args.scheduler,
                                  _params_from(args))
            records, summary = run_experiment(spec)
            text = (records_to_csv(records) if args.format == "csv"
                    else records_to_jsonl(records))
            _emit(text, args.out)
            print(f"# success_rate={summary['success_rate']:.4f} "
                  f"ci=[{summary['ci_low']:.4f},{summary['ci_high']:.4f}] "
                  f"mean_messages={summary['mean_messages']:.1f}",
                  file=sys.stderr)
            return 0
        if args.cmd == "sweep":
            grid = {k: v if isinstance(v, list) else [v]
                    for k, v in _params_from(args).items()}
            text = sweep(args.algo, args.n, grid, args.trials, args.seed,
                         args.wake, args.scheduler)
            _emit(text, args.out)
            return 0
        results = acceptance.run_all(only=args.only)
        for r in results:
            print(r.line())
        return 0 if results and all(r.passed for r in results) else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
