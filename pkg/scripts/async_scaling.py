#!/usr/bin/env python3
"""Measure how the level-climbing asynchronous protocol scales.

For each clique size, runs seeded trials under the chosen scheduler and
prints messages normalized by n*log2(n) and elapsed time normalized by
log2(n), the two quantities the protocol is designed to keep bounded.
"""

import argparse
import math
import random

from cliquesim.async_engine import run_async
from cliquesim.experiments import SCHEDULERS, make_inputs
from cliquesim import protocols


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[16, 64, 256])
    ap.add_argument("--trials", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scheduler", default="random",
                    choices=sorted(SCHEDULERS))
    args = ap.parse_args()

    proto = protocols.async_levels()
    print("n,mean_msgs_per_nlogn,max_msgs_per_nlogn,"
          "mean_time_per_logn,max_time_per_logn,success_rate")
    for n in args.n:
        msgs, times, wins = [], [], 0
        for t in range(args.trials):
            seed = args.seed + t
            ids, pm = make_inputs(n, seed)
            delayfn = SCHEDULERS[args.scheduler](
                n, random.Random(f"{seed}/sched"))
            res = run_async(pm, ids, proto, seed=seed, delayfn=delayfn)
            msgs.append(res.messages / (n * math.log2(n)))
            times.append(res.elapsed() / math.log2(n))
            wins += res.unique_leader()
        print(f"{n},{sum(msgs)/len(msgs):.3f},{max(msgs):.3f},"
              f"{sum(times)/len(times):.3f},{max(times):.3f},"
              f"{wins/args.trials:.3f}")


if __name__ == "__main__":
    main()
