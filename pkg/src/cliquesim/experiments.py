"""Monte Carlo experiment runner: seeded trials, summaries, CSV/JSONL."""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field

from .model import (UNDECIDED, ConfigError, random_id_assignment,
                    random_port_mapping)
from .sync_engine import run_sync
from .async_engine import (run_async, unit_delay, uniform_random_delay,
                           FROM_FIRST_WAKE)
from .adversary import slow_competes, fast_wakeups_slow_elections, fifo_stress
from . import protocols

CSV_HEADER = ("trial,algo,n,params,rounds_or_time,messages,"
              "leader_count,leader_id,success,attempts,seconds")

SCHEDULERS = {
    "unit": unit_delay(),
    "random": uniform_random_delay(),
    "slow-competes": slow_competes(),
    "fast-wake-slow-elect": fast_wakeups_slow_elections(),
    "fifo-stress": fifo_stress(),
}

SYNC_ALGOS = {"improved_ag", "small_id", "las_vegas", "two_round"}
ASYNC_ALGOS = {"async_tradeoff", "async_levels"}


@dataclass
class ExperimentSpec:
    algo: str
    n: int
    trials: int = 1
    seed: int = 0
    wake: str = "simultaneous"
    scheduler: str = "random"
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.algo not in SYNC_ALGOS | ASYNC_ALGOS:
            raise ConfigError(f"unknown algo {self.algo!r}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")


@dataclass
class ExperimentRecord:
    trial: int
    algo: str
    n: int
    params: str
    rounds_or_time: float
    messages: int
    leader_count: int
    leader_id: object      # uid, or "" without a unique leader
    success: bool
    attempts: int
    seconds: float

    def csv_row(self):
        rt = self.rounds_or_time
        rt = str(rt) if isinstance(rt, int) else f"{rt:.6f}"
        return (f"{self.trial},{self.algo},{self.n},{self.params},{rt},"
                f"{self.messages},{self.leader_count},{self.leader_id},"
                f"{int(self.success)},{self.attempts},{self.seconds:.6f}")


def wilson_interval(successes, trials, z=1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) \
        / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _protocol_for(algo, params):
    if algo == "improved_ag":
        return protocols.improved_afek_gafni(int(params.get("ell", 3)))
    if algo == "small_id":
        return protocols.small_id_broadcast(int(params.get("d", 1)),
                                            int(params.get("g", 1)))
    if algo == "las_vegas":
        return protocols.las_vegas_three_round(float(params.get("a", 4)),
                                               float(params.get("b", 4)))
    if algo == "two_round":
        return protocols.two_round_adversarial(float(params.get("epsilon",
                                                                0.1)))
    if algo == "async_tradeoff":
        return protocols.async_tradeoff(int(params.get("k", 2)),
                                        int(params.get("gamma", 4)))
    if algo == "async_levels":
        return protocols.async_levels()
    raise ConfigError(f"unknown algo {algo!r}")


def params_string(params):
    return ";".join(f"{k}={params[k]}" for k in sorted(params)) or "-"


def mapping_seed(seed):
    return random.Random(f"{seed}/map").getrandbits(63)


def make_inputs(n, seed, universe=None):
    """Per-trial identities and port mapping, on RNG streams separate from
    the node tapes (the mapping stays oblivious to protocol randomness)."""
    if universe is None:
        universe = max(n * n, n)
    ids = random_id_assignment(n, universe, random.Random(f"{seed}/ids"))
    return ids, random_port_mapping(n, mapping_seed(seed))


def sync_wake(mode, n, rng=None):
    if mode in ("simultaneous", "all"):
        return {u: 1 for u in range(n)}
    if mode == "single":
        return {0: 1}
    if mode == "half":
        rng = rng or random.Random(0)
        return {u: 1 for u in rng.sample(range(n), max(1, n // 2))}
    if mode.startswith("subset:"):
        nodes = [int(x) for x in mode[len("subset:"):].split(",") if x != ""]
        if not nodes:
            raise ConfigError("empty wake subset")
        return {u: 1 for u in nodes}
    raise ConfigError(f"unknown wake mode {mode!r}")


def async_wake(mode, n, rng=None):
    return {u: 0.0 for u in sync_wake(mode, n, rng)}


def run_trial(spec, trial, pm=None, ids=None):
    """One seeded trial.  pm/ids may be supplied to reuse inputs."""
    seed = spec.seed + trial
    n = spec.n
    algo = spec.algo
    universe = n * int(spec.params.get("g", 1)) if algo == "small_id" else None
    t0 = time.perf_counter()
    if ids is None or pm is None:
        ids, pm = make_inputs(n, seed, universe)
    proto = _protocol_for(algo, spec.params)
    wake_rng = random.Random(f"{seed}/wake")
    attempts = 1
    if algo in SYNC_ALGOS:
        res = run_sync(pm, ids, proto, seed=seed,
                       wake=sync_wake(spec.wake, n, wake_rng))
        rounds_or_time = res.rounds
        if algo == "las_vegas":
            attempts = max((nd.attempts for nd in res.nodes
                            if nd is not None), default=0)
    else:
        delayfn = SCHEDULERS[spec.scheduler](
            n, random.Random(f"{seed}/sched"))
        res = run_async(pm, ids, proto, seed=seed,
                        wake=async_wake(spec.wake, n, wake_rng),
                        delayfn=delayfn)
        rounds_or_time = res.elapsed(FROM_FIRST_WAKE)
    leaders = res.leaders
    success = len(leaders) == 1 and all(d != UNDECIDED for d in res.decisions)
    leader_id = res.uids[leaders[0]] if len(leaders) == 1 else ""
    return ExperimentRecord(
        trial, algo, n, params_string(spec.params), rounds_or_time,
        res.messages, len(leaders), leader_id, success, attempts,
        time.perf_counter() - t0)


def run_experiment(spec):
    """All trials of a spec plus an aggregate summary."""
    spec.validate()
    records = [run_trial(spec, t) for t in range(spec.trials)]
    return records, summarize(records)


def summarize(records):
    msgs = [r.messages for r in records]
    times = [r.rounds_or_time for r in records]
    wins = sum(r.success for r in records)
    lo, hi = wilson_interval(wins, len(records))
    return {
        "trials": len(records),
        "mean_messages": sum(msgs) / len(msgs),
        "max_messages": max(msgs),
        "mean_time": sum(times) / len(times),
        "max_time": max(times),
        "success_rate": wins / len(records),
        "ci_low": lo,
        "ci_high": hi,
    }


def records_to_csv(records):
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in records]) + "\n"


def records_to_jsonl(records):
    return "".join(json.dumps(vars(r)) + "\n" for r in records)


SWEEP_HEADER = ("algo,n,param,mean_messages,max_messages,mean_time,"
                "success_rate,ci_low,ci_high")

_GRID_KEYS = ("ell", "k", "epsilon", "d", "g", "a", "b", "gamma")


def sweep(algo, n_list, param_grid, trials, seed=0, wake="simultaneous",
          scheduler="random"):
    """Cross product of n values and parameter lists; one summary row per
    cell, CSV-formatted."""
    if not n_list:
        raise ConfigError("empty sweep grid")
    keys = [k for k in _GRID_KEYS if k in param_grid]
    cells = [{}]
    for k in keys:
        cells = [dict(c, **{k: v}) for c in cells for v in param_grid[k]]
    lines = [SWEEP_HEADER]
    for n in n_list:
        for params in cells:
            spec = ExperimentSpec(algo, n, trials, seed, wake, scheduler,
                                  params)
            _, s = run_experiment(spec)
            lines.append(
                f"{algo},{n},{params_string(params)},"
                f"{s['mean_messages']:.3f},{s['max_messages']},"
                f"{s['mean_time']:.6f},{s['success_rate']:.6f},"
                f"{s['ci_low']:.6f},{s['ci_high']:.6f}")
    return "\n".join(lines) + "\n"
