"""Executable acceptance checks: one callable per claim, shared by the CLI
``verify`` subcommand and the test suite.

Each check returns a CriterionResult with a pass flag and a measured-value
summary.  Checks are property-based at desk scale with closed-form per-run
bounds; Monte Carlo pools of port mappings are reused across trials where
the property under test holds for every fixed mapping (worst-case claims),
keeping single-core runtimes inside each criterion's budget.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .model import (UNDECIDED, LEADER, CommGraph, random_id_assignment,
                    random_port_mapping)
from .sync_engine import run_sync, single_send
from .async_engine import run_async
from .adversary import IsolatingPortAdversary
from .experiments import SCHEDULERS, make_inputs, wilson_interval
from . import protocols
from .protocols._util import ceil_root_pow


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(name, passed, detail, time.perf_counter() - t0)


def _pool(n, size, seed0):
    return [random_port_mapping(n, seed0 + j) for j in range(size)]


def _ids(n, seed, universe=None):
    return random_id_assignment(n, universe or max(n, n * n),
                                random.Random(f"{seed}/ids"))


# -- 1: deterministic tradeoff ------------------------------------------------

def tournament_message_bound(n, ell):
    """Closed-form per-run bound: sum_i (s_{i-1} f_i + n) + s_{k-2} (n-1)
    with s_i = ceil(n^(1 - i/(k-1))) and f_i = min(ceil(n^(i/(k-1))), n-1)."""
    k = (ell + 3) // 2
    s = lambda i: ceil_root_pow(n, k - 1 - i, k - 1)
    f = lambda i: min(ceil_root_pow(n, i, k - 1), n - 1)
    return (sum(s(i - 1) * f(i) + n for i in range(1, k - 1))
            + s(k - 2) * (n - 1))


def check_improved_tradeoff(trials=200):
    def body():
        bad = 0
        worst = ""
        for n in (16, 64, 256):
            for ell in (3, 5, 7):
                proto = protocols.improved_afek_gafni(ell)
                bound = tournament_message_bound(n, ell)
                asym = 8 * ell * n ** (1 + 2 / (ell + 1))
                for t in range(trials):
                    seed = 101 * n + 10 * ell + 7919 * t
                    ids, pm = make_inputs(n, seed)
                    res = run_sync(pm, ids, proto, seed=seed)
                    ok = (res.unique_leader()
                          and res.leader_uids == [max(ids.ids)]
                          and res.rounds == ell
                          and res.messages <= bound
                          and res.messages <= asym)
                    if not ok:
                        bad += 1
                        worst = (f"n={n} ell={ell} t={t}: rounds={res.rounds}"
                                 f" msgs={res.messages} bound={bound}")
        return bad == 0, worst or f"9 cells x {trials} trials, 0 violations"
    return _timed("improved_tradeoff", body)


# -- 2: small-ID broadcast schedule ------------------------------------------

def check_small_id(trials=100):
    def body():
        n = 8
        bad = 0
        worst = ""
        for d in (1, 2, 4):
            for g in (1, 2):
                proto = protocols.small_id_broadcast(d, g)
                for t in range(trials):
                    seed = 1000 * d + 100 * g + t
                    ids = _ids(n, seed, universe=n * g)
                    pm = random_port_mapping(n, seed)
                    res = run_sync(pm, ids, proto, seed=seed)
                    lo = min(ids.ids)
                    ok = (res.unique_leader()
                          and res.leader_uids == [lo]
                          and res.rounds == -(-lo // (d * g))
                          and res.rounds <= -(-n // d)
                          and res.messages <= d * g * (n - 1))
                    if not ok:
                        bad += 1
                        worst = f"d={d} g={g} t={t}"
        return bad == 0, worst or f"6 cells x {trials} trials, 0 violations"
    return _timed("small_id", body)


# -- 3: single-send transform --------------------------------------------------

def check_single_send(trials=50):
    def body():
        n, ell = 16, 3
        base = protocols.improved_afek_gafni(ell)
        wrapped = single_send(base, n)
        for t in range(trials):
            seed = 4242 + t
            ids, pm = make_inputs(n, seed)
            r0 = run_sync(pm, ids, base, seed=seed)
            r1 = run_sync(pm, ids, wrapped, seed=seed,
                          max_rounds=n * ell + n)
            if not (r0.leaders == r1.leaders
                    and r0.messages == r1.messages
                    and r0.decisions == r1.decisions
                    and r1.rounds <= n * ell):
                return False, (f"t={t}: base ({r0.leaders},{r0.messages}) vs "
                               f"transformed ({r1.leaders},{r1.messages},"
                               f"rounds={r1.rounds})")
        return True, f"{trials} paired runs identical, rounds <= {n * ell}"
    return _timed("single_send", body)


# -- 4: Las Vegas --------------------------------------------------------------

def check_las_vegas(trials=2000):
    def body():
        means = {}
        for n in (64, 256):
            proto = protocols.las_vegas_three_round()
            pool = _pool(n, 50, seed0=555000 + n)
            idpool = [_ids(n, 555 + j) for j in range(50)]
            wrong = 0
            first = 0
            total_msgs = 0
            for t in range(trials):
                seed = 900000 + 10 * n + t
                res = run_sync(pool[t % 50], idpool[t % 50], proto, seed=seed)
                total_msgs += res.messages
                decided = all(d != UNDECIDED for d in res.decisions)
                if decided:
                    if len(res.leaders) != 1:
                        wrong += 1
                    if res.rounds == 3:
                        first += 1
                elif len(res.leaders) > 0:
                    wrong += 1
            means[n] = total_msgs / trials
            if wrong:
                return False, f"n={n}: {wrong} terminating runs without " \
                              f"exactly one leader"
            if first < 0.9 * trials:
                return False, f"n={n}: only {first}/{trials} finished in " \
                              f"the first attempt"
        ratio = means[256] / means[64]
        return ratio <= 4.4, (f"first-attempt ok, mean msgs 64={means[64]:.0f}"
                              f" 256={means[256]:.0f} ratio={ratio:.2f}")
    return _timed("las_vegas", body)


# -- 5: two-round adversarial wake-up ------------------------------------------

def check_two_round(trials=5000):
    def body():
        n, eps = 400, 0.1
        proto = protocols.two_round_adversarial(eps)
        mean_cap = 8 * n ** 1.5 * math.log(1 / eps)
        max_cap = 8 * n ** 1.5 * math.log(n)
        pool = _pool(n, 50, seed0=777000)
        idpool = [_ids(n, 777 + j) for j in range(50)]
        details = []
        for strategy in ("single", "all", "half"):
            wins = 0
            msgs = []
            for t in range(trials):
                seed = 300000 + t
                rng = random.Random(f"{strategy}/{t}")
                if strategy == "single":
                    wake = {rng.randrange(n): 1}
                elif strategy == "all":
                    wake = {u: 1 for u in range(n)}
                else:
                    wake = {u: 1 for u in rng.sample(range(n), n // 2)}
                res = run_sync(pool[t % 50], idpool[t % 50], proto,
                               seed=seed, wake=wake)
                msgs.append(res.messages)
                wins += len(res.leaders) == 1
            lo, hi = wilson_interval(wins, trials)
            half = (hi - lo) / 2
            floor = 1 - eps - 1 / n - half
            rate = wins / trials
            mean = sum(msgs) / trials
            details.append(f"{strategy}:{rate:.4f}>={floor:.4f}")
            if rate < floor:
                return False, f"{strategy}: success {rate:.4f} < {floor:.4f}"
            if mean > mean_cap or max(msgs) > max_cap:
                return False, (f"{strategy}: msgs mean {mean:.0f}/"
                               f"{mean_cap:.0f} max {max(msgs)}/{max_cap:.0f}")
        return True, " ".join(details)
    return _timed("two_round", body)


# -- 6: async tradeoff ----------------------------------------------------------

def check_async_tradeoff(trials=500):
    def body():
        details = []
        for n in (256, 1024):
            pool = _pool(n, 25, seed0=888000 + n)
            idpool = [_ids(n, 888 + j) for j in range(25)]
            for k in (2, 3):
                proto = protocols.async_tradeoff(k)
                msg_cap = 16 * n ** (1 + 1 / k)
                for sched in ("random", "slow-competes", "fifo-stress"):
                    make = SCHEDULERS[sched]
                    on_time = unique = awake = 0
                    for t in range(trials):
                        seed = 5000000 + t
                        delayfn = make(n, random.Random(f"{seed}/sched/{n}"))
                        res = run_async(pool[t % 25], idpool[t % 25], proto,
                                        seed=seed, wake={t % n: 0.0},
                                        delayfn=delayfn)
                        if res.messages > msg_cap:
                            return False, (f"n={n} k={k} {sched} t={t}: "
                                           f"{res.messages} msgs > "
                                           f"{msg_cap:.0f}")
                        on_time += res.elapsed() <= k + 8
                        unique += len(res.leaders) == 1
                        awake += res.all_awake_by(k + 4)
                    if on_time < math.ceil(0.99 * trials):
                        return False, (f"n={n} k={k} {sched}: on-time "
                                       f"{on_time}/{trials}")
                    if unique < (1 - 5 / n) * trials:
                        return False, (f"n={n} k={k} {sched}: unique "
                                       f"{unique}/{trials}")
                    if awake < math.ceil(0.99 * trials):
                        return False, (f"n={n} k={k} {sched}: awake "
                                       f"{awake}/{trials}")
                    details.append(f"{n}/{k}/{sched}:{unique}")
        return True, "unique-leader counts " + " ".join(details)
    return _timed("async_tradeoff", body)


# -- 7: async levels -------------------------------------------------------------

def levels_predicate(res):
    """At most n/2^i nodes may ever climb past level i."""
    n = res.n
    peaks = [nd.level for nd in res.nodes if nd is not None]
    top = max(peaks, default=0)
    for i in range(1, top + 1):
        if sum(1 for p in peaks if p >= i + 1) > n / 2 ** i:
            return False
    return True


def check_async_levels(trials=500):
    def body():
        proto = protocols.async_levels()
        make = SCHEDULERS["random"]
        fitted = {}
        for n in (16, 64, 256):
            pool = _pool(n, 25, seed0=999000 + n)
            idpool = [_ids(n, 999 + j) for j in range(25)]
            logn = math.log2(n)
            ratios_m, ratios_t = [], []
            for t in range(trials):
                seed = 7000000 + t
                delayfn = make(n, random.Random(f"{seed}/sched/{n}"))
                res = run_async(pool[t % 25], idpool[t % 25], proto,
                                seed=seed, delayfn=delayfn)
                if len(res.leaders) != 1:
                    return False, f"n={n} t={t}: {len(res.leaders)} leaders"
                if not levels_predicate(res):
                    return False, f"n={n} t={t}: level predicate violated"
                ratios_m.append(res.messages / (n * logn))
                ratios_t.append(res.elapsed() / logn)
            if not fitted:
                fitted = {"C": 1.25 * max(ratios_m),
                          "Cp": 1.25 * max(ratios_t)}
            else:
                if max(ratios_m) > fitted["C"]:
                    return False, (f"n={n}: messages ratio {max(ratios_m):.2f}"
                                   f" > fitted C={fitted['C']:.2f}")
                if max(ratios_t) > fitted["Cp"]:
                    return False, (f"n={n}: time ratio {max(ratios_t):.2f}"
                                   f" > fitted C'={fitted['Cp']:.2f}")
        return True, (f"one leader always; fitted C={fitted['C']:.2f} "
                      f"C'={fitted['Cp']:.2f} hold at n=64,256")
    return _timed("async_levels", body)


# -- 8: model properties -----------------------------------------------------------

def _bfs_components(n, edges):
    adj = {u: set() for u in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = set()
    comps = []
    for s in range(n):
        if s in seen:
            continue
        q, comp = [s], set()
        while q:
            x = q.pop()
            if x in comp:
                continue
            comp.add(x)
            q.extend(adj[x] - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return sorted(comps, key=min)


class _AuditDelay:
    """Wraps a delayfn; records every (link, delay, arrival) for audits."""

    def __init__(self, n, inner):
        self.n = n
        self.inner = inner
        self.fifo_safe = False
        self.violations = 0
        self._last = {}

    def __call__(self, t, u, v, payload):
        d = self.inner(t, u, v, payload)
        key = u * self.n + v
        arr = t + d
        if not 0.0 < d <= 1.0:
            self.violations += 1
        if arr < self._last.get(key, -1.0):
            self.violations += 1
        self._last[key] = arr
        return d


def check_model_properties():
    def body():
        rng = random.Random(80801)
        for j in range(1000):
            n = rng.randrange(1, 65)
            random_port_mapping(n, j).check_valid()
        for n in range(1, 11):
            for _ in range(60):
                m = rng.randrange(0, 21)
                g = CommGraph(n)
                edges = set()
                for _ in range(m):
                    u, v = rng.sample(range(n), 2) if n > 1 else (0, 0)
                    if n > 1:
                        g.record_send(u, v)
                        edges.add((u, v))
                if g.weak_components() != _bfs_components(n, edges):
                    return False, f"components mismatch at n={n}"
        proto = protocols.async_tradeoff(2)
        for t in range(1000):
            n = 16
            ids, pm = make_inputs(n, 60000 + t)
            sched = ("random", "fifo-stress")[t % 2]
            audit = _AuditDelay(
                n, SCHEDULERS[sched](n, random.Random(f"a/{t}")))
            run_async(pm, ids, proto, seed=t, wake={0: 0.0}, delayfn=audit)
            if audit.violations:
                return False, f"run {t} ({sched}): {audit.violations} " \
                              f"delay/FIFO violations"
        return True, ("1000 mappings valid; components match BFS; "
                      "1000 async runs FIFO/delay clean")
    return _timed("model_properties", body)


# -- 9: capacity lemma under the isolating adversary --------------------------------

def check_capacity_lemma():
    def body():
        checked = 0
        configs = [("improved_ag", 16, dict(ell=3)),
                   ("improved_ag", 16, dict(ell=5)),
                   ("improved_ag", 32, dict(ell=3)),
                   ("small_id", 16, dict(d=2, g=1)),
                   ("small_id", 16, dict(d=4, g=2))]
        for algo, n, params in configs:
            for t in range(20):
                seed = 123400 + t
                if algo == "improved_ag":
                    proto = protocols.improved_afek_gafni(params["ell"])
                    ids = _ids(n, seed)
                else:
                    proto = protocols.small_id_broadcast(params["d"],
                                                         params["g"])
                    ids = _ids(n, seed, universe=n * params["g"])
                adv = IsolatingPortAdversary(n)
                res = run_sync(adv, ids, proto, seed=seed)
                bad = adv.isolation_violations()
                if bad:
                    return False, (f"{algo} n={n} t={t}: {len(bad)} "
                                   f"isolation violations")
                adv.finish()            # completion must always succeed
                checked += len(adv.audit)
                if algo == "improved_ag" and res.leader_uids != [max(ids.ids)]:
                    return False, f"{algo} n={n} t={t}: wrong winner under " \
                                  f"adaptive wiring"
        return True, f"{checked} (round, component) cases, 0 violations"
    return _timed("capacity_lemma", body)


CRITERIA = [
    ("improved_tradeoff", check_improved_tradeoff),
    ("small_id", check_small_id),
    ("single_send", check_single_send),
    ("las_vegas", check_las_vegas),
    ("two_round", check_two_round),
    ("async_tradeoff", check_async_tradeoff),
    ("async_levels", check_async_levels),
    ("model_properties", check_model_properties),
    ("capacity_lemma", check_capacity_lemma),
]


def run_all(only=None):
    results = []
    for name, fn in CRITERIA:
        if only and only not in name:
            continue
        results.append(fn())
    return results
