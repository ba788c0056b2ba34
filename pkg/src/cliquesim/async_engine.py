"""Event-driven asynchronous executor with FIFO links and pluggable schedulers.

Contract for protocol nodes (duck-typed):
  - constructed by ``protocol(ctx)`` the moment the node wakes (spontaneously
    or at its first message delivery);
  - ``on_wake()`` and ``on_message(port, payload)`` return outboxes of
    (port, payload); port 0 broadcasts; local computation is instantaneous;
  - attributes ``decision`` and ``halted``; a halted node receives nothing.

Each send is assigned a delay in (0, 1] by the scheduler; per-link delivery
order must match send order (FIFO).  A protocol factory may declare
``wake_only_kinds``: payload kinds that have no effect on awake nodes, which
the engine then never enqueues for awake destinations (they still count as
sent and their arrival still advances the delivery clock).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from heapq import heappush, heappop

import numpy as np

from .model import UNDECIDED, LEADER, NON_LEADER, ConfigError
from .sync_engine import NodeCtx, node_rng, BROADCAST

FROM_FIRST_WAKE = "from_first_wake"
FROM_LAST_SPONTANEOUS_WAKE = "from_last_spontaneous_wake"

_INF = math.inf


class SchedulerError(RuntimeError):
    """Scheduler produced an illegal delay or violated per-link FIFO."""


@dataclass
class AsyncResult:
    n: int
    messages: int
    events: int
    decisions: list
    uids: list
    wake_times: list
    first_wake: float
    last_spont_wake: float
    last_delivery: float
    truncated: bool = False
    faults: list = field(default_factory=list)
    nodes: list = field(default_factory=list)

    def elapsed(self, accounting=FROM_FIRST_WAKE):
        origin = (self.first_wake if accounting == FROM_FIRST_WAKE
                  else self.last_spont_wake)
        return max(0.0, self.last_delivery - origin)

    @property
    def elapsed_time(self):
        return self.elapsed(FROM_FIRST_WAKE)

    @property
    def leaders(self):
        return [u for u, d in enumerate(self.decisions) if d == LEADER]

    def unique_leader(self) -> bool:
        return len(self.leaders) == 1

    def all_awake_by(self, t) -> bool:
        return all(w is not None and w <= t for w in self.wake_times)


def _digest(payload):
    return payload[0] if payload else ""


def run_async(pm, ids, protocol, seed=0, wake=None, delayfn=None,
              max_events=None, trace=None) -> AsyncResult:
    """Run an async protocol; returns decisions, counts, and timing facts.

    wake: {node: spontaneous wake time >= 0} (default: everyone at 0.0).
    delayfn(t, u, v, payload) -> delay in (0,1]; default constant 1.0.
    A delayfn may set attribute ``fifo_safe`` to skip the engine's own FIFO
    audit (the bundled schedulers clamp and set it).
    """
    n = pm.n
    if ids.n != n:
        raise ConfigError("id assignment size != mapping size")
    if wake is None:
        wake = {u: 0.0 for u in range(n)}
    if not wake:
        raise ConfigError("at least one node must wake spontaneously")
    if any(t < 0 for t in wake.values()):
        raise ConfigError("wake times must be >= 0")
    if delayfn is None:
        delayfn = lambda t, u, v, payload: 1.0
    if max_events is None:
        max_events = 64 * n * n

    uids = list(ids.ids)
    peers, rports = pm.peers, pm.rports
    wake_only = getattr(protocol, "wake_only_kinds", frozenset())
    check_fifo = not getattr(delayfn, "fifo_safe", False)

    nodes = [None] * n
    wake_time = [None] * n
    # Earliest pending arrival at a sleeping node; -inf once awake, so a
    # single compare doubles as the "still asleep" test in batch paths.
    earliest = np.full(n, _INF)
    earliest_l = [_INF] * n       # list mirror: faster scalar access
    last_arr = {}                 # per-link FIFO audit
    faults = []
    heap = []
    seq = 0
    messages = 0
    last_delivery = -_INF

    first_wake = min(wake.values())
    last_spont = max(wake.values())
    for u, t in wake.items():
        earliest[u] = t
        earliest_l[u] = t
        seq += 1
        heappush(heap, (t, seq, u, None, None))

    def spawn(u, t):
        nonlocal asleep
        asleep -= 1
        earliest[u] = -_INF
        earliest_l[u] = -_INF
        nodes[u] = protocol(NodeCtx(u, uids[u], n, node_rng(seed, u)))
        wake_time[u] = t
        if trace:
            trace({"time": t, "kind": "wake", "node": u, "port": None,
                   "payload": ""})
        return nodes[u]

    # Vectorized fast path for wake-only fanouts (a protocol hands the engine
    # an ndarray of ports with one shared payload): these messages are never
    # dispatched to awake destinations, so per-link FIFO among them is
    # unobservable and a batch delay draw is an equally admissible schedule.
    batch = None if (trace or check_fifo) else getattr(delayfn, "batch", None)
    if batch is not None and n > 1 and hasattr(pm, "np_rows"):
        peers_np, rports_np = pm.np_rows()
    else:
        batch = None
        peers_np = rports_np = None
    asleep = n                               # decremented as nodes spawn

    def emit_wake_batch(t, u, ports, payload):
        nonlocal seq, messages, last_delivery
        if ports.size == 0:
            return
        if ports.min() < 1 or ports.max() >= n:
            ports = ports[(ports >= 1) & (ports < n)]
            faults.append((t, u, "bad port in fanout"))
        idx = ports - 1
        vs = peers_np[u][idx]
        ds = batch(t, u, vs, payload)
        if not ((ds > 0.0) & (ds <= 1.0)).all():
            raise SchedulerError(f"batch delay outside (0,1] from {u} at t={t}")
        arr = t + ds
        messages += int(ports.size)
        top = float(arr.max())
        if top > last_delivery:
            last_delivery = top
        if asleep:
            better = arr < earliest[vs]
            if better.any():
                qs = rports_np[u][idx][better]
                for v, a, q in zip(vs[better].tolist(), arr[better].tolist(),
                                   qs.tolist()):
                    earliest[v] = a
                    earliest_l[v] = a
                    seq += 1
                    heappush(heap, (a, seq, v, q, payload))

    all_ports_np = np.arange(1, n) if batch is not None else None

    def emit_multi(t, u, ports, payload):
        # Vector delay draw for a delivered multicast.  The engine clamps
        # per-link FIFO itself (arrivals raised to the previous arrival on
        # the link) because the scheduler's scalar clamp never sees batch
        # draws; equal arrivals keep push order via the heap sequence.
        nonlocal seq, messages, last_delivery
        if ports.size == 0:
            return
        if ports.min() < 1 or ports.max() >= n:
            ports = ports[(ports >= 1) & (ports < n)]
            faults.append((t, u, "bad port in fanout"))
        idx = ports - 1
        vs = peers_np[u][idx]
        ds = batch(t, u, vs, payload)
        if not ((ds > 0.0) & (ds <= 1.0)).all():
            raise SchedulerError(f"batch delay outside (0,1] from {u} at t={t}")
        arr = t + ds
        messages += int(ports.size)
        top = float(arr.max())
        if top > last_delivery:
            last_delivery = top
        base = u * n
        get = last_arr.get
        s = seq
        for v, a, q in zip(vs.tolist(), arr.tolist(),
                           rports_np[u][idx].tolist()):
            key = base + v
            prev = get(key)
            if prev is not None and a < prev:
                a = prev
            last_arr[key] = a
            if a < earliest_l[v]:
                earliest_l[v] = a
                earliest[v] = a
            s += 1
            heappush(heap, (a, s, v, q, payload))
        seq = s

    def emit(t, u, outbox, heappush=heappush, last_get=last_arr.get):
        nonlocal seq, messages, last_delivery
        for port, payload in outbox:
            if type(port) is np.ndarray:
                if batch is not None:
                    if payload[0] in wake_only:
                        emit_wake_batch(t, u, port, payload)
                    else:
                        emit_multi(t, u, port, payload)
                    continue
                targets = port.tolist()
            elif port == BROADCAST:
                if batch is not None:
                    emit_multi(t, u, all_ports_np, payload)
                    continue
                targets = range(1, n)
            else:
                targets = (port,)
            is_wake = payload[0] in wake_only
            prow = peers[u]
            qrow = rports[u]
            for pt in targets:
                if not 1 <= pt < n:
                    faults.append((t, u, f"bad port {pt}"))
                    continue
                v = prow[pt - 1]
                d = delayfn(t, u, v, payload)
                if not 0.0 < d <= 1.0:
                    raise SchedulerError(
                        f"delay {d} outside (0,1] for {u}->{v} at t={t}")
                arr = t + d
                if check_fifo:
                    key = u * n + v
                    prev = last_get(key)
                    if prev is not None and arr < prev:
                        raise SchedulerError(
                            f"FIFO violation on link {u}->{v}: "
                            f"{arr} after {prev}")
                    last_arr[key] = arr
                elif batch is not None and not is_wake:
                    key = u * n + v
                    prev = last_get(key)
                    if prev is not None and arr < prev:
                        arr = prev
                    last_arr[key] = arr
                messages += 1
                if arr > last_delivery:
                    last_delivery = arr
                if trace:
                    trace({"time": t, "kind": "send", "node": u, "port": pt,
                           "payload": _digest(payload)})
                if is_wake:
                    if nodes[v] is not None or arr >= earliest_l[v]:
                        continue
                if arr < earliest_l[v]:
                    earliest_l[v] = arr
                    earliest[v] = arr
                seq += 1
                heappush(heap, (arr, seq, v, qrow[pt - 1], payload))

    events = 0
    while heap:
        if events >= max_events:
            break
        t, _, v, q, payload = heappop(heap)
        events += 1
        node = nodes[v]
        if q is None:                       # spontaneous wake
            if node is None:
                emit(t, v, spawn(v, t).on_wake())
            continue
        if trace:
            trace({"time": t, "kind": "deliver", "node": v, "port": q,
                   "payload": _digest(payload)})
        if node is None:
            node = spawn(v, t)
            ob = node.on_wake()
            if ob:
                emit(t, v, ob)
            if payload[0] not in wake_only and not node.halted:
                ob = node.on_message(q, payload)
                if ob:
                    emit(t, v, ob)
        elif node.halted or payload[0] in wake_only:
            pass
        else:
            was = node.decision
            ob = node.on_message(q, payload)
            if ob:
                emit(t, v, ob)
            if trace and node.decision != was:
                trace({"time": t, "kind": "decide", "node": v, "port": None,
                       "payload": node.decision})

    decisions = [UNDECIDED if nd is None else nd.decision for nd in nodes]
    if last_delivery == -_INF:
        last_delivery = first_wake
    return AsyncResult(n, messages, events, decisions, uids, wake_time,
                       first_wake, last_spont, last_delivery,
                       truncated=bool(heap), faults=faults, nodes=nodes)


def fifo_clamp(n, raw):
    """Wrap a raw delay rule: raise each delay minimally to restore per-link
    FIFO.  Correct because the previous arrival is at most 1 ahead of any
    later send time, so the clamped delay stays in (0,1]."""
    last = {}

    def delay(t, u, v, payload):
        d = raw(t, u, v, payload)
        key = u * n + v
        arr = t + d
        prev = last.get(key)
        if prev is not None and arr < prev:
            d = prev - t
            while t + d < prev:        # t + (prev - t) can round 1 ulp low
                d = math.nextafter(d, math.inf)
            arr = t + d
        last[key] = arr
        return d

    delay.fifo_safe = True
    return delay


def unit_delay(seed=None):
    """Every message takes exactly one time unit."""

    def make(n, rng):
        f = lambda t, u, v, payload: 1.0
        f.fifo_safe = True            # constant delay cannot reorder a link
        f.batch = lambda t, u, vs, payload: np.full(len(vs), 1.0)
        return f

    return make


def uniform_random_delay(seed=None):
    """Delays uniform on (0,1], raised minimally per link to restore FIFO."""

    def make(n, rng):
        r = random.Random(seed) if seed is not None else rng
        rand = r.random
        gen = np.random.default_rng(r.getrandbits(64))
        last = {}
        get = last.get

        def f(t, u, v, payload):        # fifo_clamp, inlined for speed
            d = 1.0 - rand()
            key = u * n + v
            arr = t + d
            prev = get(key)
            if prev is not None and arr < prev:
                d = prev - t
                while t + d < prev:    # t + (prev - t) can round 1 ulp low
                    d = math.nextafter(d, math.inf)
                arr = t + d
            last[key] = arr
            return d

        f.fifo_safe = True
        f.batch = lambda t, u, vs, payload: 1.0 - gen.random(len(vs))
        return f

    return make


def adaptive(policy):
    """Delegate to a user policy, enforcing the (0,1] + FIFO contract.

    policy(t, u, v, payload) -> desired delay; values are clamped into
    (0,1] and then FIFO-clamped per link.
    """

    def make(n, rng):
        def raw(t, u, v, payload):
            d = policy(t, u, v, payload)
            if d > 1.0:
                d = 1.0
            elif d <= 0.0:
                d = 1e-9
            return d

        return fifo_clamp(n, raw)

    return make
