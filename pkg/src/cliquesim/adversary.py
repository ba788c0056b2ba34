"""Adversarial strategies: wake-up sets, adaptive isolating port wiring,
and hostile asynchronous schedulers.

The isolating mapper wires ports on demand against a deterministic
protocol: while a communication component has residual capacity it keeps
newly opened ports inside the component (so the component stays isolated);
once capacity runs out it merges into the smallest other component.
"""

import math
import random

import numpy as np

from .model import CommGraph, PartialPortMapping
from .async_engine import fifo_clamp


class IsolatingPortAdversary:
    """Adaptive mapping strategy; plugs into run_sync in place of a
    PortMapping.  Deterministic: identical protocol + ids give identical
    wiring."""

    def __init__(self, n):
        self.n = n
        self.partial = PartialPortMapping(n)
        self.graph = CommGraph(n)
        self.sends = 0
        self.audit = []        # (round, component, capacity, opened, isolated)
        self.growth = []       # (round, component_count, max_size, messages)
        self._snapshot = []    # [(component, capacity)] at round start
        self._opened = {}      # component index -> ports opened this round
        self._used = set()     # endpoints the owning node has sent over

    # -- mapping interface used by the engine --------------------------------

    def resolve(self, e):
        u, i = e
        if e not in self._used:
            # first send over this port: u opens it, whether or not the
            # partner endpoint was wired earlier from the other side
            self._used.add(e)
            self._count_opening(u)
        tgt = self.partial.resolve(e)
        if tgt is None:
            tgt = self._wire(u, i)
        self.graph.record_send(u, tgt.node)
        self.sends += 1
        return tgt

    def on_round_start(self, rnd):
        comps = self.graph.weak_components()
        self._snapshot = [(c, self._capacity(c)) for c in comps]
        self._opened = {idx: 0 for idx in range(len(comps))}

    def on_round_end(self, rnd):
        for idx, (comp, cap) in enumerate(self._snapshot):
            t = self._opened[idx]
            if t <= cap:
                # The guarantee under audit: every message sent by a
                # within-capacity component is received inside it.  Incoming
                # edges forced by *other* components exceeding their own
                # capacity do not break that guarantee, so only outgoing
                # containment is checked.
                contained = all(not (self.graph.out[u] - comp) for u in comp)
                self.audit.append((rnd, comp, cap, t, contained))
        comps = self.graph.weak_components()
        self.growth.append(
            (rnd, len(comps), max(len(c) for c in comps), self.sends))

    # -- internals ------------------------------------------------------------

    def _capacity(self, comp):
        contacted = self.graph.contacted
        return min(len(comp) - 1 - len(contacted(u) & comp) for u in comp)

    def _count_opening(self, u):
        for idx, (comp, _) in enumerate(self._snapshot):
            if u in comp:
                self._opened[idx] += 1
                break

    def _wire(self, u, port):
        graph, n = self.graph, self.n
        comps = graph.weak_components()
        mine = next(c for c in comps if u in c)
        if self._capacity(mine) >= 1:
            t = min(x for x in mine if x != u and x not in graph.contacted(u))
        else:
            others = [c for c in comps if c is not mine]
            if others:
                t = min(min(others, key=lambda c: (len(c), min(c))))
            else:
                t = min(x for x in range(n)
                        if x != u and not self.partial.pair_used(u, x))
        j = min(self.partial.unassigned_ports(t))
        self.partial.assign((u, port), (t, j))
        return self.partial.resolve((u, port))

    # -- reporting -------------------------------------------------------------

    def isolation_violations(self):
        return [row for row in self.audit if not row[4]]

    def finish(self):
        """Complete the partial wiring to a full valid PortMapping."""
        return self.partial.complete()

    def growth_report(self):
        """CSV of component growth per round, for plotting."""
        lines = ["round,component_count,max_component_size,messages_so_far"]
        lines += [f"{r},{c},{m},{s}" for r, c, m, s in self.growth]
        return "\n".join(lines) + "\n"


def isolating_port_adversary(n):
    return IsolatingPortAdversary(n)


# -- hostile schedulers -------------------------------------------------------

def slow_competes():
    """Competition traffic crawls (delay 1.0); everything else is fast."""
    slow = ("compete", "consult")

    def make(n, rng):
        last = {}
        get = last.get

        def f(t, u, v, p):              # fifo_clamp, inlined for speed
            d = 1.0 if p[0] in slow else 0.01
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
        f.batch = lambda t, u, vs, p: np.full(
            len(vs), 1.0 if p[0] in slow else 0.01)
        return f

    return make


def fast_wakeups_slow_elections():
    """Wake-up traffic races ahead while every election message is held
    for the maximum admissible time."""

    def make(n, rng):
        f = fifo_clamp(
            n, lambda t, u, v, p: 0.01 if p[0] == "wake" else 1.0)
        f.batch = lambda t, u, vs, p: np.full(
            len(vs), 0.01 if p[0] == "wake" else 1.0)
        return f

    return make


def fifo_stress(seed=None):
    """Random delays with a persistent per-link bias, clamped to FIFO."""

    def make(n, rng):
        r = random.Random(seed) if seed is not None else rng
        rand = r.random

        gen = np.random.default_rng(r.getrandbits(64))
        last = {}
        get = last.get

        def f(t, u, v, p):              # fifo_clamp, inlined for speed
            key = u * n + v
            bias = (((key + 1) * 2654435761) & 0xFFFF) / 65535.0
            d = 0.05 + 0.85 * bias + 0.1 * rand()
            if d > 1.0:
                d = 1.0
            arr = t + d
            prev = get(key)
            if prev is not None and arr < prev:
                d = prev - t
                while t + d < prev:    # t + (prev - t) can round 1 ulp low
                    d = math.nextafter(d, math.inf)
                arr = t + d
            last[key] = arr
            return d

        def batch(t, u, vs, p):
            bias = (((u * n + vs.astype(np.int64) + 1) * 2654435761)
                    & 0xFFFF) / 65535.0
            d = 0.05 + 0.85 * bias + 0.1 * gen.random(len(vs))
            return np.minimum(d, 1.0)

        f.fifo_safe = True
        f.batch = batch
        return f

    return make
