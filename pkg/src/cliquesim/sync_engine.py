"""Synchronous round-based message-passing engine.

Contract for protocol nodes (duck-typed):
  - constructed by ``protocol(ctx)`` where ctx is a NodeCtx;
  - ``send(rnd)`` returns an iterable of (port, payload); it is computed
    before the node sees this round's inbox.  Port 0 broadcasts on all ports;
  - ``receive(rnd, inbox)`` gets the list of (port, payload) delivered this
    round (possibly empty), after which ``decision`` / ``halted`` are read;
  - attributes ``decision`` (model.UNDECIDED/LEADER/NON_LEADER) and ``halted``.

Messages sent in round r arrive at the end of round r.  A sleeping node that
receives mail in round r wakes at the end of r: it sees that inbox but sends
for the first time in round r + 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .model import UNDECIDED, LEADER, NON_LEADER, CommGraph, ConfigError

BROADCAST = 0


class NodeCtx(NamedTuple):
    index: int              # row in the port mapping
    uid: int                # protocol-visible identity
    n: int
    rng: random.Random


def node_rng(seed, index) -> random.Random:
    """Per-node RNG stream, stable across schedulers and engines."""
    return random.Random((hash(seed) << 20) ^ (index * 2654435761))


@dataclass
class SyncResult:
    n: int
    rounds: int
    messages: int
    decisions: list
    uids: list
    faults: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    per_round_messages: list = field(default_factory=list)
    graph: object = None
    truncated: bool = False

    @property
    def leaders(self):
        return [u for u, d in enumerate(self.decisions) if d == LEADER]

    @property
    def leader_uids(self):
        return [self.uids[u] for u in self.leaders]

    def unique_leader(self) -> bool:
        return len(self.leaders) == 1 and all(
            d != UNDECIDED for d in self.decisions
        )


def run_sync(pm, ids, protocol, seed=0, wake=None, max_rounds=None,
             trace=None, record_graph=False) -> SyncResult:
    """Run ``protocol`` over port mapping ``pm`` with identities ``ids``.

    wake: {node: round} of spontaneous wake-ups (default: everyone at round 1).
    Stops when every awake node has halted and no wake-up is pending, or at
    max_rounds (default 4n).  ``pm`` may be an adaptive mapping strategy
    exposing ``resolve`` (and optional round hooks) instead of a PortMapping.
    """
    n = pm.n
    if ids.n != n:
        raise ConfigError("id assignment size != mapping size")
    if wake is None:
        wake = {u: 1 for u in range(n)}
    if not wake:
        raise ConfigError("at least one node must wake spontaneously")
    if any(r < 1 for r in wake.values()):
        raise ConfigError("wake rounds start at 1")
    if max_rounds is None:
        max_rounds = 4 * n

    uids = list(ids.ids)
    nodes = [None] * n
    active_from = [None] * n   # first round the node may send in
    faults = []
    messages = 0
    per_round = []
    fast = hasattr(pm, "peers")
    bcast_rows = pm.broadcast_rows() if fast else None
    hook_start = getattr(pm, "on_round_start", None)
    hook_end = getattr(pm, "on_round_end", None)
    graph = CommGraph(n) if record_graph else None

    def spawn(u):
        nodes[u] = protocol(NodeCtx(u, uids[u], n, node_rng(seed, u)))

    last_wake = max(wake.values())
    rnd = 0
    while rnd < max_rounds:
        rnd += 1
        if hook_start:
            hook_start(rnd)
        round_start_messages = messages
        for u, w in wake.items():
            if w == rnd and nodes[u] is None:
                spawn(u)
                active_from[u] = rnd

        inboxes = {}
        senders = [
            u for u in range(n)
            if nodes[u] is not None and active_from[u] is not None
            and active_from[u] <= rnd and not nodes[u].halted
        ]
        if not senders and rnd > last_wake:
            rnd -= 1
            break

        for u in senders:
            node = nodes[u]
            for port, payload in node.send(rnd):
                if port == BROADCAST:
                    if fast:
                        for v, q in bcast_rows[u]:
                            inboxes.setdefault(v, []).append((q, payload))
                            if graph is not None:
                                graph.record_send(u, v)
                    else:
                        for i in range(1, n):
                            v, q = pm.resolve((u, i))
                            inboxes.setdefault(v, []).append((q, payload))
                            if graph is not None:
                                graph.record_send(u, v)
                    messages += n - 1
                    if trace:
                        trace({"ev": "send", "round": rnd, "node": u,
                               "port": BROADCAST, "payload": payload})
                    continue
                if not (1 <= port <= n - 1):
                    faults.append((rnd, u, f"bad port {port}"))
                    continue
                if fast:
                    v, q = pm.peers[u][port - 1], pm.rports[u][port - 1]
                else:
                    v, q = pm.resolve((u, port))
                inboxes.setdefault(v, []).append((q, payload))
                if graph is not None:
                    graph.record_send(u, v)
                messages += 1
                if trace:
                    trace({"ev": "send", "round": rnd, "node": u,
                           "port": port, "payload": payload})

        for u in range(n):
            inbox = inboxes.get(u, [])
            if nodes[u] is None:
                if not inbox:
                    continue
                spawn(u)               # woken by a message: sends from rnd+1
                active_from[u] = rnd + 1
            elif nodes[u].halted:
                if inbox:
                    faults.append((rnd, u, "mail for halted node"))
                continue
            nodes[u].receive(rnd, inbox)
            if trace and inbox:
                trace({"ev": "recv", "round": rnd, "node": u,
                       "count": len(inbox)})

        per_round.append(messages - round_start_messages)
        if hook_end:
            hook_end(rnd)
        if rnd >= last_wake and all(
            node is None or node.halted for node in nodes
        ):
            break

    decisions = [
        UNDECIDED if node is None else node.decision for node in nodes
    ]
    truncated = rnd >= max_rounds and any(
        d == UNDECIDED for d in decisions
    )
    return SyncResult(n, rnd, messages, decisions, uids, faults, nodes,
                      per_round, graph, truncated)


class _SingleSendNode:
    """Adapter replaying one inner round as a block of n single-send rounds."""

    __slots__ = ("inner", "n", "queue", "buffer", "block")

    def __init__(self, inner, n):
        self.inner = inner
        self.n = n
        self.queue = []     # outgoing messages of the current block
        self.buffer = []    # inbound messages held until block end
        self.block = 0      # inner round currently being replayed

    @property
    def decision(self):
        return self.inner.decision

    @property
    def halted(self):
        return self.inner.halted and not self.queue

    def send(self, rnd):
        sub = (rnd - 1) % self.n
        if sub == 0:
            self.block += 1
            self.queue = []
            if not self.inner.halted:
                for port, payload in self.inner.send(self.block):
                    if port == BROADCAST:
                        # a broadcast is its n-1 constituent messages
                        self.queue += [(p, payload) for p in range(1, self.n)]
                    else:
                        self.queue.append((port, payload))
            if len(self.queue) > self.n - 1:
                raise ConfigError(
                    "single-send transform needs <= n-1 sends/round")
        if self.queue:
            return [self.queue.pop(0)]
        return []

    def receive(self, rnd, inbox):
        self.buffer.extend(inbox)
        if rnd % self.n == 0:
            if not self.inner.halted:
                self.inner.receive(self.block, self.buffer)
            self.buffer = []


def single_send(protocol, n):
    """Transform a protocol so each node sends at most one message per round.

    Round r of the base protocol becomes rounds (r-1)n+1 .. rn; the i-th
    message of the base round goes out in sub-round (r-1)n+i and inbound
    messages are buffered until the end of the block.  Requires all nodes to
    wake simultaneously and base-round outboxes of at most n messages.
    """

    def factory(ctx):
        return _SingleSendNode(protocol(ctx), n)

    return factory
