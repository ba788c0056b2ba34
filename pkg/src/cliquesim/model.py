"""Clique-network vocabulary: identities, ports, port mappings, message graphs.

Nodes are indexed 0..n-1 (simulator-internal); each node owns ports 1..n-1.
A full port mapping pairs every (node, port) endpoint with exactly one
endpoint of another node, one port pair per unordered node pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

# Node decisions, shared by both engines.
UNDECIDED = "undecided"
LEADER = "leader"
NON_LEADER = "non-leader"


class MappingError(ValueError):
    """Invalid endpoint or illegal (partial) port-mapping operation."""


class ConfigError(ValueError):
    """Invalid protocol or engine configuration."""


class Endpoint(NamedTuple):
    node: int
    port: int


@dataclass(frozen=True)
class IdAssignment:
    """n pairwise-distinct identities drawn from a universe [1, universe_size]."""

    ids: tuple
    universe_size: int

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ConfigError("ids must be pairwise distinct")
        for x in self.ids:
            if not (1 <= x <= self.universe_size):
                raise ConfigError(f"id {x} outside [1, {self.universe_size}]")

    @property
    def n(self) -> int:
        return len(self.ids)


def random_id_assignment(n, universe_size, rng) -> IdAssignment:
    if universe_size < n:
        raise ConfigError("universe too small")
    ids = rng.sample(range(1, universe_size + 1), n)
    return IdAssignment(tuple(ids), universe_size)


class PortMapping:
    """Full bijective port mapping.

    Internally two n x (n-1) row lists (index = port - 1):
      peers[u][i-1]  -> the node reached over port i of u
      rports[u][i-1] -> the port at that node leading back to u
    """

    __slots__ = ("n", "peers", "rports", "_bcast_rows", "_np_rows")

    def __init__(self, n, peers, rports):
        self.n = n
        self.peers = peers
        self.rports = rports
        self._bcast_rows = None
        self._np_rows = None

    def resolve(self, e) -> Endpoint:
        u, i = e
        if not (0 <= u < self.n and 1 <= i <= self.n - 1):
            raise MappingError(f"invalid endpoint {e!r} for n={self.n}")
        return Endpoint(self.peers[u][i - 1], self.rports[u][i - 1])

    def endpoints(self) -> Iterator[Endpoint]:
        for u in range(self.n):
            for i in range(1, self.n):
                yield Endpoint(u, i)

    def broadcast_rows(self):
        """Per-node delivery lists [(dest, dest_port), ...]; cached, engines only."""
        if self._bcast_rows is None:
            self._bcast_rows = [
                list(zip(self.peers[u], self.rports[u])) for u in range(self.n)
            ]
        return self._bcast_rows

    def np_rows(self):
        """peers/rports as int arrays (index = port - 1); cached, engines only."""
        if self._np_rows is None:
            self._np_rows = (np.asarray(self.peers, dtype=np.int64),
                             np.asarray(self.rports, dtype=np.int64))
        return self._np_rows

    def check_valid(self):
        n = self.n
        for u in range(n):
            seen = set()
            for i in range(1, n):
                v, j = self.resolve((u, i))
                if v == u:
                    raise MappingError(f"self-loop at {(u, i)}")
                if v in seen:
                    raise MappingError(f"duplicate pair {{{u},{v}}}")
                seen.add(v)
                if self.resolve((v, j)) != (u, i):
                    raise MappingError(f"not an involution at {(u, i)}")

    def to_json(self) -> str:
        pairs = []
        for u in range(self.n):
            for i in range(1, self.n):
                v, j = self.peers[u][i - 1], self.rports[u][i - 1]
                if (u, i) < (v, j):
                    pairs.append([u, i, v, j])
        return json.dumps({"n": self.n, "pairs": pairs})

    @classmethod
    def from_json(cls, s) -> "PortMapping":
        d = json.loads(s)
        n = d["n"]
        peers = [[-1] * (n - 1) for _ in range(n)]
        rports = [[-1] * (n - 1) for _ in range(n)]
        for u, i, v, j in d["pairs"]:
            peers[u][i - 1], rports[u][i - 1] = v, j
            peers[v][j - 1], rports[v][j - 1] = u, i
        pm = cls(n, peers, rports)
        pm.check_valid()
        return pm


def random_port_mapping(n, seed) -> PortMapping:
    """Uniformly random valid PortMapping; deterministic given (n, seed).

    Every valid mapping corresponds to exactly one tuple of per-node
    port -> peer bijections, so independent uniform row permutations give
    the uniform distribution.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if n == 1:
        return PortMapping(1, [[]], [[]])
    g = np.random.default_rng(seed)
    base = np.broadcast_to(np.arange(n, dtype=np.int64), (n, n))
    peers = base[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    peers = g.permuted(peers, axis=1)
    # inv[v][u] = 0-based port index of v that reaches u
    inv = np.empty((n, n), dtype=np.int64)
    rows = np.repeat(np.arange(n), n - 1)
    inv[rows, peers.ravel()] = np.tile(np.arange(n - 1), n)
    rports = inv[peers, np.arange(n)[:, None]] + 1
    return PortMapping(n, peers.tolist(), rports.tolist())


def resolve(pm, e):
    """Partner endpoint under a full or partial mapping; None if unassigned."""
    return pm.resolve(e)


class PartialPortMapping:
    """Port mapping defined on a subset of endpoints, always completable."""

    def __init__(self, n):
        if n < 1:
            raise ConfigError("n must be >= 1")
        self.n = n
        self._map = {}        # Endpoint -> Endpoint
        self._pairs = set()   # frozenset({u, v}) with a port pair assigned

    def resolve(self, e) -> Optional[Endpoint]:
        u, i = e
        if not (0 <= u < self.n and 1 <= i <= self.n - 1):
            raise MappingError(f"invalid endpoint {e!r} for n={self.n}")
        return self._map.get((u, i))

    def is_assigned(self, e) -> bool:
        return (e[0], e[1]) in self._map

    def pair_used(self, u, v) -> bool:
        return frozenset((u, v)) in self._pairs

    def unassigned_ports(self, u):
        return [i for i in range(1, self.n) if (u, i) not in self._map]

    def assign(self, a, b) -> None:
        a = Endpoint(*a)
        b = Endpoint(*b)
        for e in (a, b):
            if not (0 <= e.node < self.n and 1 <= e.port <= self.n - 1):
                raise MappingError(f"invalid endpoint {e!r}")
        if a.node == b.node:
            raise MappingError(f"self-node pair {a!r} <-> {b!r}")
        if a in self._map or b in self._map:
            raise MappingError("endpoint already assigned")
        if self.pair_used(a.node, b.node):
            raise MappingError(
                f"nodes {a.node} and {b.node} already share a port pair"
            )
        self._map[a] = b
        self._map[b] = a
        self._pairs.add(frozenset((a.node, b.node)))

    def complete(self) -> PortMapping:
        """Deterministic greedy completion to a full PortMapping.

        Each assignment consumes one port and one unpaired partner at both
        nodes, so free ports always equal unpaired nodes and the greedy
        pairing cannot get stuck.
        """
        n = self.n
        if n == 1:
            return PortMapping(1, [[]], [[]])
        free = [sorted(self.unassigned_ports(u), reverse=True) for u in range(n)]
        peers = [[-1] * (n - 1) for _ in range(n)]
        rports = [[-1] * (n - 1) for _ in range(n)]
        for (u, i), (v, j) in self._map.items():
            peers[u][i - 1], rports[u][i - 1] = v, j
        for u in range(n):
            for v in range(u + 1, n):
                if not self.pair_used(u, v):
                    i, j = free[u].pop(), free[v].pop()
                    peers[u][i - 1], rports[u][i - 1] = v, j
                    peers[v][j - 1], rports[v][j - 1] = u, i
        pm = PortMapping(n, peers, rports)
        pm.check_valid()
        return pm


class CommGraph:
    """Directed who-sent-to-whom graph; edge (u,v) once u's message reached v."""

    __slots__ = ("n", "out", "inc")

    def __init__(self, n):
        self.n = n
        self.out = [set() for _ in range(n)]
        self.inc = [set() for _ in range(n)]

    def record_send(self, u, v) -> None:
        if u == v:
            raise MappingError("self-edge")
        self.out[u].add(v)
        self.inc[v].add(u)

    def has_edge(self, u, v) -> bool:
        return v in self.out[u]

    def edge_count(self) -> int:
        return sum(len(s) for s in self.out)

    def edges(self):
        for u in range(self.n):
            for v in self.out[u]:
                yield (u, v)

    def contacted(self, u):
        """Nodes u has an edge with, in either direction."""
        return self.out[u] | self.inc[u]

    def weak_components(self):
        """Partition into weakly connected components (sorted by min member)."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u in range(self.n):
            for v in self.out[u]:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[rv] = ru
        comps = {}
        for u in range(self.n):
            comps.setdefault(find(u), set()).add(u)
        return sorted((frozenset(c) for c in comps.values()), key=min)

    def capacity(self, c) -> int:
        """Max lambda s.t. every member still has lambda untouched members of c."""
        c = frozenset(c)
        if c not in self.weak_components():
            raise MappingError("node set is not a component of this graph")
        return min(len(c) - 1 - len(self.contacted(u) & c) for u in c)

    def is_isolated(self, s) -> bool:
        s = set(s)
        for u in s:
            if (self.out[u] - s) or (self.inc[u] - s):
                return False
        return True

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "edges": sorted([u, v] for u, v in self.edges())}
        )

    @classmethod
    def from_json(cls, s) -> "CommGraph":
        d = json.loads(s)
        g = cls(d["n"])
        for u, v in d["edges"]:
            g.record_send(u, v)
        return g
