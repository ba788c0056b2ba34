"""Asynchronous randomized election trading wake-up fanout against time.

On wake a node scatters wake messages over ~n^(1/k) random ports (so wake-up
floods the clique within ~k+4 time units) and becomes a candidate with
probability ~4 ln n / n.  Candidates compete at ~4*sqrt(n ln n) random
referees with a random rank; a referee keeps the best rank seen, consulting
the dethroned winner (one round-trip per dethroning, pipelined) before
answering the challenger.  A candidate that wins every referee is the leader
and informs everyone.
"""

import math

import numpy as np

from ..model import UNDECIDED, LEADER, NON_LEADER, ConfigError
from ..sync_engine import BROADCAST
from ._util import ceil_root_pow, sample_ports

_SELF = -1   # winner_port sentinel: the stored winner is this node itself

# Shared numpy generator for wake-fanout sampling; reseeded from the node's
# own rng before every draw, so it carries no state between nodes or runs.
_FAN_BG = np.random.PCG64(0)
_FAN_GEN = np.random.Generator(_FAN_BG)
_FAN_STATE = _FAN_BG.state


def _fan_ports(rng, nports, k):
    """k distinct ports from [1, nports], seeded from rng."""
    _FAN_STATE["state"]["state"] = rng.getrandbits(128)
    _FAN_BG.state = _FAN_STATE
    return _FAN_GEN.choice(nports, k, replace=False, shuffle=False) + 1


class _TradeoffNode:
    __slots__ = ("uid", "n", "rng", "wake_fanout", "decision", "halted",
                 "candidate", "rank", "pending_wins", "lost",
                 "rho_winner", "winner_port", "pending")

    def __init__(self, ctx, wake_fanout):
        n = ctx.n
        self.uid = ctx.uid
        self.n = n
        self.rng = ctx.rng
        self.wake_fanout = wake_fanout
        self.decision = UNDECIDED
        self.halted = False
        self.candidate = False
        self.rank = 0
        self.pending_wins = 0
        self.lost = False
        # referee state
        self.rho_winner = None
        self.winner_port = None
        self.pending = {}     # consulted port -> challenger port awaiting it

    # -- candidate side -----------------------------------------------------

    def on_wake(self):
        n, rng = self.n, self.rng
        out = []
        if n > 1:
            fan = min(self.wake_fanout, n - 1)
            out = [(_fan_ports(rng, n - 1, fan), ("wake",))]
        p_cand = min(1.0, 4.0 * math.log(n) / n) if n > 1 else 1.0
        if rng.random() < p_cand:
            self.candidate = True
            self.rank = rng.randrange(1, n ** 4 + 1)
            self.rho_winner = self.rank
            self.winner_port = _SELF
            if n > 1:
                refs = min(math.ceil(4.0 * math.sqrt(n * math.log(n))), n - 1)
                ports = np.asarray(sample_ports(rng, n - 1, refs))
                self.pending_wins = int(ports.size)
                out.append((ports, ("compete", self.rank)))
            else:
                self.pending_wins = 0
        if self.candidate and self.pending_wins == 0:
            return out + self._become_leader()
        return out

    def _become_leader(self):
        self.decision = LEADER
        self.halted = True
        return [(BROADCAST, ("announce",))] if self.n > 1 else []

    def on_message(self, port, payload):
        kind = payload[0]
        if kind == "compete":
            return self._on_compete(port, payload[1])
        if kind == "win":
            if self.lost or self.decision != UNDECIDED:
                return []
            self.pending_wins -= 1
            if self.pending_wins == 0:
                return self._become_leader()
            return []
        if kind == "lose":
            self.lost = True
            if self.decision == UNDECIDED:
                self.decision = NON_LEADER
            return []
        if kind == "consult":
            # someone outranked us at a referee: concede unless already leader
            if self.decision == LEADER:
                return [(port, ("consult-reply", True))]
            self.lost = True
            if self.decision == UNDECIDED:
                self.decision = NON_LEADER
            return [(port, ("consult-reply", False))]
        if kind == "consult-reply":
            return self._on_consult_reply(port, payload[1])
        if kind == "announce":
            if self.decision == UNDECIDED:
                self.decision = NON_LEADER
            self.halted = True
            return []
        return []

    # -- referee side -------------------------------------------------------

    def _on_compete(self, port, rho):
        if self.rho_winner is None:
            self.rho_winner = rho
            self.winner_port = port
            return [(port, ("win",))]
        if rho <= self.rho_winner:
            return [(port, ("lose",))]
        # higher rank: ask the dethroned winner whether it already leads.
        # The challenger is installed right away so later competes are judged
        # against the strongest rank seen; its win/lose answer waits only for
        # its own confirmation round-trip, never for earlier challengers'.
        prev = self.winner_port
        if prev == _SELF:
            if self.decision == LEADER:
                return [(port, ("lose",))]
            self.lost = True
            if self.decision == UNDECIDED:
                self.decision = NON_LEADER
            self.rho_winner = rho
            self.winner_port = port
            return [(port, ("win",))]
        self.rho_winner = rho
        self.winner_port = port
        self.pending[prev] = port
        return [(prev, ("consult",))]

    def _on_consult_reply(self, port, winner_is_leader):
        challenger = self.pending.pop(port)
        if winner_is_leader:
            return [(challenger, ("lose",))]
        return [(challenger, ("win",))]


def async_tradeoff(k, gamma=4):
    if k < 2:
        raise ConfigError("k must be >= 2")
    if gamma < 1:
        raise ConfigError("gamma must be >= 1")
    fan_cache = {}

    def factory(ctx):
        n = ctx.n
        if n >= 4:
            limit = int(math.log2(n) // math.log2(math.log2(n))) + 1
            if k > max(2, limit):
                raise ConfigError(f"k={k} too large for n={n}")
        if n not in fan_cache:
            # ceil(gamma * n**(1/k)) via exact integer arithmetic
            fan_cache[n] = ceil_root_pow(gamma ** k * n, 1, k)
        return _TradeoffNode(ctx, fan_cache[n])

    factory.wake_only_kinds = frozenset(("wake",))
    return factory
