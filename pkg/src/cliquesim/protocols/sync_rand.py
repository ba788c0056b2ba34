"""Randomized synchronous leader election protocols.

A restarting three-round Las Vegas election (never wrong, terminates with
probability 1) and a two-round election that tolerates adversarial wake-up
at a configurable failure probability.
"""

import math

from ..model import UNDECIDED, LEADER, NON_LEADER, ConfigError
from ..sync_engine import BROADCAST
from ._util import ceil_sqrt, sample_ports


class _LasVegasNode:
    """Repeated 3-round attempts: bid to random referees, win on unique
    maximum rank, announce; everyone restarts unless exactly one
    announcement was observed, so a wrong election is impossible.

    Degenerate case: n = 2 forces both nodes to be candidates and both to
    win their single referee, so no run of attempts can ever decide.
    """

    def __init__(self, ctx, a, b):
        n = ctx.n
        self.uid = ctx.uid
        self.n = n
        self.rng = ctx.rng
        self.p = min(1.0, a * math.log(n) / n) if n > 1 else 1.0
        self.m = min(math.ceil(b * math.sqrt(n * math.log(n))), n - 1) \
            if n > 1 else 0
        self.rank_top = n ** 4
        self.attempts = 0
        self.candidate = False
        self.rank = 0
        self.ports = ()
        self.wins = 0
        self.provisional = False
        self.reply_port = None
        self.decision = UNDECIDED
        self.halted = False

    def send(self, rnd):
        phase = (rnd - 1) % 3
        if phase == 0:
            self.attempts += 1
            self.provisional = False
            self.wins = 0
            self.candidate = self.rng.random() < self.p
            if self.candidate:
                self.rank = self.rng.randrange(1, self.rank_top + 1)
                self.ports = sample_ports(self.rng, self.n - 1, self.m)
                return [(p, ("compete", self.rank)) for p in self.ports]
            return []
        if phase == 1:
            if self.reply_port is not None:
                p, self.reply_port = self.reply_port, None
                return [(p, ("win",))]
            return []
        if self.provisional:
            return [(BROADCAST, ("announce", self.uid))]
        return []

    def receive(self, rnd, inbox):
        phase = (rnd - 1) % 3
        if phase == 0:
            bids = [(m[1], p) for p, m in inbox if m[0] == "compete"]
            if bids:
                top = max(r for r, _ in bids)
                at_top = [p for r, p in bids if r == top]
                # rank tie at the maximum: answer nobody
                if len(at_top) == 1:
                    self.reply_port = at_top[0]
        elif phase == 1:
            self.wins = sum(1 for _, m in inbox if m[0] == "win")
            self.provisional = self.candidate and self.wins == len(self.ports)
        else:
            announcers = {m[1] for _, m in inbox if m[0] == "announce"}
            if self.provisional:
                announcers.add(self.uid)
            if len(announcers) == 1:
                winner = announcers.pop()
                self.decision = LEADER if winner == self.uid else NON_LEADER
                self.halted = True


def las_vegas_three_round(a=4.0, b=4.0):
    if a <= 0 or b <= 0:
        raise ConfigError("scales a and b must be positive")

    def factory(ctx):
        return _LasVegasNode(ctx, a, b)

    return factory


class _TwoRoundNode:
    """Two rounds under adversarial wake-up.

    Adversary-woken nodes scatter wake messages over ceil(sqrt(n)) random
    ports in round 1; each node receiving one becomes a candidate with
    probability min(1, ln(1/eps)/ceil(sqrt(n))), broadcasts a random rank,
    and wins iff every received rank is strictly below its own.  Zero
    leaders is a legitimate (probability <= eps + 1/n) failure.
    """

    def __init__(self, ctx, eps):
        n = ctx.n
        self.uid = ctx.uid
        self.n = n
        self.rng = ctx.rng
        root = ceil_sqrt(n)
        self.fanout = min(root, n - 1)
        self.q = min(1.0, math.log(1.0 / eps) / root) if root else 1.0
        # pre-draw the candidacy coin and rank so a node's tape depends
        # only on (seed, index), not on how (or when) it was woken
        self._coin = self.rng.random()
        self._rank_draw = self.rng.randrange(1, n ** 4 + 1)
        self.candidate = False
        self.rank = 0
        self.decision = UNDECIDED
        self.halted = False

    def send(self, rnd):
        # only adversary-woken nodes are active in round 1
        if rnd == 1:
            ports = sample_ports(self.rng, self.n - 1, self.fanout)
            return [(p, ("wake",)) for p in ports]
        if rnd == 2 and self.candidate:
            return [(BROADCAST, ("compete", self.rank))]
        return []

    def receive(self, rnd, inbox):
        if rnd == 1:
            if inbox and self._coin < self.q:
                self.candidate = True
                self.rank = self._rank_draw
        elif rnd >= 2:
            if self.candidate and all(
                m[1] < self.rank for _, m in inbox if m[0] == "compete"
            ):
                self.decision = LEADER
            else:
                self.decision = NON_LEADER
            self.halted = True


def two_round_adversarial(eps):
    if not 0.0 < eps < 1.0:
        raise ConfigError("eps must lie in (0, 1)")

    def factory(ctx):
        return _TwoRoundNode(ctx, eps)

    return factory
