"""Deterministic synchronous leader election protocols.

Two message/round tradeoffs: a fixed-round-budget survivor/referee
tournament that elects the maximum ID, and a small-ID-universe broadcast
schedule that elects the minimum ID.
"""

from ..model import UNDECIDED, LEADER, NON_LEADER, ConfigError
from ..sync_engine import BROADCAST
from ._util import ceil_root_pow


class _TournamentNode:
    """Survivor/referee tournament with round budget ell (odd, >= 3).

    k = (ell+3)/2.  Iterations i = 1..k-2 take two rounds each: survivors
    send their ID over f_i = min(ceil(n^(i/(k-1))), n-1) lowest-numbered
    previously unused ports; each node that received IDs replies once, to
    the maximum; a survivor stays alive iff every contacted port answered.
    In round ell the survivors broadcast and the one seeing no higher ID
    (always the global maximum) wins.
    """

    __slots__ = ("uid", "n", "ell", "k", "alive", "next_port", "sent_ports",
                 "reply_port", "decision", "halted")

    def __init__(self, ctx, ell):
        self.uid = ctx.uid
        self.n = ctx.n
        self.ell = ell
        self.k = (ell + 3) // 2
        self.alive = True
        self.next_port = 1          # used ports form the prefix below this
        self.sent_ports = ()
        self.reply_port = None
        self.decision = UNDECIDED
        self.halted = False

    def send(self, rnd):
        n = self.n
        if rnd == self.ell:
            if self.alive:
                return [(BROADCAST, ("id-broadcast", self.uid))]
            return []
        if rnd % 2 == 1:            # competition round of iteration i
            if not self.alive:
                return []
            i = (rnd + 1) // 2
            f = min(ceil_root_pow(n, i, self.k - 1), n - 1)
            lo = self.next_port
            hi = min(lo + f - 1, n - 1)
            self.sent_ports = tuple(range(lo, hi + 1))
            self.next_port = hi + 1
            return [(p, ("compete", self.uid)) for p in self.sent_ports]
        # referee round: answer the strongest competitor of the iteration
        if self.reply_port is not None:
            p, self.reply_port = self.reply_port, None
            return [(p, ("win",))]
        return []

    def receive(self, rnd, inbox):
        if rnd == self.ell:
            if self.alive:
                best = max((m[1] for _, m in inbox), default=0)
                self.decision = LEADER if self.uid > best else NON_LEADER
            else:
                self.decision = NON_LEADER
            self.halted = True
        elif rnd % 2 == 1:
            competes = [(m[1], p) for p, m in inbox if m[0] == "compete"]
            if competes:
                self.reply_port = max(competes)[1]
        else:
            wins = {p for p, m in inbox if m[0] == "win"}
            if self.alive and not wins.issuperset(self.sent_ports):
                self.alive = False
            self.sent_ports = ()


def improved_afek_gafni(ell):
    if ell < 3 or ell % 2 == 0:
        raise ConfigError("round budget must be an odd integer >= 3")

    def factory(ctx):
        return _TournamentNode(ctx, ell)

    return factory


class _SmallIdNode:
    """Broadcast schedule over ID blocks of width d*g; minimum ID wins."""

    __slots__ = ("uid", "n", "block", "spoke", "decision", "halted")

    def __init__(self, ctx, d, g):
        if d > ctx.n:
            raise ConfigError("d must be <= n")
        if ctx.uid > ctx.n * g:
            raise ConfigError(f"id {ctx.uid} outside [1, {ctx.n * g}]")
        self.uid = ctx.uid
        self.n = ctx.n
        self.block = d * g
        self.spoke = False
        self.decision = UNDECIDED
        self.halted = False

    def send(self, rnd):
        if (rnd - 1) * self.block < self.uid <= rnd * self.block:
            self.spoke = True
            return [(BROADCAST, ("id-broadcast", self.uid))]
        return []

    def receive(self, rnd, inbox):
        ids = [m[1] for _, m in inbox]
        if self.spoke:
            ids.append(self.uid)
        if ids:
            winner = min(ids)
            self.decision = LEADER if winner == self.uid else NON_LEADER
            self.halted = True


def small_id_broadcast(d, g):
    if d < 1 or g < 1:
        raise ConfigError("d and g must be positive integers")

    def factory(ctx):
        return _SmallIdNode(ctx, d, g)

    return factory
