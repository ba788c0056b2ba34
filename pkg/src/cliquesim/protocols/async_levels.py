"""Deterministic asynchronous election by doubling support levels.

Every node starts as a candidate and climbs levels: at level i it asks its
first min(2^i, n) - 1 neighbors (itself is implicitly neighbor one) for
level-i support, and advances when all of them ack.  Support is granted per
level: a node acks the first level-i request it sees, and a later level-i
challenger with a higher ID triggers a conditional cancel of the current
holder, which survives only if it has already climbed past level i.  The
candidate that gets acked coverage of the whole clique announces itself.

Per-level support slots are spent at most once on a successful climb, so at
most n / 2^i candidates ever climb past level i, which bounds the message
count by O(n log n).  Every way a candidate can be killed requires a killer
whose final (level, ID) pair is lexicographically above the victim's, so the
maximal candidate is never killed and always becomes the unique leader.
"""

from ..model import UNDECIDED, LEADER, NON_LEADER
from ..sync_engine import BROADCAST


class _LevelNode:
    __slots__ = ("uid", "n", "decision", "halted",
                 "candidate", "level", "acked", "needed", "self_acked",
                 "sup", "held")

    def __init__(self, ctx):
        self.uid = ctx.uid
        self.n = ctx.n
        self.decision = UNDECIDED
        self.halted = False
        self.candidate = True
        self.level = 0
        self.acked = set()          # external ports acked at the current level
        self.needed = 0
        self.self_acked = False
        self.sup = {}               # level -> (uid, port); port None = ourself
        self.held = {}              # level -> best challenger awaiting cancel

    # -- candidate side -----------------------------------------------------

    def on_wake(self):
        return self._advance()      # level 0 needs no external support

    def _advance(self):
        if min(2 ** self.level, self.n) >= self.n:
            self.decision = LEADER
            self.halted = True
            return [(BROADCAST, ("announce", self.uid))] if self.n > 1 else []
        self.level += 1
        m = min(2 ** self.level, self.n)
        self.acked = set()
        self.needed = m - 1
        self.self_acked = False
        lvl = self.level
        # our own support slot answers first: we are our own neighbor one
        out = self._slot_request(None, self.uid, lvl)
        if not self.candidate:
            return out              # our slot was already lost to a higher ID
        return out + [(p, ("request", self.uid, lvl)) for p in range(1, m)]

    def _got_ack(self, port, lvl):
        if not self.candidate or lvl != self.level:
            return []
        if port is None:
            self.self_acked = True
        else:
            self.acked.add(port)
        if self.self_acked and len(self.acked) == self.needed:
            return self._advance()
        return []

    def _die(self):
        self.candidate = False      # level stays frozen for later cancels

    # -- message handling ---------------------------------------------------

    def on_message(self, port, payload):
        kind = payload[0]
        if kind == "request":
            return self._slot_request(port, payload[1], payload[2])
        if kind == "ack":
            return self._got_ack(port, payload[1])
        if kind == "lose":
            self._die()
            return []
        if kind == "cancel":
            # survive iff we already climbed past the challenged level
            lvl = payload[1]
            if self.level > lvl:
                return [(port, ("cancel-reply", lvl, False))]
            self._die()
            return [(port, ("cancel-reply", lvl, True))]
        if kind == "cancel-reply":
            return self._resolve_cancel(payload[1], payload[2])
        if kind == "announce":
            if self.decision == UNDECIDED:
                self.decision = NON_LEADER
            self.halted = True
            return []
        return []

    # -- referee side (one support slot per level) ---------------------------

    def _slot_request(self, port, w, lvl):
        holder = self.sup.get(lvl)
        if holder is None:
            self.sup[lvl] = (w, port)
            return self._grant(port, lvl)
        hu, hp = holder
        if w == hu:
            return self._grant(port, lvl)
        if lvl in self.held:
            # a cancel for this slot is in flight: hold only the strongest
            cw, cp = self.held[lvl]
            if w > cw:
                self.held[lvl] = (w, port)
                return self._deny(cp, lvl)
            return self._deny(port, lvl)
        if w < hu:
            return self._deny(port, lvl)
        if hp is None:
            # the slot backs our own candidacy; the cancel resolves locally
            if self.level > lvl:
                return self._deny(port, lvl)
            self._die()
            self.sup[lvl] = (w, port)
            return self._grant(port, lvl)
        self.held[lvl] = (w, port)
        return [(hp, ("cancel", lvl))]

    def _resolve_cancel(self, lvl, accepted):
        w, port = self.held.pop(lvl)
        if accepted:
            self.sup[lvl] = (w, port)
            return self._grant(port, lvl)
        return self._deny(port, lvl)

    def _grant(self, port, lvl):
        if port is None:
            return self._got_ack(None, lvl)
        return [(port, ("ack", lvl))]

    def _deny(self, port, lvl):
        if port is None:
            self._die()
            return []
        return [(port, ("lose",))]


def async_levels():
    def factory(ctx):
        return _LevelNode(ctx)

    return factory
