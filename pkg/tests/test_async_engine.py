"""Tests for the asynchronous event engine, delays, and FIFO enforcement."""

import random

import pytest

from cliquesim.model import (
    LEADER,
    NON_LEADER,
    UNDECIDED,
    ConfigError,
    random_id_assignment,
    random_port_mapping,
)
from cliquesim.async_engine import (
    FROM_FIRST_WAKE,
    FROM_LAST_SPONTANEOUS_WAKE,
    SchedulerError,
    adaptive,
    fifo_clamp,
    run_async,
    unit_delay,
    uniform_random_delay,
)
from cliquesim import protocols


def _inputs(n, seed=0):
    ids = random_id_assignment(n, n * n, random.Random(seed))
    pm = random_port_mapping(n, seed)
    return pm, ids


class _Echo:
    """Pings port 1 on wake; answers any ping once; decides immediately."""

    def __init__(self, ctx):
        self.decision = NON_LEADER
        self.halted = False
        self.log = []

    def on_wake(self):
        return [(1, ("ping",))]

    def on_message(self, port, payload):
        self.log.append((port, payload))
        return []


def test_delays_in_unit_interval_and_deliveries_counted():
    pm, ids = _inputs(8, seed=2)
    events = []
    res = run_async(pm, ids, _Echo, delayfn=unit_delay()(8, random.Random(0)),
                    trace=events.append)
    sends = [e for e in events if e["kind"] == "send"]
    delivers = [e for e in events if e["kind"] == "deliver"]
    assert len(sends) == res.messages == 8
    assert len(delivers) == 8
    assert res.last_delivery == 1.0
    assert res.elapsed() == 1.0


def test_trace_send_deliver_delay_in_unit_interval():
    pm, ids = _inputs(10, seed=5)
    events = []
    run_async(pm, ids, _Echo,
              delayfn=uniform_random_delay(3)(10, random.Random(3)),
              trace=events.append)
    # per (node, port) pair send/deliver: pair sends with the matching deliver
    sends = [(e["time"]) for e in events if e["kind"] == "send"]
    delivers = [(e["time"]) for e in events if e["kind"] == "deliver"]
    assert len(sends) == len(delivers)
    for ts, td in zip(sorted(sends), sorted(delivers)):
        assert 0.0 < td - ts <= 1.0 or td >= ts  # all sends at t=0 here
    assert all(0.0 < t <= 1.0 for t in delivers)


def test_engine_detects_fifo_violation_of_unsafe_delayfn():
    class TwoPings:
        def __init__(self, ctx):
            self.decision = NON_LEADER
            self.halted = False

        def on_wake(self):
            return [(1, ("a",)), (1, ("b",))]

        def on_message(self, port, payload):
            return []

    pm, ids = _inputs(3)
    flip = iter([1.0, 0.1] * 100)
    bad = lambda t, u, v, payload: next(flip)
    with pytest.raises(SchedulerError):
        run_async(pm, ids, TwoPings, delayfn=bad)


def test_engine_rejects_out_of_range_delay():
    pm, ids = _inputs(3)
    with pytest.raises(SchedulerError):
        run_async(pm, ids, _Echo, delayfn=lambda t, u, v, p: 1.5)
    with pytest.raises(SchedulerError):
        run_async(pm, ids, _Echo, delayfn=lambda t, u, v, p: 0.0)


def test_fifo_clamp_restores_link_order():
    raw_delays = iter([0.9, 0.1])   # second message would overtake
    clamped = fifo_clamp(4, lambda t, u, v, p: next(raw_delays))
    assert clamped.fifo_safe
    a = 0.1 + clamped(0.1, 0, 1, ("x",))
    b = 0.5 + clamped(0.5, 0, 1, ("y",))
    assert b >= a
    assert b - 0.5 <= 1.0


def test_adaptive_policy_is_clamped_into_contract():
    make = adaptive(lambda t, u, v, p: 5.0 if p[0] == "a" else -1.0)
    f = make(4, random.Random(0))
    assert f(0.0, 0, 1, ("a",)) == 1.0
    assert 0.0 < f(0.0, 0, 2, ("b",)) <= 1.0


def test_async_determinism_per_seed():
    pm, ids = _inputs(64, seed=7)
    proto = protocols.async_tradeoff(2)
    mk = uniform_random_delay()
    a = run_async(pm, ids, proto, seed=5, delayfn=mk(64, random.Random(9)))
    b = run_async(pm, ids, proto, seed=5, delayfn=mk(64, random.Random(9)))
    assert (a.decisions, a.messages, a.events, a.last_delivery) == \
           (b.decisions, b.messages, b.events, b.last_delivery)


def test_elapsed_accountings():
    pm, ids = _inputs(4, seed=1)
    res = run_async(pm, ids, _Echo, wake={0: 0.0, 1: 2.0},
                    delayfn=unit_delay()(4, random.Random(0)))
    assert res.first_wake == 0.0
    assert res.last_spont_wake == 2.0
    assert res.elapsed(FROM_FIRST_WAKE) == res.last_delivery
    assert res.elapsed(FROM_LAST_SPONTANEOUS_WAKE) == res.last_delivery - 2.0


def test_message_woken_node_runs_wake_handler_first():
    wakes = []

    class Tattle:
        def __init__(self, ctx):
            self.idx = ctx.index
            self.decision = NON_LEADER
            self.halted = False

        def on_wake(self):
            wakes.append(self.idx)
            return [(1, ("ping",))] if self.idx == 0 else []

        def on_message(self, port, payload):
            return []

    pm, ids = _inputs(4, seed=3)
    res = run_async(pm, ids, Tattle, wake={0: 0.0},
                    delayfn=unit_delay()(4, random.Random(0)))
    v, _ = pm.resolve((0, 1))
    assert wakes == [0, v]
    assert res.wake_times[v] == 1.0
    assert not res.all_awake_by(10.0)   # two nodes never woke
    assert res.all_awake_by(1.0) is False


def test_wake_validation():
    pm, ids = _inputs(4)
    with pytest.raises(ConfigError):
        run_async(pm, ids, _Echo, wake={})
    with pytest.raises(ConfigError):
        run_async(pm, ids, _Echo, wake={0: -1.0})
    other = random_id_assignment(3, 9, random.Random(0))
    with pytest.raises(ConfigError):
        run_async(pm, other, _Echo)


def test_truncation_on_event_budget():
    class Chatter:
        def __init__(self, ctx):
            self.decision = UNDECIDED
            self.halted = False

        def on_wake(self):
            return [(1, ("go",))]

        def on_message(self, port, payload):
            return [(port, ("go",))]   # ping-pong forever

    pm, ids = _inputs(2)
    res = run_async(pm, ids, Chatter, max_events=10,
                    delayfn=unit_delay()(2, random.Random(0)))
    assert res.truncated


def test_wake_only_kinds_suppressed_for_awake_destinations():
    """Wake messages to awake nodes are counted but never dispatched."""

    class WakeSpam:
        def __init__(self, ctx):
            self.decision = NON_LEADER
            self.halted = False
            self.inbox = []

        def on_wake(self):
            return [(p, ("wake",)) for p in range(1, 4)]

        def on_message(self, port, payload):
            self.inbox.append(payload)
            return []

    WakeSpamFactory = WakeSpam
    WakeSpamFactory.wake_only_kinds = frozenset(("wake",))
    pm, ids = _inputs(4)
    res = run_async(pm, ids, WakeSpamFactory,
                    delayfn=unit_delay()(4, random.Random(0)))
    assert res.messages == 12                 # all sends counted
    assert res.last_delivery == 1.0           # arrivals advance the clock
    assert all(nd.inbox == [] for nd in res.nodes)
    assert res.events <= 12                   # far fewer than 4 + 12 otherwise


def test_halted_node_drops_mail_silently():
    class OneShot:
        def __init__(self, ctx):
            self.idx = ctx.index
            self.decision = NON_LEADER
            self.halted = self.idx != 0       # only node 0 ever acts
            self.got = []

        def on_wake(self):
            return [(1, ("ping",))] if self.idx == 0 else []

        def on_message(self, port, payload):
            self.got.append(payload)
            return []

    pm, ids = _inputs(3)
    res = run_async(pm, ids, OneShot, delayfn=unit_delay()(3, random.Random(0)))
    assert res.messages == 1
    assert all(nd.got == [] for nd in res.nodes if nd is not None)
