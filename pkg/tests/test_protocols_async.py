"""Behavioral tests for the asynchronous election protocols."""

import math
import random

import pytest

from cliquesim.adversary import fast_wakeups_slow_elections, fifo_stress, slow_competes
from cliquesim.async_engine import run_async, uniform_random_delay, unit_delay
from cliquesim.model import (
    LEADER,
    ConfigError,
    IdAssignment,
    random_id_assignment,
    random_port_mapping,
)
from cliquesim import protocols


def _inputs(n, seed):
    ids = random_id_assignment(n, n * n, random.Random(seed))
    return random_port_mapping(n, seed), ids


FACTORIES = [
    unit_delay(),
    uniform_random_delay(17),
    slow_competes(),
    fast_wakeups_slow_elections(),
    fifo_stress(17),
]


def _delays(factory, n, seed=0):
    return factory(n, random.Random(seed))


# -- rank/referee tradeoff protocol --------------------------------------------------

def test_tradeoff_parameter_validation():
    with pytest.raises(ConfigError):
        protocols.async_tradeoff(1)
    with pytest.raises(ConfigError):
        protocols.async_tradeoff(3, gamma=0)
    # k too large for n surfaces at node construction
    pm, ids = _inputs(4, 0)
    with pytest.raises(ConfigError):
        run_async(pm, ids, protocols.async_tradeoff(50))


def test_tradeoff_small_clique_never_two_leaders():
    """The protocol succeeds only with high probability (no candidate may
    volunteer), but it must never elect two leaders."""
    proto = protocols.async_tradeoff(2)
    wins = 0
    for t in range(60):
        pm, ids = _inputs(3, 300 + t)
        res = run_async(pm, ids, proto, seed=t, delayfn=_delays(unit_delay(), pm.n))
        assert len(res.leaders) <= 1
        assert not res.truncated
        wins += res.unique_leader()
    assert wins >= 40


@pytest.mark.parametrize("k", [2, 3])
def test_tradeoff_mostly_elects_under_all_schedulers(k):
    proto = protocols.async_tradeoff(k)
    for factory in FACTORIES:
        wins = 0
        for t in range(10):
            pm, ids = _inputs(64, 70 + t)
            res = run_async(pm, ids, proto, seed=t, delayfn=_delays(factory, 64, t))
            assert len(res.leaders) <= 1
            wins += res.unique_leader()
        assert wins >= 9


def test_tradeoff_ranks_drawn_from_node_tape_not_schedule():
    """Rank draws happen on wake-up from the per-node stream, so the rank
    vector is identical under any two schedulers given the same seed."""
    proto = protocols.async_tradeoff(2)
    pm, ids = _inputs(16, 4)
    a = run_async(pm, ids, proto, seed=9, delayfn=_delays(unit_delay(), pm.n))
    b = run_async(pm, ids, proto, seed=9, delayfn=_delays(fifo_stress(3), 16))
    assert [nd.rank for nd in a.nodes] == [nd.rank for nd in b.nodes]


def test_tradeoff_staggered_wake_still_elects():
    proto = protocols.async_tradeoff(2)
    wins = 0
    for t in range(10):
        n = 48
        pm, ids = _inputs(n, 500 + t)
        rng = random.Random(t)
        wake = {u: rng.uniform(0.0, float(n)) for u in range(n)}
        res = run_async(pm, ids, proto, seed=t,
                        delayfn=_delays(uniform_random_delay(t), n, t), wake=wake)
        assert len(res.leaders) <= 1
        wins += res.unique_leader()
    assert wins >= 9


def test_tradeoff_wake_messages_do_not_rouse_sleepers():
    proto = protocols.async_tradeoff(3)
    assert proto.wake_only_kinds == frozenset(("wake",))


# -- level-climbing protocol -----------------------------------------------------------


def _support_census(res):
    """Count, for each level i, the nodes whose level ever exceeded i."""
    n = res.n
    for i in range(0, n.bit_length() + 1):
        above = sum(1 for nd in res.nodes if nd is not None and nd.level >= i + 1)
        assert above <= n / (2 ** i) or 2 ** i >= n, (i, above)


def test_levels_two_nodes_bigger_id_wins():
    pm = random_port_mapping(2, 0)
    ids = IdAssignment((3, 7), 8)
    res = run_async(pm, ids, protocols.async_levels(), delayfn=_delays(unit_delay(), pm.n))
    assert res.unique_leader()
    assert [res.uids[u] for u in res.leaders] == [7]


def test_levels_single_node():
    pm = random_port_mapping(1, 0)
    ids = IdAssignment((5,), 6)
    res = run_async(pm, ids, protocols.async_levels(), delayfn=_delays(unit_delay(), pm.n))
    assert res.leaders == [0]


@pytest.mark.parametrize("n", [3, 4, 7, 16, 33])
def test_levels_unique_leader_and_support_bound(n):
    proto = protocols.async_levels()
    for t in range(15):
        pm, ids = _inputs(n, 1000 * n + t)
        res = run_async(pm, ids, proto, seed=t,
                        delayfn=_delays(uniform_random_delay(t), n, t))
        assert res.unique_leader()
        assert not res.truncated
        _support_census(res)


def test_levels_unique_leader_hostile_schedulers():
    proto = protocols.async_levels()
    for factory in FACTORIES:
        for t in range(6):
            pm, ids = _inputs(24, 4200 + t)
            res = run_async(pm, ids, proto, seed=t, delayfn=_delays(factory, 24, t))
            assert res.unique_leader()
            _support_census(res)


def test_levels_staggered_wake():
    proto = protocols.async_levels()
    for t in range(10):
        n = 10
        pm, ids = _inputs(n, 777 + t)
        rng = random.Random(t)
        wake = {u: rng.uniform(0.0, 5.0) for u in range(n)}
        res = run_async(pm, ids, proto, seed=t,
                        delayfn=_delays(uniform_random_delay(t), n, t), wake=wake)
        assert res.unique_leader()


def test_levels_message_growth_near_n_log_n():
    proto = protocols.async_levels()
    worst = {}
    for n in (16, 64):
        peak = 0
        for t in range(10):
            pm, ids = _inputs(n, 31 * n + t)
            res = run_async(pm, ids, proto, seed=t, delayfn=_delays(slow_competes(), n, t))
            assert res.unique_leader()
            peak = max(peak, res.messages / (n * math.log2(n)))
        worst[n] = peak
    # normalized message cost does not blow up with n
    assert worst[64] <= worst[16] * 1.5
