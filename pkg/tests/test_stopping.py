from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gossipbench.stopping import (
    Criterion,
    Phase,
    StoppingConfig,
    StoppingState,
    mc_constants,
    median_counter_observe,
    median_counter_tick,
    tick_budget,
)


def test_nlogn_anchor():
    assert tick_budget(StoppingConfig("nlogn"), 63_392) == 304_411


def test_logsq_1000():
    assert tick_budget(StoppingConfig("log2n"), 1000) == 9


def test_log3_lnln_small():
    assert tick_budget(StoppingConfig("log3lnln"), 3) == 2


def test_logn_base_configurable():
    assert tick_budget(StoppingConfig("logn"), 1024) == 4
    assert tick_budget(StoppingConfig("logn", log_base=2), 1024) == 10


def test_median_is_not_a_budget():
    with pytest.raises(ValueError):
        tick_budget(StoppingConfig("median"), 100)


@pytest.mark.parametrize("criterion", ["log3lnln", "logn", "log2n", "nlogn"])
@pytest.mark.parametrize("n", [2, 3, 10, 1858, 126_514])
def test_budgets_positive(criterion, n):
    assert tick_budget(StoppingConfig(criterion), n) >= 1


def test_bad_log_base():
    with pytest.raises(ValueError):
        StoppingConfig("logn", log_base=1.0)


def test_mc_constants_hamsterster_size():
    ctr_max, c_phase, safety = mc_constants(StoppingConfig("median"), 1858)
    loglog = math.log2(math.log2(1858))
    assert c_phase == math.ceil(2 * loglog)
    assert ctr_max == c_phase + 1
    assert safety == 4 * math.ceil(math.log2(1858))


def test_observe_appends():
    ss = StoppingState()
    median_counter_observe(ss, (Phase.B, 3))
    assert ss.observations == [(Phase.B, 3)]


def test_observe_ignored_in_d():
    ss = StoppingState(phase=Phase.D)
    median_counter_observe(ss, (Phase.B, 3))
    assert ss.observations == []


def test_observe_requires_rumour():
    with pytest.raises(ValueError):
        median_counter_observe(StoppingState(), (Phase.B, 1), carries_rumour=False)


def test_median_rule_increments():
    ss = StoppingState(counter=2, observations=[(Phase.B, 2), (Phase.B, 3), (Phase.B, 1)])
    assert median_counter_tick(ss, ctr_max=8, c_phase=7) is False
    assert ss.counter == 3
    assert ss.observations == []


def test_median_rule_no_observations():
    ss = StoppingState(counter=2)
    median_counter_tick(ss, 8, 7)
    assert ss.counter == 2


def test_median_rule_tie_keeps_counter():
    ss = StoppingState(counter=3, observations=[(Phase.B, 5), (Phase.B, 1)])
    median_counter_tick(ss, 8, 7)
    assert ss.counter == 3


def test_c_phase_counts_as_ahead():
    ss = StoppingState(counter=4, observations=[(Phase.C, 1)])
    median_counter_tick(ss, 8, 7)
    assert ss.counter == 5


def test_reaching_ctr_max_enters_c():
    ss = StoppingState(counter=7, observations=[(Phase.B, 7)])
    assert median_counter_tick(ss, 8, 3) is False
    assert (ss.phase, ss.countdown) == (Phase.C, 3)


def test_c_countdown_one_stops():
    ss = StoppingState(phase=Phase.C, counter=8, countdown=1)
    assert median_counter_tick(ss, 8, 7) is True
    assert ss.phase is Phase.D


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 10**6))
def test_median_monotone_and_halts(seed, n):
    rng = random.Random(seed)
    ctr_max, c_phase, _ = mc_constants(StoppingConfig(Criterion.MEDIAN), n)
    ss = StoppingState()
    order = {Phase.B: 0, Phase.C: 1, Phase.D: 2}
    last = (0, 1)
    # always-ahead observations give the slowest monotone path its fastest pace
    for tick in range(1, 10 * (ctr_max + c_phase) + 1):
        for _ in range(rng.randrange(4)):
            phase = rng.choice([Phase.B, Phase.B, Phase.C])
            median_counter_observe(ss, (phase, rng.randrange(1, ctr_max + 2)))
        stop = median_counter_tick(ss, ctr_max, c_phase)
        now = (order[ss.phase], ss.counter)
        assert now >= last
        assert 1 <= ss.counter <= ctr_max
        last = now
        if stop:
            break
    assert ss.phase in (Phase.B, Phase.C, Phase.D)
