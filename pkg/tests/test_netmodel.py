from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gossipbench.netmodel import EMPTY, WITH_RUMOUR, LinkTable, MessageSize, assign_links, message_delay


def test_assign_links_ranges():
    links = assign_links(5000, random.Random(1))
    assert all(0.010 <= x <= 0.100 for x in links.latency)
    assert all(3e6 <= x <= 50e6 for x in links.bandwidth)
    # not degenerate: spread covers most of the range
    assert min(links.latency) < 0.012 and max(links.latency) > 0.098


def test_assign_links_deterministic():
    assert assign_links(100, random.Random(9)) == assign_links(100, random.Random(9))
    assert assign_links(100, random.Random(9)) != assign_links(100, random.Random(10))


def test_message_sizes():
    assert WITH_RUMOUR.total_bits == 224
    assert EMPTY.total_bits == 160


def test_delay_formula_example():
    links = LinkTable(latency=(0.010, 0.020), bandwidth=(3e6, 10e6))
    assert message_delay(links, 0, 1, MessageSize(20, 8)) == pytest.approx(0.010 + 0.020 + 224 / 3e6)
    assert message_delay(links, 0, 1, MessageSize(20, 8)) == pytest.approx(0.0300747, abs=1e-7)


def test_doubling_bandwidth_halves_transmission_only():
    slow = LinkTable(latency=(0.01, 0.02), bandwidth=(4e6, 4e6))
    fast = LinkTable(latency=(0.01, 0.02), bandwidth=(8e6, 8e6))
    t_slow = message_delay(slow, 0, 1, WITH_RUMOUR) - 0.03
    t_fast = message_delay(fast, 0, 1, WITH_RUMOUR) - 0.03
    assert t_fast == pytest.approx(t_slow / 2)


latencies = st.floats(0.010, 0.100)
bandwidths = st.floats(3e6, 50e6)


@given(latencies, latencies, bandwidths, bandwidths, st.sampled_from([EMPTY, WITH_RUMOUR]))
def test_delay_symmetric_positive(l0, l1, b0, b1, size):
    links = LinkTable((l0, l1), (b0, b1))
    d = message_delay(links, 0, 1, size)
    assert d == message_delay(links, 1, 0, size)
    assert d > 0


@given(latencies, latencies, bandwidths, bandwidths, st.floats(0, 0.05))
def test_delay_monotone(l0, l1, b0, b1, extra):
    links = LinkTable((l0, l1), (b0, b1))
    bumped = LinkTable((l0 + extra, l1), (b0, b1))
    assert message_delay(links, 0, 1, EMPTY) <= message_delay(links, 0, 1, WITH_RUMOUR)
    assert message_delay(links, 0, 1, EMPTY) <= message_delay(bumped, 0, 1, EMPTY)


def test_transmission_negligible():
    # largest message over the slowest link vs. the smallest latency sum
    transmission = WITH_RUMOUR.total_bits / 3e6
    assert transmission <= 7.5e-5
    assert transmission < 0.01 * 0.020
