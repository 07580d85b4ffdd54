from __future__ import annotations

import random

import pytest

from gossipbench.graphio import Group, build_graph, classify_groups
from gossipbench.policies import Policy
from gossipbench.protocol import (
    FanoutConfig,
    MsgKind,
    NodeState,
    ProtocolContext,
    ProtocolMessage,
    fanout_count,
    on_pull_reply,
    on_pull_request,
    on_push,
    on_timer,
)
from gossipbench.stopping import StoppingConfig


@pytest.fixture
def square():
    return build_graph("undirected", [(0, 1), (1, 2), (2, 3), (3, 0)])


def _ctx(g, **kwargs):
    return ProtocolContext(graph=g, rng=random.Random(0), **kwargs)


def test_informed_timer_pushes_once(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = NodeState.INFORMED
    messages, again = on_timer(node, ctx)
    assert again
    assert len(messages) == 1
    msg = messages[0]
    assert msg.kind is MsgKind.PUSH and msg.carries_rumour
    assert msg.dst in square.out_neighbors[0]
    assert node.tick_count == 1


def test_uninformed_timer_pulls_once(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    messages, _ = on_timer(node, ctx)
    assert [m.kind for m in messages] == [MsgKind.PULL_REQUEST]
    assert not messages[0].carries_rumour


def test_budget_exhausted_removes(square):
    ctx = _ctx(square, stopping=StoppingConfig("logn"))
    budget = ctx.budget
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = NodeState.INFORMED
    node.tick_count = budget
    messages, again = on_timer(node, ctx)
    assert (messages, again, node.state) == ([], False, NodeState.REMOVED)


def test_budget_exhausted_uninformed_goes_dormant(square):
    ctx = _ctx(square, stopping=StoppingConfig("logn"))
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.tick_count = ctx.budget
    on_timer(node, ctx)
    assert node.state is NodeState.DORMANT


def test_timer_in_removed_state_is_an_error(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = NodeState.REMOVED
    with pytest.raises(RuntimeError):
        on_timer(node, ctx)


def _push(dst=0):
    return ProtocolMessage(MsgKind.PUSH, 1, dst, True)


def test_push_informs(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    assert on_push(node, _push(), 3.2, ctx) is True
    assert (node.state, node.first_informed_at) == (NodeState.INFORMED, 3.2)
    assert on_push(node, _push(), 4.0, ctx) is False
    assert node.first_informed_at == 3.2


def test_push_to_dormant(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = NodeState.DORMANT
    assert on_push(node, _push(), 1.0, ctx) is True
    assert node.state is NodeState.INFORMED


def test_push_to_removed_no_change(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = NodeState.REMOVED
    assert on_push(node, _push(), 1.0, ctx) is False
    assert node.state is NodeState.REMOVED


@pytest.mark.parametrize(
    "state, removed_rumour, expected",
    [
        (NodeState.INFORMED, False, True),
        (NodeState.UNINFORMED, False, False),
        (NodeState.DORMANT, False, False),
        (NodeState.REMOVED, False, False),
        (NodeState.REMOVED, True, True),
    ],
)
def test_pull_request_reply(square, state, removed_rumour, expected):
    ctx = _ctx(square, removed_replies_rumour=removed_rumour)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    node.state = state
    reply = on_pull_request(node, ProtocolMessage(MsgKind.PULL_REQUEST, 1, 0, False), ctx)
    assert reply.kind is MsgKind.PULL_REPLY
    assert (reply.src, reply.dst) == (0, 1)
    assert reply.carries_rumour is expected


def test_pull_reply_handling(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    empty = ProtocolMessage(MsgKind.PULL_REPLY, 1, 0, False)
    full = ProtocolMessage(MsgKind.PULL_REPLY, 1, 0, True)
    assert on_pull_reply(node, empty, 1.0, ctx) is False
    assert node.state is NodeState.UNINFORMED
    assert on_pull_reply(node, full, 2.0, ctx) is True
    assert on_pull_reply(node, full, 3.0, ctx) is False
    assert node.first_informed_at == 2.0


def test_wrong_message_kind_rejected(square):
    ctx = _ctx(square)
    node = ctx.make_node(0, Policy.RANDOM, 0)
    with pytest.raises(ValueError):
        on_push(node, ProtocolMessage(MsgKind.PULL_REPLY, 1, 0, True), 0.0, ctx)


@pytest.mark.parametrize(
    "cfg, degree, expected",
    [
        (FanoutConfig("absolute", f_abs=3), 2, 2),
        (FanoutConfig("absolute", f_abs=3), 10, 3),
        (FanoutConfig("relative", f_rel=0.04), 10, 1),
        (FanoutConfig("relative", f_rel=0.04), 100, 4),
        (FanoutConfig("relative", f_rel=0.01), 1, 1),
        (FanoutConfig("relative", f_rel=0.29), 100, 29),
        (FanoutConfig("relative", f_rel=1.0), 7, 7),
    ],
)
def test_fanout_count(cfg, degree, expected):
    assert fanout_count(cfg, degree) == expected


def test_fanout_hybrid():
    cfg = FanoutConfig("hybrid", f_rel=0.04, hybrid_middle_abs=2)
    assert fanout_count(cfg, 200, Group.G3_GIANT) == 8
    assert fanout_count(cfg, 5, Group.G2_MIDDLE) == 2
    assert fanout_count(cfg, 1, Group.G1_SINGLETON) == 1
    with pytest.raises(ValueError):
        fanout_count(cfg, 5)


def test_hybrid_context_uses_groups():
    # hub, 40 leaves and a 20-node ring attached to the hub: threshold degree 3
    ring = [(100 + i, 100 + (i + 1) % 20) for i in range(20)]
    g = build_graph("undirected", [(0, i) for i in range(1, 41)] + [(0, 100)] + ring)
    groups = classify_groups(g)
    assert groups.threshold_degree == 3
    ctx = _ctx(g, fanout=FanoutConfig("hybrid", f_rel=0.04, hybrid_middle_abs=2), groups=groups)
    for v in range(g.node_count):
        expected = {
            Group.G1_SINGLETON: 1,
            Group.G2_MIDDLE: 2,
            Group.G3_GIANT: max(1, int(0.04 * g.out_degree[v])),
        }[groups.group[v]]
        assert ctx.fanouts[v] == expected
    assert sorted(set(groups.group)) == sorted(Group)


def test_fanout_config_validation():
    with pytest.raises(ValueError):
        FanoutConfig("absolute", f_abs=0)
    with pytest.raises(ValueError):
        FanoutConfig("relative", f_rel=1.5)
