"""Asynchronous push & pull node state machine."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .graphio import Graph, Group, GroupAssignment
from .policies import Policy, PolicyState, init_policy_state, select_targets
from .stopping import (
    Criterion,
    Phase,
    StoppingConfig,
    StoppingState,
    mc_constants,
    median_counter_observe,
    median_counter_start,
    median_counter_tick,
    tick_budget,
)


class NodeState(str, Enum):
    UNINFORMED = "uninformed"
    INFORMED = "informed"
    REMOVED = "removed"
    DORMANT = "dormant"


class MsgKind(str, Enum):
    PUSH = "push"
    PULL_REQUEST = "pull"
    PULL_REPLY = "reply"


class FanoutMode(str, Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class FanoutConfig:
    mode: FanoutMode = FanoutMode.ABSOLUTE
    f_abs: int = 1
    f_rel: float = 0.04
    hybrid_middle_abs: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", FanoutMode(self.mode))
        if self.f_abs < 1 or self.hybrid_middle_abs < 1:
            raise ValueError("absolute fan-out must be >= 1")
        if not 0 <= self.f_rel <= 1:
            raise ValueError("relative fan-out must lie in [0, 1]")

    def describe(self) -> str:
        if self.mode is FanoutMode.ABSOLUTE:
            return str(self.f_abs)
        if self.mode is FanoutMode.RELATIVE:
            return f"{self.f_rel:g}"
        return f"{self.f_rel:g}/{self.hybrid_middle_abs}"


@dataclass(slots=True)
class ProtocolMessage:
    kind: MsgKind
    src: int
    dst: int
    carries_rumour: bool
    mc_state: tuple[Phase, int] | None = None


@dataclass(slots=True)
class NodeRuntime:
    node: int
    policy_state: PolicyState
    state: NodeState = NodeState.UNINFORMED
    first_informed_at: float | None = None
    tick_count: int = 0
    stopping_state: StoppingState | None = None


def fanout_count(cfg: FanoutConfig, out_degree: int, group: Group | None = None) -> int:
    if out_degree < 1:
        raise ValueError("fan-out needs at least one neighbor")

    def relative() -> int:
        return min(out_degree, max(1, math.floor(cfg.f_rel * out_degree + 1e-9)))

    if cfg.mode is FanoutMode.ABSOLUTE:
        return min(cfg.f_abs, out_degree)
    if cfg.mode is FanoutMode.RELATIVE:
        return relative()
    if group is None:
        raise ValueError("hybrid fan-out needs a group assignment")
    if group is Group.G2_MIDDLE:
        return min(cfg.hybrid_middle_abs, out_degree)
    return relative()


@dataclass
class ProtocolContext:
    """Everything the handlers need besides the node itself."""

    graph: Graph
    rng: random.Random
    fanout: FanoutConfig = field(default_factory=FanoutConfig)
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    groups: GroupAssignment | None = None
    removed_replies_rumour: bool = False

    def __post_init__(self) -> None:
        n = self.graph.node_count
        criterion = self.stopping.criterion
        self.median = criterion is Criterion.MEDIAN
        self.budget = None
        if criterion.is_budget:
            # a lone node has nobody to talk to; one idle tick then stop
            self.budget = tick_budget(self.stopping, n) if n >= 2 else 1
        self.mc_ctr_max, self.mc_c_phase, self.mc_safety = mc_constants(self.stopping, n)
        if self.fanout.mode is FanoutMode.HYBRID and self.groups is None:
            raise ValueError("hybrid fan-out needs a group assignment")
        degrees = self.graph.out_degree
        groups = self.groups.group if self.groups is not None else [None] * n
        self.fanouts = [
            fanout_count(self.fanout, d, groups[v]) if d else 0 for v, d in enumerate(degrees)
        ]

    def make_node(self, v: int, policy: Policy, memory: int) -> NodeRuntime:
        ps = init_policy_state(self.graph.out_neighbors[v], policy, memory, self.rng, self.graph.out_degree)
        return NodeRuntime(node=v, policy_state=ps)


def _annotation(node: NodeRuntime) -> tuple[Phase, int] | None:
    ss = node.stopping_state
    if ss is None:
        return None
    return (ss.phase, ss.counter)


def _inform(node: NodeRuntime, now: float, msg: ProtocolMessage, ctx: ProtocolContext) -> bool:
    """Uninformed/Dormant -> Informed. Returns True on the first inform."""
    if node.state not in (NodeState.UNINFORMED, NodeState.DORMANT):
        if ctx.median and node.stopping_state is not None and node.state is NodeState.INFORMED:
            median_counter_observe(node.stopping_state, msg.mc_state)
        return False
    node.state = NodeState.INFORMED
    node.first_informed_at = now
    if ctx.median:
        node.stopping_state = median_counter_start(msg.mc_state, ctx.mc_ctr_max, ctx.mc_c_phase)
    return True


def _stop(node: NodeRuntime) -> None:
    if node.state is NodeState.INFORMED:
        node.state = NodeState.REMOVED
    elif node.state is NodeState.UNINFORMED:
        node.state = NodeState.DORMANT


def on_timer(node: NodeRuntime, ctx: ProtocolContext) -> tuple[list[ProtocolMessage], bool]:
    """Handle a timer expiry. Returns (outgoing messages, keep ticking)."""
    if node.state in (NodeState.REMOVED, NodeState.DORMANT):
        raise RuntimeError(f"node {node.node} in state {node.state.value} has no timer")
    cap = ctx.budget
    if ctx.median:
        cap = ctx.mc_safety
    if cap is not None and node.tick_count >= cap:
        _stop(node)
        return [], False

    node.tick_count += 1
    f = ctx.fanouts[node.node]
    informed = node.state is NodeState.INFORMED
    messages: list[ProtocolMessage] = []
    if f:
        targets = select_targets(node.policy_state, f, ctx.rng)
        if informed:
            note = _annotation(node)
            messages = [ProtocolMessage(MsgKind.PUSH, node.node, t, True, note) for t in targets]
        else:
            messages = [ProtocolMessage(MsgKind.PULL_REQUEST, node.node, t, False) for t in targets]

    if informed and ctx.median and median_counter_tick(node.stopping_state, ctx.mc_ctr_max, ctx.mc_c_phase):
        _stop(node)
        return messages, False
    return messages, True


def on_push(node: NodeRuntime, msg: ProtocolMessage, now: float, ctx: ProtocolContext) -> bool:
    """Returns True when the push informed the node for the first time."""
    if msg.kind is not MsgKind.PUSH:
        raise ValueError("expected a push message")
    return _inform(node, now, msg, ctx)


def on_pull_request(node: NodeRuntime, msg: ProtocolMessage, ctx: ProtocolContext) -> ProtocolMessage:
    if msg.kind is not MsgKind.PULL_REQUEST:
        raise ValueError("expected a pull request")
    has_rumour = node.state is NodeState.INFORMED or (
        node.state is NodeState.REMOVED and ctx.removed_replies_rumour
    )
    note = _annotation(node) if has_rumour else None
    return ProtocolMessage(MsgKind.PULL_REPLY, node.node, msg.src, has_rumour, note)


def on_pull_reply(node: NodeRuntime, msg: ProtocolMessage, now: float, ctx: ProtocolContext) -> bool:
    if msg.kind is not MsgKind.PULL_REPLY:
        raise ValueError("expected a pull reply")
    if not msg.carries_rumour:
        return False
    return _inform(node, now, msg, ctx)
