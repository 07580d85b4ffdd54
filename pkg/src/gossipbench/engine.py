"""Deterministic discrete-event core.

Events are ordered by (time, insertion sequence); a run is fully determined
by the graph, the link table, the configuration and the RNG seed.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import TextIO

from .graphio import Graph, GroupAssignment
from .metrics import RunMetrics
from .netmodel import EMPTY, WITH_RUMOUR, LinkTable, message_delay
from .policies import Policy
from .protocol import (
    FanoutConfig,
    MsgKind,
    NodeState,
    ProtocolContext,
    ProtocolMessage,
    on_pull_reply,
    on_pull_request,
    on_push,
    on_timer,
)
from .stopping import Criterion, StoppingConfig, StoppingState

TIMER = 0
ARRIVAL = 1


class Termination(str, Enum):
    ALL_INFORMED = "all_informed"
    QUIESCENT = "quiescent"
    TIME_LIMIT = "time_limit"


class RunMode(str, Enum):
    UNTIL_ALL_INFORMED = "until_all_informed"
    UNTIL_QUIESCENT = "until_quiescent"


class QueueExhausted(Exception):
    """Popped from an empty event queue; the normal end of a quiescent run."""


class ScheduleInPast(ValueError):
    pass


@dataclass(frozen=True)
class ClockConfig:
    mean_interval: float = 1.0

    def __post_init__(self) -> None:
        if not self.mean_interval > 0:
            raise ValueError("mean_interval must be positive")


def exp_sample(rng: random.Random, cfg: ClockConfig = ClockConfig()) -> float:
    while True:
        x = rng.expovariate(1.0 / cfg.mean_interval)
        if x > 0:
            return x


@dataclass(order=True, slots=True)
class SimEvent:
    time: float
    seq: int
    kind: int = field(compare=False)
    node: int = field(compare=False)
    message: ProtocolMessage | None = field(default=None, compare=False)


class EventQueue:
    def __init__(self) -> None:
        self._heap: list[tuple[float, int, int, int, ProtocolMessage | None]] = []
        self._seq = 0
        self.now = 0.0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time: float, kind: int, node: int, message: ProtocolMessage | None = None) -> int:
        if time < self.now:
            raise ScheduleInPast(f"event at t={time} scheduled while now={self.now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (time, seq, kind, node, message))
        return seq

    def schedule_event(self, ev: SimEvent) -> None:
        if ev.time < self.now:
            raise ScheduleInPast(f"event at t={ev.time} scheduled while now={self.now}")
        self._seq = max(self._seq, ev.seq + 1)
        heapq.heappush(self._heap, (ev.time, ev.seq, ev.kind, ev.node, ev.message))

    def next_event(self) -> SimEvent:
        if not self._heap:
            raise QueueExhausted
        time, seq, kind, node, message = heapq.heappop(self._heap)
        self.now = time
        return SimEvent(time, seq, kind, node, message)

    def peek_time(self) -> float | None:
        return self._heap[0][0] if self._heap else None


@dataclass(frozen=True)
class SimConfig:
    """Protocol-level settings of a single run."""

    originator: int = 0
    policy: Policy = Policy.RANDOM
    memory: int = 0
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    fanout: FanoutConfig = field(default_factory=FanoutConfig)
    clock: ClockConfig = field(default_factory=ClockConfig)
    run_mode: RunMode | None = None
    max_sim_time: float = 1e5
    removed_replies: str = "empty"

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.run_mode is None:
            mode = RunMode.UNTIL_ALL_INFORMED if self.stopping.criterion is Criterion.NONE else RunMode.UNTIL_QUIESCENT
            object.__setattr__(self, "run_mode", mode)
        object.__setattr__(self, "run_mode", RunMode(self.run_mode))
        if self.removed_replies not in ("empty", "rumour"):
            raise ValueError("removed_replies must be 'empty' or 'rumour'")
        if self.max_sim_time <= 0:
            raise ValueError("max_sim_time must be positive")


@dataclass
class RunOutcome:
    metrics: RunMetrics
    termination: Termination
    nodes: list = field(repr=False, default_factory=list)


_TRACE_NAMES = {MsgKind.PUSH: "push", MsgKind.PULL_REQUEST: "pull", MsgKind.PULL_REPLY: "reply"}


def run_simulation(
    g: Graph,
    links: LinkTable,
    cfg: SimConfig,
    rng: random.Random,
    groups: GroupAssignment | None = None,
    trace: TextIO | None = None,
) -> RunOutcome:
    """Simulate one rumour dissemination from ``cfg.originator``.

    Trace lines (when ``trace`` is given) are
    ``time<TAB>kind<TAB>src<TAB>dst<TAB>msgtype``; timer lines carry the
    action taken (push, pull, stop, idle) in the msgtype column.
    """
    n = g.node_count
    if not 0 <= cfg.originator < n:
        raise ValueError(f"originator {cfg.originator} outside [0, {n})")
    if len(links) != n:
        raise ValueError("link table size does not match the graph")

    ctx = ProtocolContext(
        graph=g,
        rng=rng,
        fanout=cfg.fanout,
        stopping=cfg.stopping,
        groups=groups,
        removed_replies_rumour=cfg.removed_replies == "rumour",
    )
    nodes = [ctx.make_node(v, cfg.policy, cfg.memory) for v in range(n)]
    metrics = RunMetrics(n=n, first_informed_at=[None] * n)

    origin = nodes[cfg.originator]
    origin.state = NodeState.INFORMED
    origin.first_informed_at = 0.0
    if ctx.median:
        origin.stopping_state = StoppingState()
    metrics.first_informed_at[cfg.originator] = 0.0
    metrics.informed_times.append(0.0)

    until_all = cfg.run_mode is RunMode.UNTIL_ALL_INFORMED
    if until_all and n == 1:
        return RunOutcome(metrics, Termination.ALL_INFORMED, nodes)

    queue = EventQueue()
    clock = cfg.clock
    for v in range(n):
        queue.schedule(exp_sample(rng, clock), TIMER, v)

    send_times = metrics.send_times
    sent = metrics.messages_sent
    heap = queue._heap
    max_time = cfg.max_sim_time

    def send(msg: ProtocolMessage, now: float) -> None:
        size = WITH_RUMOUR if msg.carries_rumour else EMPTY
        send_times.append(now)
        sent[_TRACE_NAMES[msg.kind]] += 1
        queue.schedule(now + message_delay(links, msg.src, msg.dst, size), ARRIVAL, msg.dst, msg)

    termination = Termination.QUIESCENT
    now = 0.0
    while heap:
        if heap[0][0] > max_time:
            termination = Termination.TIME_LIMIT
            now = max_time
            break
        ev = queue.next_event()
        now = ev.time
        node = nodes[ev.node]
        if ev.kind == TIMER:
            messages, again = on_timer(node, ctx)
            for msg in messages:
                send(msg, now)
            if again:
                queue.schedule(now + exp_sample(rng, clock), TIMER, ev.node)
            if trace is not None:
                if messages:
                    action = _TRACE_NAMES[messages[0].kind]
                else:
                    action = "idle" if again else "stop"
                trace.write(f"{now!r}\ttimer\t{ev.node}\t-\t{action}\n")
            continue

        msg = ev.message
        if trace is not None:
            trace.write(f"{now!r}\tarrival\t{msg.src}\t{msg.dst}\t{_TRACE_NAMES[msg.kind]}\n")
        if msg.kind is MsgKind.PUSH:
            newly = on_push(node, msg, now, ctx)
        elif msg.kind is MsgKind.PULL_REQUEST:
            send(on_pull_request(node, msg, ctx), now)
            newly = False
        else:
            newly = on_pull_reply(node, msg, now, ctx)
        if newly:
            metrics.first_informed_at[ev.node] = now
            metrics.informed_times.append(now)
            if until_all and len(metrics.informed_times) == n:
                termination = Termination.ALL_INFORMED
                break

    metrics.end_time = now
    return RunOutcome(metrics, termination, nodes)
