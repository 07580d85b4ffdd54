"""Neighbor selection: uniform random (optionally with a FIFO neighbor
memory) and the quasirandom list-cycling family."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence


class Policy(str, Enum):
    RANDOM = "random"
    Q = "q"
    QP = "qp"
    QU = "qu"
    QPU = "qpu"
    QUP = "qup"

    @property
    def quasirandom(self) -> bool:
        return self is not Policy.RANDOM


class PolicyConfigError(ValueError):
    pass


@dataclass
class PolicyState:
    policy: Policy
    neighbors: Sequence[int]
    memory_size: int = 0
    memory: deque = field(default_factory=deque)
    ordered_list: list[int] | None = None
    cursor: int = 0


def _interleave(ordered: list[int]) -> list[int]:
    """front, back, front+1, back-1, ..."""
    out = []
    lo, hi = 0, len(ordered) - 1
    while lo <= hi:
        out.append(ordered[lo])
        if lo != hi:
            out.append(ordered[hi])
        lo += 1
        hi -= 1
    return out


def order_neighbors(neighbors: Sequence[int], policy: Policy | str, out_degrees: Sequence[int]) -> list[int]:
    policy = Policy(policy)
    if not neighbors:
        raise ValueError("empty neighbor list")
    if policy in (Policy.Q, Policy.RANDOM):
        return list(neighbors)
    popular_first = sorted(neighbors, key=lambda v: (-out_degrees[v], v))
    unpopular_first = sorted(neighbors, key=lambda v: (out_degrees[v], v))
    if policy is Policy.QP:
        return popular_first
    if policy is Policy.QU:
        return unpopular_first
    if policy is Policy.QPU:
        return _interleave(popular_first)
    return _interleave(unpopular_first)


def init_policy_state(
    neighbors: Sequence[int],
    policy: Policy | str,
    memory_size: int,
    rng: random.Random,
    out_degrees: Sequence[int],
) -> PolicyState:
    policy = Policy(policy)
    if memory_size < 0:
        raise PolicyConfigError("memory size must be >= 0")
    if policy.quasirandom and memory_size > 0:
        raise PolicyConfigError(
            f"neighbor memory applies to the random policy only, got {policy.value} with m={memory_size}"
        )
    if not policy.quasirandom:
        return PolicyState(policy, neighbors, memory_size, deque(maxlen=memory_size or None))
    if not neighbors:
        return PolicyState(policy, neighbors, ordered_list=[])
    ordered = order_neighbors(neighbors, policy, out_degrees)
    return PolicyState(policy, neighbors, ordered_list=ordered, cursor=rng.randrange(len(ordered)))


def select_targets(ps: PolicyState, f: int, rng: random.Random) -> list[int]:
    """Return ``f`` distinct out-neighbors and advance the policy state."""
    degree = len(ps.neighbors)
    if not 1 <= f <= degree:
        raise ValueError(f"fan-out {f} outside [1, {degree}]")
    if ps.ordered_list is not None:
        ordered = ps.ordered_list
        start = ps.cursor
        targets = [ordered[(start + i) % degree] for i in range(f)]
        ps.cursor = (start + f) % degree
        return targets

    excluded = min(ps.memory_size, degree - f, len(ps.memory))
    if excluded == 0:
        if f == 1:
            targets = [ps.neighbors[rng.randrange(degree)]]
        else:
            targets = rng.sample(ps.neighbors, f)
    else:
        recent = set(list(ps.memory)[-excluded:])
        candidates = [v for v in ps.neighbors if v not in recent]
        targets = rng.sample(candidates, f)
    if ps.memory_size:
        ps.memory.extend(targets)
    return targets
