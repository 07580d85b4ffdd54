"""Stopping criteria: analytic tick budgets and an asynchronous median
counter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class Criterion(str, Enum):
    NONE = "none"
    LOG3_LNLN = "log3lnln"
    LOGN = "logn"
    LOGSQN = "log2n"
    NLOGN = "nlogn"
    MEDIAN = "median"

    @property
    def is_budget(self) -> bool:
        return self not in (Criterion.NONE, Criterion.MEDIAN)


class Phase(str, Enum):
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class StoppingConfig:
    criterion: Criterion = Criterion.NONE
    log_base: float = 10.0
    c_lnln: float = 4.0
    c_log: float = 1.0
    c_logsq: float = 1.0
    c_nlogn: float = 1.0
    # None derives the constant from n
    mc_ctr_max: int | None = None
    mc_c_phase: int | None = None
    mc_safety: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if self.log_base <= 1:
            raise ValueError("log_base must exceed 1")
        if self.mc_safety < 1:
            raise ValueError("mc_safety must be >= 1")


def tick_budget(cfg: StoppingConfig, n: int) -> int:
    """Number of ticks a node may spend before it stops."""
    if not cfg.criterion.is_budget:
        raise ValueError(f"{cfg.criterion.value} is not a budget criterion")
    if n < 2:
        raise ValueError("tick budgets need n >= 2")
    log_n = math.log10(n) if cfg.log_base == 10 else math.log(n, cfg.log_base)
    if cfg.criterion is Criterion.LOG3_LNLN:
        value = math.log(n, 3) + cfg.c_lnln * math.log(math.log(n))
    elif cfg.criterion is Criterion.LOGN:
        value = cfg.c_log * log_n
    elif cfg.criterion is Criterion.LOGSQN:
        value = cfg.c_logsq * log_n**2
    else:
        value = cfg.c_nlogn * n * log_n
    return max(1, math.ceil(value))


def _loglog2(n: int) -> float:
    return math.log2(math.log2(n)) if n > 2 else 0.0


def mc_constants(cfg: StoppingConfig, n: int) -> tuple[int, int, int]:
    """(counter ceiling, C-phase length, safety tick cap) for an n-node graph."""
    c_phase = cfg.mc_c_phase if cfg.mc_c_phase is not None else max(1, math.ceil(2 * _loglog2(n)))
    ctr_max = cfg.mc_ctr_max if cfg.mc_ctr_max is not None else c_phase + 1
    safety = cfg.mc_safety * max(1, math.ceil(math.log2(max(n, 2))))
    return ctr_max, c_phase, safety


@dataclass
class StoppingState:
    phase: Phase = Phase.B
    counter: int = 1
    countdown: int = 0
    observations: list[tuple[Phase, int]] = field(default_factory=list)


def median_counter_start(annotation: tuple[Phase, int] | None, ctr_max: int, c_phase: int) -> StoppingState:
    """State of a freshly informed node.

    A node that learns the rumour from a C- or D-phase node joins phase C
    directly; otherwise it starts counting in phase B.
    """
    if annotation is not None and annotation[0] is not Phase.B:
        return StoppingState(phase=Phase.C, counter=ctr_max, countdown=c_phase)
    return StoppingState()


def median_counter_observe(ss: StoppingState, annotation: tuple[Phase, int] | None, carries_rumour: bool = True) -> None:
    if not carries_rumour or annotation is None:
        raise ValueError("only rumour-bearing messages carry median-counter annotations")
    if ss.phase is Phase.D:
        return
    ss.observations.append(annotation)


def median_counter_tick(ss: StoppingState, ctr_max: int, c_phase: int) -> bool:
    """Close one local round. Returns True when the node must stop."""
    observations, ss.observations = ss.observations, []
    if ss.phase is Phase.D:
        return True
    if ss.phase is Phase.B:
        ahead = sum(1 for phase, ctr in observations if phase is not Phase.B or ctr >= ss.counter)
        behind = sum(1 for phase, ctr in observations if phase is Phase.B and ctr < ss.counter)
        if ahead > behind:
            ss.counter += 1
        if ss.counter >= ctr_max:
            ss.counter = ctr_max
            ss.phase = Phase.C
            ss.countdown = c_phase
        return False
    ss.countdown -= 1
    if ss.countdown <= 0:
        ss.phase = Phase.D
        return True
    return False
