"""Run metrics: time to inform a fraction of the graph and network load."""

from __future__ import annotations

import math
import statistics
from bisect import bisect_right
from dataclasses import dataclass, field


class FractionNotReached(LookupError):
    """The requested informed fraction was never reached during the run."""


@dataclass
class RunMetrics:
    n: int
    first_informed_at: list[float | None]
    # inform times in event order, hence non-decreasing
    informed_times: list[float] = field(default_factory=list)
    # keyed by message kind name: push / pull / reply
    messages_sent: dict[str, int] = field(
        default_factory=lambda: {"push": 0, "pull": 0, "reply": 0}
    )
    send_times: list[float] = field(default_factory=list)
    end_time: float = 0.0

    @property
    def informed_count(self) -> int:
        return len(self.informed_times)

    @property
    def final_informed_pct(self) -> float:
        return self.informed_count / self.n

    @property
    def total_sent(self) -> int:
        return len(self.send_times)

    def total_messages(self, t: float) -> int:
        """Messages generated at or before time ``t``."""
        return bisect_right(self.send_times, t)


def nodes_for_fraction(n: int, pct: float) -> int:
    if not 0 < pct <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    # tolerate float noise such as 0.9 * 10 = 9.000000000000002
    return max(1, math.ceil(pct * n - 1e-9))


def time_to_fraction(m: RunMetrics, pct: float) -> float:
    k = nodes_for_fraction(m.n, pct)
    if k > m.informed_count:
        raise FractionNotReached(f"{pct:g} of {m.n} nodes never informed")
    return m.informed_times[k - 1]


def network_load(m: RunMetrics, pct: float) -> float:
    """Generated messages per second up to the moment ``pct`` is reached."""
    t = time_to_fraction(m, pct)
    if t <= 0:
        raise ValueError("network load undefined when the target is reached at t=0")
    return m.total_messages(t) / t


def improvement_pct(baseline: float, variant: float, direction: str = "reduction") -> float:
    if baseline <= 0:
        raise ValueError("baseline must be positive")
    if direction == "reduction":
        return (baseline - variant) / baseline * 100.0
    if direction == "increase":
        return (variant - baseline) / baseline * 100.0
    raise ValueError(f"unknown direction {direction!r}")


def mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    if len(values) == 1:
        return values[0], 0.0
    return statistics.fmean(values), statistics.stdev(values)
