"""Star-topology network model: every node hangs off an infinite-capacity
core through its own access link."""

from __future__ import annotations

import random
from dataclasses import dataclass

HEADER_BYTES = 20
RUMOUR_BYTES = 8


@dataclass(frozen=True)
class MessageSize:
    header_bytes: int = HEADER_BYTES
    payload_bytes: int = 0

    @property
    def total_bits(self) -> int:
        return 8 * (self.header_bytes + self.payload_bytes)


EMPTY = MessageSize(HEADER_BYTES, 0)
WITH_RUMOUR = MessageSize(HEADER_BYTES, RUMOUR_BYTES)


@dataclass(frozen=True)
class LinkConfig:
    lat_min_ms: float = 10.0
    lat_max_ms: float = 100.0
    bw_min_mbps: float = 3.0
    bw_max_mbps: float = 50.0

    def __post_init__(self) -> None:
        if not 0 <= self.lat_min_ms <= self.lat_max_ms:
            raise ValueError("need 0 <= lat_min_ms <= lat_max_ms")
        if not 0 < self.bw_min_mbps <= self.bw_max_mbps:
            raise ValueError("need 0 < bw_min_mbps <= bw_max_mbps")


@dataclass(frozen=True)
class LinkTable:
    latency: tuple[float, ...]  # seconds
    bandwidth: tuple[float, ...]  # bits per second

    def __len__(self) -> int:
        return len(self.latency)


def assign_links(n: int, rng: random.Random, config: LinkConfig = LinkConfig()) -> LinkTable:
    if n < 1:
        raise ValueError("need at least one node")
    lat_lo, lat_hi = config.lat_min_ms / 1e3, config.lat_max_ms / 1e3
    bw_lo, bw_hi = config.bw_min_mbps * 1e6, config.bw_max_mbps * 1e6
    latency = tuple(rng.uniform(lat_lo, lat_hi) for _ in range(n))
    bandwidth = tuple(rng.uniform(bw_lo, bw_hi) for _ in range(n))
    return LinkTable(latency=latency, bandwidth=bandwidth)


def message_delay(links: LinkTable, src: int, dst: int, size: MessageSize) -> float:
    """Both access-link latencies plus one serialization on the slower link.

    No queuing: any number of messages may be in flight on a link at once.
    """
    bw = min(links.bandwidth[src], links.bandwidth[dst])
    return links.latency[src] + links.latency[dst] + size.total_bits / bw
