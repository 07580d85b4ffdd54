"""Discrete-event simulator for asynchronous push & pull rumour spreading."""

from .engine import ClockConfig, RunMode, RunOutcome, SimConfig, Termination, run_simulation
from .graphio import (
    Graph,
    GraphKind,
    Group,
    SignPolicy,
    classify_groups,
    generate_pa,
    graph_stats,
    largest_connected_component,
    parse_edge_list,
    read_edge_list,
)
from .metrics import FractionNotReached, RunMetrics, improvement_pct, network_load, time_to_fraction
from .netmodel import LinkTable, assign_links, message_delay
from .policies import Policy
from .protocol import FanoutConfig, FanoutMode
from .stopping import Criterion, StoppingConfig, tick_budget

__version__ = "0.1.0"

__all__ = [
    "ClockConfig", "Criterion", "FanoutConfig", "FanoutMode", "FractionNotReached", "Graph",
    "GraphKind", "Group", "LinkTable", "Policy", "RunMetrics", "RunMode", "RunOutcome",
    "SignPolicy", "SimConfig", "StoppingConfig", "Termination", "assign_links", "classify_groups",
    "generate_pa", "graph_stats", "improvement_pct", "largest_connected_component",
    "message_delay", "network_load", "parse_edge_list", "read_edge_list", "run_simulation",
    "tick_budget", "time_to_fraction",
]
