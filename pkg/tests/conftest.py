from __future__ import annotations

import random

import pytest

from gossipbench.graphio import GraphKind, build_graph, generate_pa


@pytest.fixture
def triangle():
    return build_graph(GraphKind.UNDIRECTED, [(1, 2), (2, 3), (3, 1)])


@pytest.fixture
def path3():
    return build_graph(GraphKind.UNDIRECTED, [(1, 2), (2, 3)])


@pytest.fixture
def two_nodes():
    return build_graph(GraphKind.UNDIRECTED, [(0, 1)])


@pytest.fixture(scope="session")
def pa_small():
    return generate_pa(200, 2, random.Random(7))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(key, []):
            lines.extend(value for name, value in getattr(report, "user_properties", []) if name == "acceptance")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].lstrip("C").split(".")[0])):
            terminalreporter.write_line(line)
