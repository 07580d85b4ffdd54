"""Edge-list ingestion, connected components, structural statistics and
synthetic preferential-attachment graphs."""

from __future__ import annotations

import io
import random
from bisect import bisect_left
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class GraphKind(str, Enum):
    UNDIRECTED = "undirected"
    DIRECTED = "directed"
    SIGNED = "signed"


class SignPolicy(str, Enum):
    KEEP_POSITIVE_ONLY = "keep_positive_only"
    KEEP_ALL_AS_UNSIGNED = "keep_all_as_unsigned"


class Group(str, Enum):
    G1_SINGLETON = "G1"
    G2_MIDDLE = "G2"
    G3_GIANT = "G3"


class EdgeListError(ValueError):
    """Raised for malformed edge-list input."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class Graph:
    """Immutable adjacency structure with dense node ids ``0..n-1``.

    Dense ids follow ascending order of the original dataset ids, and every
    out-neighbor list is sorted ascending, so two graphs with the same edge
    set compare equal regardless of input line order.
    """

    kind: GraphKind
    out_neighbors: tuple[tuple[int, ...], ...]
    node_labels: tuple[int, ...]
    edge_count: int = field(init=False)

    def __post_init__(self) -> None:
        arcs = sum(len(nbrs) for nbrs in self.out_neighbors)
        if self.kind is GraphKind.UNDIRECTED:
            arcs //= 2
        object.__setattr__(self, "edge_count", arcs)

    @property
    def node_count(self) -> int:
        return len(self.out_neighbors)

    @cached_property
    def out_degree(self) -> tuple[int, ...]:
        return tuple(len(nbrs) for nbrs in self.out_neighbors)

    @property
    def directed(self) -> bool:
        return self.kind is not GraphKind.UNDIRECTED

    def max_degree_node(self) -> int:
        """Node with the largest out-degree; lowest id on ties."""
        degrees = self.out_degree
        return max(range(self.node_count), key=lambda v: (degrees[v], -v))

    def arcs(self) -> Iterable[tuple[int, int]]:
        for u, nbrs in enumerate(self.out_neighbors):
            for v in nbrs:
                yield u, v


@dataclass(frozen=True)
class GroupAssignment:
    group: tuple[Group, ...]
    threshold_degree: int

    def members(self, group: Group) -> list[int]:
        return [v for v, g in enumerate(self.group) if g is group]

    def sizes(self) -> dict[Group, int]:
        counts = Counter(self.group)
        return {g: counts.get(g, 0) for g in Group}


@dataclass(frozen=True)
class GraphStats:
    n: int
    e: int
    min_degree: int
    max_degree: int
    mean_degree: float
    degree_histogram: dict[int, int]
    avg_local_clustering: float


def build_graph(
    kind: GraphKind | str,
    arcs: Iterable[tuple[int, int]],
    labels: Sequence[int] | None = None,
) -> Graph:
    """Build a Graph from (src, dst) pairs given in original-id space.

    Self-loops and duplicates are dropped; undirected input is symmetrized.
    ``labels`` adds nodes that may have no incident arcs.
    """
    kind = GraphKind(kind)
    adjacency: dict[int, set[int]] = {}
    if labels is not None:
        for label in labels:
            adjacency.setdefault(label, set())
    for u, v in arcs:
        adjacency.setdefault(u, set())
        adjacency.setdefault(v, set())
        if u == v:
            continue
        adjacency[u].add(v)
        if kind is GraphKind.UNDIRECTED:
            adjacency[v].add(u)
    node_labels = tuple(sorted(adjacency))
    index = {label: i for i, label in enumerate(node_labels)}
    out = tuple(
        tuple(sorted(index[w] for w in adjacency[label])) for label in node_labels
    )
    return Graph(kind=kind, out_neighbors=out, node_labels=node_labels)


def _parse_int(token: str, line_number: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise EdgeListError(f"non-integer token {token!r}", line_number) from None


def parse_edge_list(
    text: str | bytes | io.IOBase,
    kind: GraphKind | str = GraphKind.UNDIRECTED,
    sign_policy: SignPolicy | str = SignPolicy.KEEP_POSITIVE_ONLY,
) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` or ``%`` are comments. Signed inputs need a
    third sign token; tokens beyond the ones a kind needs are ignored
    (weight/timestamp columns in common dataset dumps).
    """
    kind = GraphKind(kind)
    sign_policy = SignPolicy(sign_policy)
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines() if isinstance(text, str) else text

    arcs: list[tuple[int, int]] = []
    for line_number, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise EdgeListError("expected at least two node ids", line_number)
        u = _parse_int(tokens[0], line_number)
        v = _parse_int(tokens[1], line_number)
        if kind is GraphKind.SIGNED:
            if len(tokens) < 3:
                raise EdgeListError("signed edge without a sign token", line_number)
            try:
                sign = float(tokens[2])
            except ValueError:
                raise EdgeListError(f"bad sign token {tokens[2]!r}", line_number) from None
            if sign_policy is SignPolicy.KEEP_POSITIVE_ONLY and sign <= 0:
                continue
        arcs.append((u, v))
    graph = build_graph(kind, arcs)
    if graph.node_count == 0:
        raise EdgeListError("edge list contains no edges")
    return graph


def read_edge_list(path, kind=GraphKind.UNDIRECTED, sign_policy=SignPolicy.KEEP_POSITIVE_ONLY) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh, kind, sign_policy)


def format_edge_list(g: Graph) -> str:
    """Serialize back to edge-list text using the original node labels."""
    out = io.StringIO()
    out.write(f"% {g.kind.value}\n")
    labels = g.node_labels
    for u, v in g.arcs():
        if g.kind is GraphKind.UNDIRECTED and v < u:
            continue
        if g.kind is GraphKind.SIGNED:
            out.write(f"{labels[u]} {labels[v]} 1\n")
        else:
            out.write(f"{labels[u]} {labels[v]}\n")
    return out.getvalue()


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    keep = sorted(set(nodes))
    remap = {v: i for i, v in enumerate(keep)}
    out = tuple(
        tuple(remap[w] for w in g.out_neighbors[v] if w in remap) for v in keep
    )
    labels = tuple(g.node_labels[v] for v in keep)
    return Graph(kind=g.kind, out_neighbors=out, node_labels=labels)


def _weak_components(g: Graph) -> list[list[int]]:
    n = g.node_count
    undirected: list[list[int]] | tuple[tuple[int, ...], ...]
    if g.directed:
        undirected = [list(nbrs) for nbrs in g.out_neighbors]
        for u, v in g.arcs():
            undirected[v].append(u)
    else:
        undirected = g.out_neighbors
    seen = [False] * n
    components = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in undirected[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        components.append(comp)
    return components


def _strong_components(g: Graph) -> list[list[int]]:
    n = g.node_count
    rows = [u for u, _ in g.arcs()]
    cols = [v for _, v in g.arcs()]
    mat = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(mat, directed=True, connection="strong")
    buckets: dict[int, list[int]] = {}
    for v, c in enumerate(labels):
        buckets.setdefault(int(c), []).append(v)
    return list(buckets.values())


def largest_connected_component(g: Graph, connection: str = "weak") -> Graph:
    """Induced subgraph on the largest component, reindexed densely.

    Components are weak by default (direction ignored). Ties go to the
    component holding the smallest original node id.
    """
    if g.node_count == 0:
        raise ValueError("empty graph")
    if connection == "weak" or not g.directed:
        components = _weak_components(g)
    elif connection == "strong":
        components = _strong_components(g)
    else:
        raise ValueError(f"unknown connection type {connection!r}")
    labels = g.node_labels
    best = max(components, key=lambda c: (len(c), -min(labels[v] for v in c)))
    if len(best) == g.node_count:
        return g
    return induced_subgraph(g, best)


def classify_groups(g: Graph, percentile: float = 0.90) -> GroupAssignment:
    """Split nodes into singletons, middle region and giant component.

    The G3 threshold is the smallest degree ``t`` for which at most
    ``1 - percentile`` of the nodes have out-degree >= t.
    """
    if not 0 < percentile < 1:
        raise ValueError("percentile must lie in (0, 1)")
    degrees = g.out_degree
    n = len(degrees)
    ordered = sorted(degrees)
    allowed = (1.0 - percentile) * n + 1e-9
    t = ordered[-1] + 1
    for candidate in sorted(set(ordered)):
        if n - bisect_left(ordered, candidate) <= allowed:
            t = candidate
            break
    groups = []
    for d in degrees:
        if d == 1:
            groups.append(Group.G1_SINGLETON)
        elif d >= t:
            groups.append(Group.G3_GIANT)
        else:
            groups.append(Group.G2_MIDDLE)
    return GroupAssignment(group=tuple(groups), threshold_degree=t)


def graph_stats(g: Graph) -> GraphStats:
    degrees = g.out_degree
    n = g.node_count
    if g.directed:
        neighbor_sets = [set(nbrs) for nbrs in g.out_neighbors]
        for u, v in g.arcs():
            neighbor_sets[v].add(u)
    else:
        neighbor_sets = [set(nbrs) for nbrs in g.out_neighbors]

    total = 0.0
    for u in range(n):
        nbrs = neighbor_sets[u]
        k = len(nbrs)
        if k < 2:
            continue
        links = 0
        for w in nbrs:
            links += len(nbrs & neighbor_sets[w])
        # each link among neighbours was seen from both ends
        total += links / (k * (k - 1))
    return GraphStats(
        n=n,
        e=g.edge_count,
        min_degree=min(degrees) if n else 0,
        max_degree=max(degrees) if n else 0,
        mean_degree=sum(degrees) / n if n else 0.0,
        degree_histogram=dict(sorted(Counter(degrees).items())),
        avg_local_clustering=total / n if n else 0.0,
    )


def generate_pa(n: int, attach: int, rng: random.Random) -> Graph:
    """Undirected preferential-attachment graph seeded with a clique."""
    if attach < 1 or n <= attach:
        raise ValueError(f"need n > attach >= 1, got n={n}, attach={attach}")
    edges = [(u, v) for u in range(attach + 1) for v in range(u + 1, attach + 1)]
    # every node appears once per incident edge end
    endpoints = [x for edge in edges for x in edge]
    for new in range(attach + 1, n):
        chosen: set[int] = set()
        picks: list[int] = []
        while len(picks) < attach:
            target = endpoints[rng.randrange(len(endpoints))]
            if target not in chosen:
                chosen.add(target)
                picks.append(target)
        for target in picks:
            edges.append((new, target))
            endpoints.append(new)
            endpoints.append(target)
    return build_graph(GraphKind.UNDIRECTED, edges, labels=range(n))
