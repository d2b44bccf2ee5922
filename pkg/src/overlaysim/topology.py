"""Directed overlay topologies: generation, validation, CSV serialization.

Graphs are directed but the generator and the built-in fixture always emit
symmetric arc pairs (u,v) / (v,u) with equal weight, matching the model of a
bidirectional connection carried as two arcs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .rng import TOPOLOGY, substream

Arc = tuple[int, int, float]

MAX_CONNECT_RETRIES = 100


class GraphConnectivityError(Exception):
    """No weakly connected graph was produced within the retry budget."""


@dataclass(frozen=True)
class Graph:
    """Directed graph over nodes 0..n-1; arc weights are milliseconds."""

    n: int
    arcs: tuple[Arc, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        seen: set[tuple[int, int]] = set()
        for u, v, w in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u},{v}) references a node outside 0..{self.n - 1}")
            if u == v:
                raise ValueError(f"self-arc at node {u}")
            if (u, v) in seen:
                raise ValueError(f"duplicate arc ({u},{v})")
            if w < 0:
                raise ValueError(f"negative weight {w} on arc ({u},{v})")
            seen.add((u, v))

    def adjacency(self) -> list[list[int]]:
        """Out-neighbor lists, indexed by node."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v, _ in self.arcs:
            adj[u].append(v)
        return adj


@dataclass(frozen=True)
class DegreeSummary:
    min_out: int
    max_out: int
    mean_out: float
    per_node: tuple[int, ...]


def generate_random_graph(
    n: int, degree: int, seed: int, max_retries: int = MAX_CONNECT_RETRIES
) -> Graph:
    """Random symmetric digraph where every node has out-degree >= degree.

    Each node samples `degree` distinct partners uniformly at random; the
    sampled links are deduplicated and emitted as arc pairs, so a node can end
    up with more links than it asked for but never fewer. Disconnected
    outcomes are regenerated from a perturbed substream of the same seed, up
    to `max_retries` extra attempts.

    Arcs carry weight 0; attach real latencies with
    :func:`overlaysim.latency.attach_weights`.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 1 <= degree <= n - 1:
        raise ValueError(f"degree must be in 1..{n - 1}, got {degree}")

    for attempt in range(max_retries + 1):
        rng = substream(seed, TOPOLOGY, attempt)
        edges: set[tuple[int, int]] = set()
        for u in range(n):
            partners = rng.choice(n - 1, size=degree, replace=False)
            for p in partners:
                v = int(p) + (1 if int(p) >= u else 0)  # index skips u itself
                edges.add((u, v) if u < v else (v, u))
        arcs = []
        for a, b in edges:
            arcs.append((a, b, 0.0))
            arcs.append((b, a, 0.0))
        g = Graph(n, tuple(sorted(arcs)))
        if is_weakly_connected(g):
            return g
    raise GraphConnectivityError(
        f"no weakly connected graph for n={n}, degree={degree} "
        f"after {max_retries + 1} attempts"
    )


# The canonical 10-node demo network: 6 bidirectional links with their
# latencies in ms, kept verbatim even though the resulting graph is not
# connected (components {0,6}, {1,5,8}, {2,3,4}, {7,9}).
_TEN_NODE_LINKS: tuple[tuple[int, int, float], ...] = (
    (0, 6, 1431.0),
    (1, 5, 1252.0),
    (2, 4, 1258.0),
    (3, 4, 948.0),
    (5, 8, 1471.0),
    (7, 9, 1445.0),
)


def ten_node_fixture() -> Graph:
    """The 10-node, 12-arc example network with fixed latencies."""
    arcs = []
    for u, v, w in _TEN_NODE_LINKS:
        arcs.append((u, v, w))
        arcs.append((v, u, w))
    return Graph(10, tuple(sorted(arcs)))


def is_weakly_connected(g: Graph) -> bool:
    """True iff every node is reachable from node 0 ignoring arc direction."""
    undirected: list[list[int]] = [[] for _ in range(g.n)]
    for u, v, _ in g.arcs:
        undirected[u].append(v)
        undirected[v].append(u)
    seen = {0}
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for v in undirected[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == g.n


def degree_stats(g: Graph) -> DegreeSummary:
    """Exact out-degree summary; mean_out * n equals the arc count."""
    per_node = [0] * g.n
    for u, _, _ in g.arcs:
        per_node[u] += 1
    return DegreeSummary(
        min_out=min(per_node),
        max_out=max(per_node),
        mean_out=len(g.arcs) / g.n,
        per_node=tuple(per_node),
    )


def save_graph_csv(g: Graph, path: Path | str) -> None:
    """Write arcs as `from,to,weight_ms` rows, UTF-8, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["from", "to", "weight_ms"])
        for u, v, w in g.arcs:
            writer.writerow([u, v, repr(w)])


def load_graph_csv(path: Path | str) -> Graph:
    """Read a graph CSV; node count is inferred as max id + 1."""
    arcs: list[Arc] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["from", "to", "weight_ms"]:
            raise ValueError(f"{path}: expected header from,to,weight_ms, got {header}")
        for row in reader:
            if not row:
                continue
            u, v, w = int(row[0]), int(row[1]), float(row[2])
            arcs.append((u, v, w))
    if not arcs:
        raise ValueError(f"{path}: no arcs")
    n = max(max(u, v) for u, v, _ in arcs) + 1
    return Graph(n, tuple(arcs))
