"""Ground-truth pairwise latency: normal draws stored symmetrically.

One value is drawn per unordered node pair, so both directions of a
connection always carry the same latency. Latencies are milliseconds stored
as floats; the probe protocol works in integer microseconds and converts at
its own boundary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import Seed
from .topology import Graph

MAX_REDRAWS = 1000


@dataclass(frozen=True)
class LatencyParams:
    """Mean and standard deviation of connection latency, in ms."""

    mu: float = 2000.0
    sigma: float = 500.0

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def normal_pdf(x: float, params: LatencyParams) -> float:
    """Gaussian density at x, in 1/ms."""
    z = (x - params.mu) / params.sigma
    return math.exp(-0.5 * z * z) / (params.sigma * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True, eq=False)
class LatencyMatrix:
    """Symmetric n x n latency table in ms; the diagonal is unused."""

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (self.n, self.n):
            raise ValueError(f"values must be {self.n}x{self.n}, got {v.shape}")
        if not np.array_equal(v, v.T):
            raise ValueError("latency matrix must be symmetric")
        if self.n >= 2:
            off_diag = v[~np.eye(self.n, dtype=bool)]
            if not (off_diag > 0).all():
                raise ValueError("all pairwise latencies must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def pairs(self):
        """Yield (u, v, latency_ms) for every unordered pair, u < v."""
        for u in range(self.n):
            for v in range(u + 1, self.n):
                yield u, v, float(self.values[u, v])


def sample_latency_matrix(n: int, params: LatencyParams, seed: Seed) -> LatencyMatrix:
    """Draw one Normal(mu, sigma) latency per unordered pair.

    Draws map to pairs in lexicographic order (0,1), (0,2), ..., (n-2,n-1).
    Non-positive draws are rejected and replaced with fresh draws taken after
    the main pass, in pair order, capped at MAX_REDRAWS per pair.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    rng = np.random.default_rng(seed)
    m = n * (n - 1) // 2
    draws = rng.normal(params.mu, params.sigma, size=m)
    for i in np.flatnonzero(draws <= 0.0):
        for _ in range(MAX_REDRAWS):
            value = rng.normal(params.mu, params.sigma)
            if value > 0.0:
                draws[i] = value
                break
        else:
            raise RuntimeError(
                f"no positive draw after {MAX_REDRAWS} attempts "
                f"(mu={params.mu}, sigma={params.sigma})"
            )
    values = np.zeros((n, n))
    iu, iv = np.triu_indices(n, k=1)
    values[iu, iv] = draws
    values[iv, iu] = draws
    return LatencyMatrix(n, values)


def latency(m: LatencyMatrix, u: int, v: int) -> float:
    """Stored latency between two distinct nodes, in ms."""
    if u == v:
        raise ValueError(f"latency from node {u} to itself is undefined")
    if not (0 <= u < m.n and 0 <= v < m.n):
        raise ValueError(f"node pair ({u},{v}) outside 0..{m.n - 1}")
    return float(m.values[u, v])


def attach_weights(g: Graph, m: LatencyMatrix) -> Graph:
    """Reweight every arc from the matrix; topology is unchanged."""
    if g.n != m.n:
        raise ValueError(f"graph has {g.n} nodes but matrix has {m.n}")
    arcs = tuple((u, v, latency(m, u, v)) for u, v, _ in g.arcs)
    return Graph(g.n, arcs)


def save_matrix_csv(m: LatencyMatrix, path: Path | str) -> None:
    """Write `u,v,latency_ms` rows, one per unordered pair (u < v)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v", "latency_ms"])
        for u, v, w in m.pairs():
            writer.writerow([u, v, repr(w)])


def load_matrix_csv(path: Path | str) -> LatencyMatrix:
    rows: list[tuple[int, int, float]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["u", "v", "latency_ms"]:
            raise ValueError(f"{path}: expected header u,v,latency_ms, got {header}")
        for row in reader:
            if row:
                rows.append((int(row[0]), int(row[1]), float(row[2])))
    if not rows:
        raise ValueError(f"{path}: no pairs")
    n = max(max(u, v) for u, v, _ in rows) + 1
    values = np.zeros((n, n))
    for u, v, w in rows:
        values[u, v] = w
        values[v, u] = w
    return LatencyMatrix(n, values)
