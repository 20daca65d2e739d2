"""Graph ingestion, random generators, geodesic cost matrices, per-graph 1D
feature distributions, and assignment-quality evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .core import Dist1D
from .errors import (
    DegenerateVarianceError,
    DisconnectedError,
    InvalidParamsError,
    ParseError,
)
from .transport import TransportPlan

__all__ = [
    "Graph",
    "Matching",
    "read_edgelist",
    "write_edgelist",
    "geodesic_cost",
    "ba_generate",
    "er_generate",
    "graph_feature",
    "extract_matching",
    "order_correlation",
]


@dataclass(frozen=True)
class Graph:
    """Undirected graph; each edge (u, v, w) stored once, no self-loops."""

    node_count: int
    edges: tuple

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.node_count, self.node_count))
        for u, v, w in self.edges:
            A[u, v] = w
            A[v, u] = w
        return A


@dataclass(frozen=True)
class Matching:
    """Row-to-column assignment extracted from a transport plan."""

    assignment: np.ndarray


def make_graph(node_count: int, edges) -> Graph:
    seen = set()
    clean = []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        if u == v:
            raise InvalidParamsError(f"self-loop on node {u}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise InvalidParamsError(f"edge ({u}, {v}) outside [0, {node_count})")
        if w <= 0:
            raise InvalidParamsError(f"non-positive edge weight {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        clean.append((key[0], key[1], w))
    return Graph(node_count, tuple(clean))


def read_edgelist(path) -> Graph:
    """One edge per line: ``u v [w]``, zero-based; '#' lines are comments."""
    edges = []
    max_node = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'u v [w]', got {line!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            edges.append((u, v, w))
            max_node = max(max_node, u, v)
    if max_node < 0:
        raise ParseError(f"no edges in {path}")
    return make_graph(max_node + 1, edges)


def write_edgelist(path, g: Graph) -> None:
    with open(path, "w") as fh:
        for u, v, w in g.edges:
            if w == 1.0:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{u} {v} {w!r}\n")


def _sparse(g: Graph):
    if not g.edges:
        return coo_matrix((g.node_count, g.node_count))
    u, v, w = zip(*g.edges)
    return coo_matrix((w + w, (u + v, v + u)), shape=(g.node_count, g.node_count))


def geodesic_cost(g: Graph) -> np.ndarray:
    """All-pairs shortest-path matrix: BFS per source for unit weights,
    Dijkstra otherwise.  Disconnected graphs are an error because anchor
    distributions need finite atoms."""
    adj = _sparse(g)
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise DisconnectedError(ncomp)
    unweighted = all(w == 1.0 for _, _, w in g.edges)
    D = shortest_path(adj, method="D", directed=False, unweighted=unweighted)
    return D


def ba_generate(n: int, m_attach: int, seed: int) -> Graph:
    """Preferential attachment starting from a star on m_attach + 1 nodes.

    Node index equals arrival order, so lower indices play more central
    roles.  Edge count is m_attach * (n - m_attach - 1) + m_attach.
    """
    if not (n > m_attach >= 1):
        raise InvalidParamsError(f"need n > m_attach >= 1, got n={n}, m_attach={m_attach}")
    rng = np.random.default_rng(seed)
    edges = [(0, i, 1.0) for i in range(1, m_attach + 1)]
    # degree-proportional sampling via the repeated-endpoints list
    endpoints = [0] * m_attach + list(range(1, m_attach + 1))
    for v in range(m_attach + 1, n):
        targets = set()
        while len(targets) < m_attach:
            targets.add(endpoints[rng.integers(len(endpoints))])
        for t in sorted(targets):
            edges.append((t, v, 1.0))
            endpoints.append(t)
            endpoints.append(v)
    return Graph(n, tuple(edges))


def er_generate(n: int, p_edge: float, seed: int) -> Graph:
    """Erdos-Renyi: each unordered pair included independently with
    probability p_edge, deterministic per seed."""
    if n < 1 or not (0.0 <= p_edge <= 1.0):
        raise InvalidParamsError(f"invalid parameters n={n}, p_edge={p_edge}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.shape[0]) < p_edge
    edges = tuple((int(u), int(v), 1.0) for u, v in zip(iu[mask], ju[mask]))
    return Graph(n, edges)


def graph_feature(g: Graph, kind: str = "degree") -> Dist1D:
    """Uniform-weight 1D distribution of per-node degree or local
    clustering coefficient."""
    deg = g.degrees().astype(np.float64)
    if kind == "degree":
        values = deg
    elif kind == "clustering":
        A = (g.adjacency() > 0).astype(np.float64)
        triangles = np.einsum("ij,jk,ki->i", A, A, A) / 2.0
        pairs = deg * (deg - 1) / 2.0
        values = np.where(pairs > 0, triangles / np.maximum(pairs, 1.0), 0.0)
    else:
        raise InvalidParamsError(f"unknown feature kind {kind!r}")
    return Dist1D(values, np.full(g.node_count, 1.0 / g.node_count))


def extract_matching(plan: TransportPlan) -> Matching:
    """Row-wise argmax; ties go to the smaller column index."""
    return Matching(np.argmax(plan.matrix, axis=1))


def order_correlation(match: Matching) -> float:
    """Pearson correlation between node indices and their matched indices."""
    y = np.asarray(match.assignment, dtype=np.float64)
    if y.shape[0] < 2:
        raise InvalidParamsError("need at least two nodes")
    if np.ptp(y) == 0:
        raise DegenerateVarianceError("constant assignment")
    x = np.arange(y.shape[0], dtype=np.float64)
    return float(np.corrcoef(x, y)[0, 1])
