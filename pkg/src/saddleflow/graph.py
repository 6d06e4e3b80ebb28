"""Undirected weighted graphs and their Laplacians."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


class GraphGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes ``0..n-1``.

    ``edges`` maps sorted node pairs ``(i, j)``, ``i < j``, to positive weights.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        canon = {}
        for e in self.edges:
            i, j, w = (e[0], e[1], 1.0) if len(e) == 2 else e
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if not w > 0:
                raise ValueError("edge weights must be positive")
            canon[(min(i, j), max(i, j))] = float(w)
        object.__setattr__(self, "edges", tuple((i, j, w) for (i, j), w in sorted(canon.items())))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def neighbors(self) -> list[list[int]]:
        nbrs = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w] for i, j, w in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        return cls(int(d["n"]), tuple(tuple(e) for e in d["edges"]))


def laplacian(g: Graph) -> np.ndarray:
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


def kron_laplacian(g: Graph, block_dim: int) -> np.ndarray:
    """``laplacian(g) (x) I_d`` for agents holding ``d``-dimensional blocks."""
    if block_dim < 1:
        raise ValueError("block_dim must be >= 1")
    return np.kron(laplacian(g), np.eye(block_dim))


def is_connected(g: Graph) -> bool:
    nbrs = g.neighbors()
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.n


def erdos_renyi(n: int, edge_prob: float, seed, max_tries: int = 100) -> Graph:
    """Connected unit-weight G(n, p) graph, resampled until connected.

    Draws come from numpy's PCG64 generator seeded with ``seed``, so the edge
    set is reproducible across platforms.
    """
    if n < 2:
        raise ValueError("erdos_renyi needs n >= 2")
    if not 0 < edge_prob <= 1:
        raise ValueError("edge_prob must be in (0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_tries):
        keep = rng.random(iu.shape[0]) < edge_prob
        g = Graph(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"no connected graph in {max_tries} draws (n={n}, p={edge_prob})")
