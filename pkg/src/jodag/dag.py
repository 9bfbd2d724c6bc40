"""Directed acyclic graphs on labels ``{1, ..., p}`` and structural queries.

Adjacency is stored as a dense boolean matrix (0-indexed internally), which
keeps edge lookups, Hamming distances and acyclicity checks cheap at the
graph sizes this package targets.  All public edge tuples use 1-indexed
labels, matching :mod:`jodag.ordering`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .ordering import Ordering

__all__ = ["Dag", "WeightedDag", "is_acyclic_matrix"]


def is_acyclic_matrix(adj: np.ndarray) -> bool:
    """Kahn-style check that a boolean adjacency matrix has no directed cycle."""
    adj = adj.copy()
    remaining = np.ones(adj.shape[0], dtype=bool)
    while remaining.any():
        indeg = adj[remaining][:, remaining].sum(axis=0)
        sources = np.flatnonzero(remaining)[indeg == 0]
        if sources.size == 0:
            return False
        remaining[sources] = False
    return True


class Dag:
    """Immutable DAG with edges ``i -> j`` over labels ``1..p``."""

    __slots__ = ("_adj", "_p", "_hash")

    def __init__(self, p: int, edges: Iterable[tuple[int, int]] = ()):
        if p < 1:
            raise ValueError("need at least one node")
        adj = np.zeros((p, p), dtype=bool)
        for i, j in edges:
            if not (1 <= i <= p and 1 <= j <= p):
                raise ValueError(f"edge ({i},{j}) out of range 1..{p}")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            adj[i - 1, j - 1] = True
        if not is_acyclic_matrix(adj):
            raise ValueError("edge set contains a directed cycle")
        adj.setflags(write=False)
        self._adj = adj
        self._p = p
        self._hash = hash((p, adj.tobytes()))

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "Dag":
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], [(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)])

    @property
    def p(self) -> int:
        return self._p

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        rows, cols = np.nonzero(self._adj)
        return frozenset((int(r) + 1, int(c) + 1) for r, c in zip(rows, cols))

    @property
    def n_edges(self) -> int:
        return int(self._adj.sum())

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._adj[i - 1, j - 1])

    def adjacency(self) -> np.ndarray:
        """Copy of the adjacency matrix as 0/1 integers (row i-1 -> col j-1)."""
        return self._adj.astype(np.int8)

    def parent_set(self, j: int) -> frozenset[int]:
        if not 1 <= j <= self._p:
            raise ValueError(f"label {j} out of range 1..{self._p}")
        return frozenset(int(i) + 1 for i in np.flatnonzero(self._adj[:, j - 1]))

    def children(self, j: int) -> frozenset[int]:
        if not 1 <= j <= self._p:
            raise ValueError(f"label {j} out of range 1..{self._p}")
        return frozenset(int(i) + 1 for i in np.flatnonzero(self._adj[j - 1, :]))

    def in_degree(self, j: int) -> int:
        return int(self._adj[:, j - 1].sum())

    def max_in_degree(self) -> int:
        return int(self._adj.sum(axis=0).max()) if self._p else 0

    def is_consistent(self, sigma: Ordering) -> bool:
        """True iff every edge points from an earlier to a later position of ``sigma``."""
        if sigma.p != self._p:
            raise ValueError("ordering and graph sizes differ")
        inv = sigma.inverse()
        return all(inv[i - 1] < inv[j - 1] for i, j in self.edges)

    def topological_ordering(self) -> Ordering:
        """Some ordering consistent with the graph (lowest label first among sources)."""
        adj = self._adj
        indeg = adj.sum(axis=0).astype(int)
        placed = np.zeros(self._p, dtype=bool)
        out: list[int] = []
        for _ in range(self._p):
            ready = np.flatnonzero(~placed & (indeg == 0))
            nxt = int(ready[0])
            placed[nxt] = True
            indeg -= adj[nxt].astype(int)
            out.append(nxt + 1)
        return Ordering(tuple(out))

    def skeleton(self) -> frozenset[tuple[int, int]]:
        """Undirected edge pairs, canonically ordered ``(min, max)``."""
        return frozenset((min(i, j), max(i, j)) for i, j in self.edges)

    def v_structures(self) -> frozenset[tuple[int, int, int]]:
        """Colliders ``i -> j <- k`` with ``i`` and ``k`` non-adjacent, ``i < k``."""
        adj = self._adj
        sym = adj | adj.T
        out = set()
        for j in range(self._p):
            parents = np.flatnonzero(adj[:, j])
            for a in range(len(parents)):
                for b in range(a + 1, len(parents)):
                    i, k = int(parents[a]), int(parents[b])
                    if not sym[i, k]:
                        out.add((i + 1, j + 1, k + 1))
        return frozenset(out)

    def covered_edges(self) -> frozenset[tuple[int, int]]:
        """Edges ``i -> j`` whose reversal stays in the Markov equivalence class.

        The defining condition is that the parents of ``j`` are exactly the
        parents of ``i`` plus ``i`` itself.
        """
        adj = self._adj
        out = set()
        for i, j in zip(*np.nonzero(adj)):
            pa_j = adj[:, j].copy()
            pa_j[i] = False
            if np.array_equal(pa_j, adj[:, i]):
                out.add((int(i) + 1, int(j) + 1))
        return frozenset(out)

    def reverse_edge(self, i: int, j: int) -> "Dag":
        if not self.has_edge(i, j):
            raise ValueError(f"no edge ({i},{j}) to reverse")
        edges = set(self.edges)
        edges.discard((i, j))
        edges.add((j, i))
        return Dag(self._p, edges)

    def hamming(self, other: "Dag") -> int:
        """Number of ordered pairs whose adjacency indicator differs."""
        if other.p != self._p:
            raise ValueError("graph sizes differ")
        return int(np.sum(self._adj != other._adj))

    # -- serialization ------------------------------------------------------

    def to_lines(self) -> list[str]:
        """Edge-list text form: a ``p=<n>`` header followed by ``i,j`` lines."""
        lines = [f"p={self._p}"]
        lines.extend(f"{i},{j}" for i, j in sorted(self.edges))
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Dag":
        it = iter(line.strip() for line in lines)
        rows = [line for line in it if line]
        if not rows or not rows[0].startswith("p="):
            raise ValueError("edge-list text must start with a 'p=<n>' header")
        p = int(rows[0][2:])
        edges = []
        for row in rows[1:]:
            i, j = row.split(",")
            edges.append((int(i), int(j)))
        return cls(p, edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self._p == other._p and np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Dag(p={self._p}, edges={sorted(self.edges)})"


@dataclass(frozen=True)
class WeightedDag:
    """A linear Gaussian structural model: DAG plus edge weights and noise variances."""

    dag: Dag
    weights: Mapping[tuple[int, int], float]
    noise_vars: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.noise_vars:
            object.__setattr__(self, "noise_vars", (1.0,) * self.dag.p)
        if len(self.noise_vars) != self.dag.p:
            raise ValueError("need one noise variance per node")
        if any(v <= 0 for v in self.noise_vars):
            raise ValueError("noise variances must be strictly positive")
        if frozenset(self.weights) != self.dag.edges:
            raise ValueError("weights must be keyed exactly by the DAG's edges")
        object.__setattr__(self, "weights", dict(self.weights))

    @property
    def p(self) -> int:
        return self.dag.p

    def coefficient_matrix(self) -> np.ndarray:
        """Weighted adjacency ``B`` with ``B[i-1, j-1]`` the coefficient on ``i -> j``."""
        b = np.zeros((self.dag.p, self.dag.p))
        for (i, j), w in self.weights.items():
            b[i - 1, j - 1] = w
        return b
