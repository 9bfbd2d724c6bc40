"""Decomposable Bayesian score for Gaussian DAG models.

The graph score is a sum of node-wise terms

    phi_j(S) = -(c0 log p + log(1 + alpha/gamma)/2) |S|
               - (alpha n + kappa)/2 * log(n * omega_j(S)),

where ``omega_j(S)`` is the residual variance of regressing column ``j`` on
the columns in ``S``.  All residual variances are computed from the cached
Gram matrix of the (column-centered) data, so a node score costs the same
no matter how many observations the dataset has, and repeated subset visits
hit a per-dataset memo cache.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .dag import Dag
from .errors import DegenerateVariance, SingularDesign
from .ordering import Ordering

__all__ = [
    "Dataset",
    "ScoreParams",
    "residual_variance",
    "node_score",
    "graph_score",
    "log_posterior",
    "log_bayes_factor",
]

PIVOT_RTOL = 1e-10
VARIANCE_FLOOR_RTOL = 1e-12


@dataclass(frozen=True)
class ScoreParams:
    """Hyperparameters of the score; defaults follow the simulation protocol."""

    alpha: float = 0.99
    gamma: float = 0.01
    kappa: float = 0.0
    c0: float = 3.0
    max_indegree: int | None = None  # None means unbounded (p)

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.kappa < 0.0:
            raise ValueError("kappa must be nonnegative")
        if self.c0 <= 0.0:
            raise ValueError("c0 must be positive")
        if self.max_indegree is not None and self.max_indegree < 1:
            raise ValueError("max_indegree must be a positive integer or None")

    def indegree_cap(self, p: int) -> int:
        return p if self.max_indegree is None else min(self.max_indegree, p)

    def edge_penalty(self, p: int) -> float:
        return self.c0 * math.log(p) + 0.5 * math.log1p(self.alpha / self.gamma)


class Dataset:
    """One source's observation matrix with its cached Gram matrix.

    Columns are centered at construction; every regression quantity is then
    derived from ``gram = data.T @ data``.
    """

    def __init__(self, data: np.ndarray, name: str = ""):
        data = np.array(data, dtype=float)
        if data.ndim != 2:
            raise ValueError("data must be a 2-D array")
        n, p = data.shape
        if n < 2:
            raise ValueError("need at least two observations")
        if not np.all(np.isfinite(data)):
            raise ValueError("data contains non-finite values")
        data -= data.mean(axis=0)
        col_means = np.abs(data.mean(axis=0))
        scale = max(1.0, float(np.max(np.abs(data), initial=0.0)))
        if np.max(col_means) >= 1e-10 * scale:
            raise AssertionError("column centering failed")
        data.setflags(write=False)
        gram = data.T @ data
        gram = (gram + gram.T) / 2.0
        gram.setflags(write=False)
        self.data = data
        self.gram = gram
        self.n = n
        self.p = p
        self.name = name
        self._omega_cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Dataset(n={self.n}, p={self.p}{tag})"

    def clear_cache(self) -> None:
        self._omega_cache.clear()

    def residual_variance(self, j: int, subset: Sequence[int]) -> float:
        """Residual variance of regressing column ``j`` on ``subset`` (labels).

        Computed as ``(G_jj - G_jS G_SS^{-1} G_Sj) / n`` with a symmetric
        positive-definite factorization of ``G_SS``; clamped below at zero.
        """
        key = (j, tuple(sorted(subset)))
        cached = self._omega_cache.get(key)
        if cached is not None:
            if cached < 0.0:
                raise SingularDesign(f"collinear predictors {key[1]} for node {j}")
            return cached
        value = self._compute_omega(j, key[1])
        self._omega_cache[key] = value
        if value < 0.0:
            raise SingularDesign(f"collinear predictors {key[1]} for node {j}")
        return value

    def _compute_omega(self, j: int, subset: tuple[int, ...]) -> float:
        # A negative return value marks a singular design for the cache.
        if not 1 <= j <= self.p:
            raise ValueError(f"label {j} out of range 1..{self.p}")
        if j in subset:
            raise ValueError(f"node {j} cannot regress on itself")
        if len(subset) >= self.n:
            raise ValueError("subset size must stay below the sample count")
        gram = self.gram
        gjj = gram[j - 1, j - 1]
        if not subset:
            return max(gjj / self.n, 0.0)
        if len(subset) == 1:
            i = subset[0] - 1
            gii = gram[i, i]
            if gii <= 0.0:
                return -1.0
            return max((gjj - gram[i, j - 1] ** 2 / gii) / self.n, 0.0)
        idx = np.array(subset, dtype=np.intp) - 1
        sub = gram[np.ix_(idx, idx)]
        rhs = gram[idx, j - 1]
        try:
            chol = np.linalg.cholesky(sub)
        except np.linalg.LinAlgError:
            return -1.0
        pivots = np.diag(chol) ** 2
        if np.min(pivots) < PIVOT_RTOL * np.max(np.diag(sub)):
            return -1.0
        y = scipy.linalg.solve_triangular(chol, rhs, lower=True, check_finite=False)
        return max((gjj - float(y @ y)) / self.n, 0.0)

    def base_variance(self, j: int) -> float:
        """Sample variance of column ``j`` (the empty-subset residual variance)."""
        return self.gram[j - 1, j - 1] / self.n


def residual_variance(ds: Dataset, j: int, subset: Iterable[int]) -> float:
    return ds.residual_variance(j, tuple(subset))


def node_score(ds: Dataset, j: int, subset: Iterable[int], params: ScoreParams) -> float:
    """Node-wise score of parent set ``subset`` for node ``j``."""
    subset = tuple(sorted(subset))
    if len(subset) > params.indegree_cap(ds.p):
        raise ValueError(f"parent set of size {len(subset)} exceeds the in-degree cap")
    omega = ds.residual_variance(j, subset)
    floor = VARIANCE_FLOOR_RTOL * ds.base_variance(j)
    if omega <= floor:
        raise DegenerateVariance(
            f"residual variance {omega:.3e} for node {j} on {subset} hit the floor"
        )
    penalty = params.edge_penalty(ds.p)
    return -penalty * len(subset) - 0.5 * (params.alpha * ds.n + params.kappa) * math.log(
        ds.n * omega
    )


def graph_score(ds: Dataset, g: Dag, params: ScoreParams) -> float:
    """Sum of node scores over the graph's parent sets."""
    if g.p != ds.p:
        raise ValueError("graph and dataset sizes differ")
    return math.fsum(
        node_score(ds, j, g.parent_set(j), params) for j in range(1, ds.p + 1)
    )


def log_posterior(
    sigma: Ordering,
    datasets: Sequence[Dataset],
    params: ScoreParams,
    map_graphs: Sequence[Dag],
) -> float:
    """Unnormalized log posterior of an ordering, up to an additive constant.

    ``map_graphs[k]`` must be the selected graph for dataset ``k`` under
    ``sigma`` (the ordering prior is flat, so only graph scores enter).
    """
    if len(map_graphs) != len(datasets):
        raise ValueError("need one selected graph per dataset")
    for g in map_graphs:
        if not g.is_consistent(sigma):
            raise ValueError("selected graph is not consistent with the ordering")
    return math.fsum(
        graph_score(ds, g, params) for ds, g in zip(datasets, map_graphs)
    )


def log_bayes_factor(
    sigma: Ordering,
    tau: Ordering,
    datasets: Sequence[Dataset],
    params: ScoreParams,
) -> float:
    """Log posterior odds of ``sigma`` over ``tau``, each with its own MAP graphs."""
    from .selection import forward_backward

    num = log_posterior(
        sigma, datasets, params, [forward_backward(ds, sigma, params) for ds in datasets]
    )
    den = log_posterior(
        tau, datasets, params, [forward_backward(ds, tau, params) for ds in datasets]
    )
    return num - den
