"""MAP parent-set selection for a fixed ordering.

Node scores decompose over the graph, so parent sets are selected one node
at a time: a greedy forward pass adds the predecessor with the largest
strictly positive score gain (up to the in-degree cap), then a backward pass
deletes members whose removal strictly improves the score.  An exhaustive
subset scan is provided as a small-scale oracle.
"""

from __future__ import annotations

import itertools
import logging
from typing import Sequence

from .dag import Dag
from .errors import DegenerateVariance, OracleLimitError, SingularDesign
from .ordering import Ordering
from .scoring import Dataset, ScoreParams, node_score

__all__ = ["select_parents", "forward_backward", "exhaustive_map", "exhaustive_parents"]

logger = logging.getLogger(__name__)

_SKIPPED = (SingularDesign, DegenerateVariance)


def select_parents(
    ds: Dataset,
    j: int,
    predecessors: Sequence[int],
    params: ScoreParams,
) -> tuple[tuple[int, ...], float]:
    """Forward-backward parent selection for one node.

    Returns the selected parents as a sorted tuple together with their node
    score.  Candidates whose score cannot be evaluated (collinear design or
    floored variance) are treated as having gain minus infinity.  Ties are
    broken toward the lowest candidate label; zero gains are rejected so the
    procedure terminates.
    """
    # Regression needs strictly fewer predictors than observations.
    cap = min(params.indegree_cap(ds.p), ds.n - 1)
    current: list[int] = []
    phi = node_score(ds, j, (), params)
    candidates = sorted(predecessors)

    while candidates and len(current) < cap:
        best_label = None
        best_phi = phi
        for i in candidates:
            trial = tuple(sorted(current + [i]))
            try:
                phi_i = node_score(ds, j, trial, params)
            except _SKIPPED:
                continue
            if phi_i > best_phi:
                best_phi = phi_i
                best_label = i
        if best_label is None:
            break
        current.append(best_label)
        candidates.remove(best_label)
        phi = best_phi
        if len(current) == cap and candidates:
            logger.warning(
                "node %d hit the in-degree cap %d during forward selection", j, cap
            )

    while current:
        best_label = None
        best_phi = phi
        for i in sorted(current):
            trial = tuple(v for v in sorted(current) if v != i)
            phi_i = node_score(ds, j, trial, params)
            if phi_i > best_phi:
                best_phi = phi_i
                best_label = i
        if best_label is None:
            break
        current.remove(best_label)
        phi = best_phi

    return tuple(sorted(current)), phi


def forward_backward(ds: Dataset, sigma: Ordering, params: ScoreParams) -> Dag:
    """Selected graph under ``sigma``: node-wise forward-backward parent sets."""
    if sigma.p != ds.p:
        raise ValueError("ordering and dataset sizes differ")
    edges = []
    perm = sigma.perm
    for pos in range(1, sigma.p):
        j = perm[pos]
        parents, _ = select_parents(ds, j, perm[:pos], params)
        edges.extend((i, j) for i in parents)
    return Dag(ds.p, edges)


def exhaustive_parents(
    ds: Dataset,
    j: int,
    predecessors: Sequence[int],
    params: ScoreParams,
) -> tuple[tuple[int, ...], float]:
    """Best parent set by scanning every subset of the predecessors.

    Ties are broken toward the smaller set, then the lexicographically
    smallest sorted label sequence (the enumeration order).
    """
    cap = min(params.indegree_cap(ds.p), len(predecessors), ds.n - 1)
    best_set: tuple[int, ...] | None = None
    best_phi = 0.0
    for size in range(cap + 1):
        for combo in itertools.combinations(sorted(predecessors), size):
            try:
                phi = node_score(ds, j, combo, params)
            except _SKIPPED:
                continue
            if best_set is None or phi > best_phi:
                best_set = combo
                best_phi = phi
    if best_set is None:
        raise DegenerateVariance(f"no scorable parent set for node {j}")
    return best_set, best_phi


def exhaustive_map(
    ds: Dataset,
    sigma: Ordering,
    params: ScoreParams,
    p_limit: int = 8,
    capped_p_limit: int = 12,
) -> Dag:
    """Exact MAP graph under ``sigma`` by exhaustive subset scans per node.

    Only feasible at small scale: allowed up to ``capped_p_limit`` nodes when
    the in-degree cap is at most 4, and ``p_limit`` nodes otherwise.
    """
    if sigma.p != ds.p:
        raise ValueError("ordering and dataset sizes differ")
    cap = params.indegree_cap(ds.p)
    limit = capped_p_limit if cap <= 4 else p_limit
    if ds.p > limit:
        raise OracleLimitError(
            f"exhaustive search limited to p <= {limit} (in-degree cap {cap})"
        )
    edges = []
    perm = sigma.perm
    for pos in range(1, sigma.p):
        j = perm[pos]
        parents, _ = exhaustive_parents(ds, j, perm[:pos], params)
        edges.extend((i, j) for i in parents)
    return Dag(ds.p, edges)
