"""Posterior summaries and evaluation metrics for sampler output."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .dag import Dag
from .ordering import Ordering, kendall_tau
from .sampler import ChainTrace

__all__ = [
    "edge_inclusion",
    "pooled_edge_inclusion",
    "average_hamming",
    "mean_rank_correlation",
    "tpr_fdr",
    "point_estimate",
    "gelman_rubin",
    "gelman_rubin_summary",
    "pairwise_rank_correlation",
    "connectivity_difference",
    "GR_CAP",
]

GR_CAP = 1e6


def _edge_indicator_array(trace: ChainTrace, k: int, p: int) -> np.ndarray:
    if trace.map_edges is None:
        raise ValueError("trace did not record selected graphs")
    if not trace.map_edges:
        raise ValueError("trace is empty")
    n_datasets = len(trace.map_edges[0])
    if not 0 <= k < n_datasets:
        raise ValueError(f"dataset index {k} out of range 0..{n_datasets - 1}")
    out = np.zeros((len(trace.map_edges), p, p), dtype=bool)
    for t, sample in enumerate(trace.map_edges):
        for i, j in sample[k]:
            out[t, i - 1, j - 1] = True
    return out


def edge_inclusion(trace: ChainTrace, k: int, p: int) -> np.ndarray:
    """Fraction of recorded samples whose dataset-``k`` graph contains each edge."""
    return _edge_indicator_array(trace, k, p).mean(axis=0)


def pooled_edge_inclusion(traces: Sequence[ChainTrace], k: int, p: int) -> np.ndarray:
    """Edge inclusion probabilities with samples pooled across chains."""
    arrays = [_edge_indicator_array(trace, k, p) for trace in traces]
    return np.concatenate(arrays, axis=0).mean(axis=0)


def _as_matrix(est, p: int) -> np.ndarray:
    if isinstance(est, Dag):
        return est.adjacency().astype(float)
    mat = np.asarray(est, dtype=float)
    if mat.shape != (p, p):
        raise ValueError(f"expected a {p}x{p} matrix, got shape {mat.shape}")
    return mat


def average_hamming(truths: Sequence[Dag], estimates: Sequence) -> float:
    """Mean over datasets of the entrywise adjacency difference to the truth.

    Estimates may be graphs (0/1 adjacency) or real-valued posterior-mean
    matrices; with binary estimates this is the mean graph Hamming distance.
    """
    if len(truths) != len(estimates):
        raise ValueError("need one estimate per true graph")
    if not truths:
        raise ValueError("need at least one graph")
    total = 0.0
    for truth, est in zip(truths, estimates):
        mat = _as_matrix(est, truth.p)
        total += float(np.abs(truth.adjacency() - mat).sum())
    return total / len(truths)


def mean_rank_correlation(trace: ChainTrace, sigma_star: Ordering) -> float:
    """Mean Kendall correlation between the reference and the sampled orderings."""
    if not trace.orderings:
        raise ValueError("trace is empty")
    return float(
        np.mean([kendall_tau(sigma_star, sigma) for sigma in trace.orderings])
    )


def tpr_fdr(truth: Dag, estimate: Dag) -> tuple[float, float]:
    """True positive rate and false discovery rate of directed edge recovery.

    An empty estimate has zero discoveries, so its FDR is defined as 0.
    """
    true_edges = truth.edges
    est_edges = estimate.edges
    tpr = len(true_edges & est_edges) / len(true_edges) if true_edges else 1.0
    fdr = len(est_edges - true_edges) / len(est_edges) if est_edges else 0.0
    return tpr, fdr


def point_estimate(inclusion: np.ndarray, threshold: float = 0.5) -> Dag:
    """Graph keeping the edges whose inclusion probability exceeds ``threshold``."""
    inclusion = np.asarray(inclusion)
    rows, cols = np.nonzero(inclusion > threshold)
    return Dag(inclusion.shape[0], [(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)])


def gelman_rubin_from_edge_samples(
    samples_per_chain: Sequence[Sequence[tuple[frozenset, ...]]], p: int
) -> np.ndarray:
    """Classic (non-split) potential scale reduction on edge-indicator series.

    ``samples_per_chain[c]`` holds one chain's recorded per-dataset edge
    sets.  Returns an array of shape ``(K, p, p)`` with NaN on the diagonals.
    If a series is constant and identical across chains the statistic is 1 by
    convention; if chains are constant but disagree it is capped at
    ``GR_CAP``.
    """
    m = len(samples_per_chain)
    if m < 2:
        raise ValueError("need at least two chains")
    lengths = {len(samples) for samples in samples_per_chain}
    if len(lengths) != 1:
        raise ValueError("chains must have equal recorded lengths")
    n = lengths.pop()
    if n < 2:
        raise ValueError("need at least two recorded samples per chain")
    n_datasets = len(samples_per_chain[0][0])

    out = np.full((n_datasets, p, p), np.nan)
    for k in range(n_datasets):
        # Indicators are binary, so per-chain means and variances reduce to
        # the per-chain edge counts S: mean = S/n, var = (S - S^2/n)/(n-1).
        sums = np.zeros((m, p, p))
        for c, samples in enumerate(samples_per_chain):
            for sample in samples:
                for i, j in sample[k]:
                    sums[c, i - 1, j - 1] += 1
        chain_means = sums / n
        chain_vars = (sums - sums**2 / n) / (n - 1)
        w = chain_vars.mean(axis=0)
        b_over_n = chain_means.var(axis=0, ddof=1)
        v = (n - 1) / n * w + (m + 1) / m * b_over_n
        with np.errstate(divide="ignore", invalid="ignore"):
            rhat = np.sqrt(v / w)
        rhat = np.where((w == 0) & (b_over_n == 0), 1.0, rhat)
        rhat = np.where((w == 0) & (b_over_n > 0), GR_CAP, rhat)
        rhat = np.minimum(rhat, GR_CAP)
        np.fill_diagonal(rhat, np.nan)
        out[k] = rhat
    return out


def gelman_rubin(traces: Sequence[ChainTrace], p: int) -> np.ndarray:
    """Potential scale reduction per dataset and ordered edge, across chains."""
    for trace in traces:
        if trace.map_edges is None:
            raise ValueError("traces did not record selected graphs")
    return gelman_rubin_from_edge_samples([trace.map_edges for trace in traces], p)


def gelman_rubin_summary(rhat: np.ndarray) -> dict:
    """Max and threshold fractions over the off-diagonal statistics."""
    values = rhat[np.isfinite(rhat)]
    if values.size == 0:
        raise ValueError("no finite statistics to summarize")
    return {
        "max": float(values.max()),
        "frac_lt_1p1": float(np.mean(values < 1.1)),
        "frac_lt_1p001": float(np.mean(values < 1.001)),
    }


def pairwise_rank_correlation(orderings: Sequence[Ordering]) -> float:
    """Mean Kendall correlation over all unordered pairs of orderings."""
    if len(orderings) < 2:
        raise ValueError("need at least two orderings")
    vals = [
        kendall_tau(orderings[a], orderings[b])
        for a in range(len(orderings))
        for b in range(a + 1, len(orderings))
    ]
    return float(np.mean(vals))


def connectivity_difference(
    group_a: Sequence[np.ndarray], group_b: Sequence[np.ndarray]
) -> list[tuple[int, float]]:
    """Nodes ranked by group difference of posterior connectivity.

    Connectivity of a node is the sum of its incoming and outgoing posterior
    edge probabilities; the statistic is the group-A mean minus the group-B
    mean, and nodes are returned sorted by absolute difference.
    """
    if not group_a or not group_b:
        raise ValueError("both groups need at least one matrix")
    p = np.asarray(group_a[0]).shape[0]

    def node_connectivity(mats):
        conn = np.zeros(p)
        for mat in mats:
            mat = _as_matrix(mat, p)
            conn += mat.sum(axis=0) + mat.sum(axis=1)
        return conn / len(mats)

    diff = node_connectivity(group_a) - node_connectivity(group_b)
    ranked = sorted(
        ((node + 1, float(d)) for node, d in enumerate(diff)),
        key=lambda pair: abs(pair[1]),
        reverse=True,
    )
    return ranked
