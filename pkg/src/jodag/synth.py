"""Synthetic data generation mirroring the simulation protocols.

Random DAGs are drawn consistently with a fixed ordering, edge weights come
from a two-sided uniform band, noise is standard normal, and helpers build
the common/private edge collections, similarity-controlled ordering sets and
path-cancellation (faithfulness-violating) models used in the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dag import Dag, WeightedDag
from .oracle import population_covariance
from .ordering import Ordering, kendall_tau
from .scoring import Dataset

__all__ = [
    "default_edge_probability",
    "random_ordered_dag",
    "sample_weights",
    "simulate",
    "common_private_collection",
    "SimilarOrderings",
    "similar_orderings",
    "unfaithful_scm",
    "triangles",
]


def default_edge_probability(p: int) -> float:
    """Edge probability giving an expected in/out neighborhood of 3 per node."""
    return 3.0 / (2.0 * p - 2.0)


def random_ordered_dag(
    p: int,
    p_edge: float | None = None,
    sigma: Ordering | None = None,
    rng: np.random.Generator | None = None,
) -> Dag:
    """Include each forward pair of ``sigma`` independently with probability ``p_edge``."""
    rng = np.random.default_rng(rng)
    sigma = sigma or Ordering.identity(p)
    if sigma.p != p:
        raise ValueError("ordering length must match p")
    if p_edge is None:
        p_edge = default_edge_probability(p)
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    perm = sigma.perm
    edges = []
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < p_edge:
                edges.append((perm[a], perm[b]))
    return Dag(p, edges)


def sample_weights(
    g: Dag,
    low: float = 0.5,
    high: float = 1.0,
    rng: np.random.Generator | None = None,
) -> WeightedDag:
    """Draw each edge weight uniformly from ``[-high, -low] U [low, high]``.

    Noise variances are all one.
    """
    if not 0.0 < low < high:
        raise ValueError("need 0 < low < high")
    rng = np.random.default_rng(rng)
    weights = {}
    for edge in sorted(g.edges):
        magnitude = rng.uniform(low, high)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        weights[edge] = sign * magnitude
    return WeightedDag(dag=g, weights=weights)


def simulate(
    scm: WeightedDag, n: int, rng: np.random.Generator | None = None
) -> Dataset:
    """Draw ``n`` observations from the linear Gaussian model, columns centered."""
    if n < 2:
        raise ValueError("need at least two observations")
    rng = np.random.default_rng(rng)
    p = scm.p
    b = scm.coefficient_matrix()
    x = np.empty((n, p))
    for j in scm.dag.topological_ordering().perm:
        noise = rng.normal(0.0, np.sqrt(scm.noise_vars[j - 1]), size=n)
        parents = sorted(scm.dag.parent_set(j))
        col = noise
        if parents:
            idx = np.array(parents, dtype=np.intp) - 1
            col = x[:, idx] @ b[idx, j - 1] + noise
        x[:, j - 1] = col
    return Dataset(x)


def common_private_collection(
    p: int,
    n_datasets: int,
    n_common: int,
    n_private: int,
    sigma_star: Ordering | None = None,
    rng: np.random.Generator | None = None,
) -> list[Dag]:
    """Graphs sharing one common edge set plus disjoint private edges each.

    All edges are consistent with ``sigma_star``; private sets are drawn
    without replacement from the pairs left over after the common draw,
    independently per graph.
    """
    rng = np.random.default_rng(rng)
    sigma_star = sigma_star or Ordering.identity(p)
    total_pairs = p * (p - 1) // 2
    if n_common + n_private > total_pairs:
        raise ValueError(
            f"{n_common} common + {n_private} private edges exceed {total_pairs} pairs"
        )
    perm = sigma_star.perm
    pairs = [(perm[a], perm[b]) for a in range(p) for b in range(a + 1, p)]
    common_idx = rng.choice(total_pairs, size=n_common, replace=False)
    common = [pairs[i] for i in common_idx]
    rest = [pair for i, pair in enumerate(pairs) if i not in set(common_idx.tolist())]
    graphs = []
    for _ in range(n_datasets):
        if n_private:
            pick = rng.choice(len(rest), size=n_private, replace=False)
            private = [rest[i] for i in pick]
        else:
            private = []
        graphs.append(Dag(p, common + private))
    return graphs


@dataclass(frozen=True)
class SimilarOrderings:
    """Orderings with controlled rank correlation to a reference."""

    orderings: list[Ordering]
    realized: tuple[float, ...]
    pairwise_mean: float


def similar_orderings(
    p: int,
    n_orderings: int,
    target_tau: float,
    rng: np.random.Generator | None = None,
    tolerance: float = 0.02,
    max_steps: int = 200_000,
) -> SimilarOrderings:
    """Sample orderings whose Kendall correlation to the identity is near the target.

    Each ordering starts at the identity (or its reversal for negative
    targets) and performs a Metropolis walk over adjacent swaps with the
    absolute deviation from the target as its energy, stopping inside the
    tolerance band.  A single adjacent swap moves the correlation by
    ``2 / (p(p-1)/2)``, so small ``p`` cannot reach every target; that case
    raises after ``max_steps``.
    """
    if not -1.0 <= target_tau <= 1.0:
        raise ValueError("target correlation must lie in [-1, 1]")
    rng = np.random.default_rng(rng)
    total = p * (p - 1) // 2
    temperature = 2.0 / total

    out: list[Ordering] = []
    realized: list[float] = []
    for _ in range(n_orderings):
        # Track the discordant-pair count D exactly: an adjacent swap flips
        # exactly one pair, and tau = (total - 2 D) / total.
        if target_tau >= 0.0:
            perm = list(range(1, p + 1))
            discordant = 0
        else:
            perm = list(range(p, 0, -1))
            discordant = total
        tau = (total - 2 * discordant) / total
        steps = 0
        while abs(tau - target_tau) > tolerance:
            if steps >= max_steps:
                raise ValueError(
                    f"target {target_tau} unreachable within {tolerance} for p={p}"
                )
            steps += 1
            pos = int(rng.integers(0, p - 1))
            u, v = perm[pos], perm[pos + 1]
            new_discordant = discordant + (1 if u < v else -1)
            new_tau = (total - 2 * new_discordant) / total
            gain = abs(tau - target_tau) - abs(new_tau - target_tau)
            if gain >= 0.0 or rng.random() < np.exp(gain / temperature):
                perm[pos], perm[pos + 1] = v, u
                discordant = new_discordant
                tau = new_tau
        out.append(Ordering(tuple(perm)))
        realized.append(tau)

    if n_orderings >= 2:
        pairs = [
            kendall_tau(out[a], out[b])
            for a in range(n_orderings)
            for b in range(a + 1, n_orderings)
        ]
        pairwise = float(np.mean(pairs))
    else:
        pairwise = float("nan")
    return SimilarOrderings(out, tuple(realized), pairwise)


def triangles(g: Dag) -> list[tuple[int, int, int]]:
    """Triples ``(i, j, l)`` with edges ``i->j``, ``i->l`` and ``j->l`` present."""
    out = []
    for i, j in sorted(g.edges):
        for l in sorted(g.children(j)):
            if g.has_edge(i, l):
                out.append((i, j, l))
    return out


def unfaithful_scm(
    g: Dag,
    motifs: int,
    rng: np.random.Generator | None = None,
    low: float = 0.5,
    high: float = 1.0,
) -> WeightedDag:
    """Weights with exact path cancellation in ``motifs`` triangular motifs.

    For each selected triangle ``i->j``, ``j->l``, ``i->l`` the coefficient
    on ``i->l`` is set so that the analytic covariance between ``j`` and
    ``l`` vanishes, which generalizes the three-node cancellation
    ``b = -a*c - c/a`` and makes the resulting distribution unfaithful to the
    graph.  Motifs are chosen with distinct sink nodes and processed in
    topological order so each cancellation survives the later ones; remaining
    weights are sampled as usual.
    """
    rng = np.random.default_rng(rng)
    scm = sample_weights(g, low=low, high=high, rng=rng)
    if motifs == 0:
        return scm

    candidates = triangles(g)
    rng.shuffle(candidates)
    topo_pos = {label: pos for pos, label in enumerate(g.topological_ordering().perm)}
    chosen: list[tuple[int, int, int]] = []
    used_sinks: set[int] = set()
    for tri in candidates:
        if tri[2] not in used_sinks:
            chosen.append(tri)
            used_sinks.add(tri[2])
        if len(chosen) == motifs:
            break
    if len(chosen) < motifs:
        raise ValueError(
            f"graph has {len(chosen)} usable triangular motifs, need {motifs}"
        )

    weights = dict(scm.weights)
    for i, j, l in sorted(chosen, key=lambda tri: topo_pos[tri[2]]):
        current = WeightedDag(dag=g, weights=weights, noise_vars=scm.noise_vars)
        cov = population_covariance(current).matrix
        cov_ij = cov[i - 1, j - 1]
        if abs(cov_ij) < 1e-12:
            raise ValueError(f"motif ({i},{j},{l}) cannot cancel: cov({i},{j}) is zero")
        residual = sum(
            weights[(m, l)] * cov[j - 1, m - 1]
            for m in g.parent_set(l)
            if m != i
        )
        weights[(i, l)] = -residual / cov_ij
    return WeightedDag(dag=g, weights=weights, noise_vars=scm.noise_vars)
