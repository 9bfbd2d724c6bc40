"""Scikit-learn style front end for joint multi-dataset DAG learning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .analysis import mean_rank_correlation, point_estimate, pooled_edge_inclusion
from .dag import Dag
from .sampler import ChainConfig, run_ensemble
from .scoring import ScoreParams
from .validation import as_datasets, spawn_seeds

__all__ = ["JointDagEstimator"]


class JointDagEstimator(BaseEstimator):
    """Jointly estimate one DAG per data source under a shared causal ordering.

    ``fit`` runs Metropolis-Hastings chains over the ordering space; for every
    visited ordering each dataset gets its own MAP graph, so heterogeneous
    sources share order information while keeping distinct structures.

    Parameters
    ----------
    alpha, gamma, kappa, c0 : float
        Score hyperparameters (likelihood fraction, prior precision ratio,
        variance prior shape, edge penalty exponent).
    max_indegree : int or None
        Cap on parents per node during selection; None means unbounded.
    iterations : int or None
        Chain length; defaults to ``20 * p**2``.
    burn_in : int or None
        Discarded prefix; defaults to half the iterations.
    thin : int
        Recording stride after burn-in.
    neighborhood : {"r2r", "adj", "rts"}
        Proposal neighborhood over orderings.
    n_chains : int
        Independent chains (their samples are pooled for summaries).
    edge_threshold : float
        Posterior inclusion probability above which ``predict`` keeps an edge.
    random_state : int
        Seed from which per-chain seeds are derived.
    n_jobs : int or None
        Worker processes for the ensemble; None uses JOD_THREADS or all cores.

    Attributes
    ----------
    n_features_in_ : int
        Number of variables ``p``.
    n_datasets_ : int
        Number of sources ``K``.
    traces_ : list of ChainTrace
        Raw recorded chains.
    edge_probabilities_ : ndarray of shape (K, p, p)
        Pooled posterior edge inclusion probabilities per source.
    best_ordering_ : Ordering
        Recorded ordering with the highest log posterior.
    best_log_posterior_ : float
        Its unnormalized log posterior value.
    """

    def __init__(
        self,
        alpha: float = 0.99,
        gamma: float = 0.01,
        kappa: float = 0.0,
        c0: float = 3.0,
        max_indegree: int | None = None,
        iterations: int | None = None,
        burn_in: int | None = None,
        thin: int = 1,
        neighborhood: str = "r2r",
        n_chains: int = 1,
        edge_threshold: float = 0.5,
        random_state: int = 0,
        n_jobs: int | None = None,
    ):
        self.alpha = alpha
        self.gamma = gamma
        self.kappa = kappa
        self.c0 = c0
        self.max_indegree = max_indegree
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        self.neighborhood = neighborhood
        self.n_chains = n_chains
        self.edge_threshold = edge_threshold
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _score_params(self) -> ScoreParams:
        return ScoreParams(
            alpha=self.alpha,
            gamma=self.gamma,
            kappa=self.kappa,
            c0=self.c0,
            max_indegree=self.max_indegree,
        )

    def fit(self, X, y=None):
        """Run the sampler on a collection of datasets.

        ``X`` may be a single ``(n, p)`` array, a sequence of such arrays
        (one per source, sample sizes may differ), or Dataset objects.
        """
        datasets = as_datasets(X)
        params = self._score_params()
        p = datasets[0].p
        iterations = self.iterations if self.iterations is not None else 20 * p * p
        if self.n_chains < 1:
            raise ValueError("n_chains must be positive")
        seeds = spawn_seeds(self.random_state, self.n_chains)
        configs = [
            ChainConfig(
                iterations=iterations,
                burn_in=self.burn_in,
                neighborhood=self.neighborhood,
                seed=seed,
                thin=self.thin,
            )
            for seed in seeds
        ]
        traces = run_ensemble(configs, datasets, params, threads=self.n_jobs)

        self.n_features_in_ = p
        self.n_datasets_ = len(datasets)
        self.traces_ = traces
        self.edge_probabilities_ = np.stack(
            [pooled_edge_inclusion(traces, k, p) for k in range(len(datasets))]
        )
        best = None
        for trace in traces:
            idx = int(np.argmax(trace.log_posts))
            if best is None or trace.log_posts[idx] > best[0]:
                best = (float(trace.log_posts[idx]), trace.orderings[idx])
        self.best_log_posterior_, self.best_ordering_ = best
        return self

    def _check_fitted(self):
        if not hasattr(self, "edge_probabilities_"):
            raise NotFittedError("call fit before using this estimator")

    def predict(self, X=None) -> list[Dag]:
        """Point-estimate graphs, one per fitted source, via edge thresholding.

        The graphs describe the training sources; ``X`` is accepted only for
        interface compatibility and must match the fitted shape if given.
        """
        self._check_fitted()
        if X is not None:
            datasets = as_datasets(X)
            if len(datasets) != self.n_datasets_ or datasets[0].p != self.n_features_in_:
                raise ValueError("X does not match the fitted sources")
        return [
            point_estimate(self.edge_probabilities_[k], self.edge_threshold)
            for k in range(self.n_datasets_)
        ]

    def score(self, X=None, y=None) -> float:
        """Highest recorded log posterior (unnormalized); larger is better."""
        self._check_fitted()
        return self.best_log_posterior_

    def ordering_recovery(self, sigma_star) -> float:
        """Mean rank correlation of the sampled orderings to a reference ordering."""
        self._check_fitted()
        from .validation import check_ordering

        sigma_star = check_ordering(sigma_star, self.n_features_in_)
        vals = [mean_rank_correlation(trace, sigma_star) for trace in self.traces_]
        return float(np.mean(vals))
