"""Joint Bayesian structure learning of multiple Gaussian DAG models.

Datasets from heterogeneous sources are assumed to share one causal
ordering while their graphs may differ.  The package scores orderings with
a decomposable Gaussian score (one MAP graph per source, selected by
forward-backward search), samples orderings with a Metropolis-Hastings
random-to-random proposal neighborhood, and ships exhaustive small-scale
oracles for the combinatorial identifiability claims the approach rests on.
"""

from .analysis import (
    average_hamming,
    edge_inclusion,
    gelman_rubin,
    gelman_rubin_summary,
    mean_rank_correlation,
    pairwise_rank_correlation,
    point_estimate,
    pooled_edge_inclusion,
    tpr_fdr,
)
from .dag import Dag, WeightedDag
from .errors import DegenerateVariance, JodagError, OracleLimitError, SingularDesign
from .estimator import JointDagEstimator
from .oracle import (
    Covariance,
    EquivalenceClass,
    equivalence_class,
    joint_argmax,
    linear_extensions,
    markov_equivalent,
    order_forcing_edges,
    population_covariance,
    population_minimal_imap,
    sparsest_permutation_score,
)
from .ordering import Ordering, kendall_tau, r2r_move, r2r_neighborhood
from .sampler import (
    ChainConfig,
    ChainTrace,
    JointMapPosterior,
    TablePosterior,
    equalized_iterations,
    mh_step,
    run_chain,
    run_ensemble,
)
from .scoring import (
    Dataset,
    ScoreParams,
    graph_score,
    log_bayes_factor,
    log_posterior,
    node_score,
    residual_variance,
)
from .selection import exhaustive_map, forward_backward
from .synth import (
    common_private_collection,
    random_ordered_dag,
    sample_weights,
    similar_orderings,
    simulate,
    unfaithful_scm,
)

__version__ = "0.1.0"

__all__ = [
    "Dag",
    "WeightedDag",
    "Ordering",
    "Dataset",
    "ScoreParams",
    "ChainConfig",
    "ChainTrace",
    "Covariance",
    "EquivalenceClass",
    "JointDagEstimator",
    "JointMapPosterior",
    "TablePosterior",
    "JodagError",
    "SingularDesign",
    "DegenerateVariance",
    "OracleLimitError",
    "kendall_tau",
    "r2r_move",
    "r2r_neighborhood",
    "markov_equivalent",
    "equivalence_class",
    "linear_extensions",
    "order_forcing_edges",
    "population_covariance",
    "population_minimal_imap",
    "sparsest_permutation_score",
    "joint_argmax",
    "residual_variance",
    "node_score",
    "graph_score",
    "log_posterior",
    "log_bayes_factor",
    "forward_backward",
    "exhaustive_map",
    "mh_step",
    "run_chain",
    "run_ensemble",
    "equalized_iterations",
    "random_ordered_dag",
    "sample_weights",
    "simulate",
    "common_private_collection",
    "similar_orderings",
    "unfaithful_scm",
    "edge_inclusion",
    "pooled_edge_inclusion",
    "average_hamming",
    "mean_rank_correlation",
    "tpr_fdr",
    "point_estimate",
    "gelman_rubin",
    "gelman_rubin_summary",
    "pairwise_rank_correlation",
]
