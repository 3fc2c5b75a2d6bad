"""Probabilistic MIVES scoring of design scenarios over a weighted hierarchy."""

from .ahp import consistency_ratio, group_weights, pairwise_from_ratings, principal_weights
from .hierarchy import DecisionTree, Paradigm, derive_circularity_tree, load_tree, validate_tree
from .sampler import SamplerConfig, build_weight_matrix
from .simulation import SimulationResult, mean_values, run_simulation
from .stats import compute_statistics, rank_probabilities
from .value_functions import ValueFunctionSpec, evaluate, load_value_table, normalization_factor

__version__ = "0.1.0"

__all__ = [
    "DecisionTree",
    "Paradigm",
    "SamplerConfig",
    "SimulationResult",
    "ValueFunctionSpec",
    "build_weight_matrix",
    "compute_statistics",
    "consistency_ratio",
    "derive_circularity_tree",
    "evaluate",
    "group_weights",
    "load_tree",
    "load_value_table",
    "mean_values",
    "normalization_factor",
    "pairwise_from_ratings",
    "principal_weights",
    "rank_probabilities",
    "run_simulation",
    "validate_tree",
]
