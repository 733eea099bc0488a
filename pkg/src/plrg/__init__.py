"""Simulation and verification tools for power-law random graphs with
threshold edges ``X_i X_j > a_n``."""

__version__ = "0.1.0"

from .dist import (
    Regime, TailModel, WeightedSample, classify_regime, critical_scale, product_tail, sample_iid,
    scaling_a_n, tail_model_generic, tail_model_pareto,
)
from .errors import (
    EmptySampleError, InvalidParameterError, NumericError, PLRGError, RangeError, RegionError, SizeError,
)
from .hardgraph import (
    HardGraph, KVector, assemble_from_kvector, brute_force_graph, build_hard_graph, edge_count, k_vector,
)
from .graphex import GraphexGraph, nested_subgraph, sample_graphex
from .stats import EstimateReport, MotifEvent, motif_asymptote, motif_mc
from .graphon import GraphonGrid, cut_norm_exact, cut_norm_heuristic, empirical_graphon, rescale_l1, stretch
from .height import fluctuation_summary, sample_conditioned, theta_n
from .bernoulli import BernoulliGraph, build_bernoulli_graph

__all__ = [
    "BernoulliGraph", "EmptySampleError", "EstimateReport", "GraphexGraph", "GraphonGrid", "HardGraph",
    "InvalidParameterError", "KVector", "MotifEvent", "NumericError", "PLRGError", "RangeError", "Regime",
    "RegionError", "SizeError", "TailModel", "WeightedSample", "assemble_from_kvector", "brute_force_graph",
    "build_bernoulli_graph", "build_hard_graph", "classify_regime", "critical_scale", "cut_norm_exact",
    "cut_norm_heuristic", "edge_count", "empirical_graphon", "fluctuation_summary", "k_vector",
    "motif_asymptote", "motif_mc", "nested_subgraph", "product_tail", "rescale_l1", "sample_conditioned",
    "sample_graphex", "sample_iid", "scaling_a_n", "stretch", "tail_model_generic", "tail_model_pareto",
    "theta_n",
]
