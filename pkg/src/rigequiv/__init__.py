"""Random intersection graphs G(n,m,p) against G(n,p): samplers, couplings, exact oracles."""

from .graph_core import FeatureAssignment, KUniformHypergraph, LabeledGraph, PartiteHypergraph, project_to_graph
from .harness import ExperimentConfig, ExperimentReport, emit_report, render_report, run_experiment
from .samplers import RngStream, sample_er, sample_rig_graph, sample_rig_stratified
from .thresholds import ModelParams, coupling_amplifier_a, edge_prob_hat, p_bounds, q_k
from .tv_oracle import er_exact_pmf, rig_exact_pmf, tv_exact

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureAssignment",
    "KUniformHypergraph",
    "LabeledGraph",
    "ModelParams",
    "PartiteHypergraph",
    "RngStream",
    "coupling_amplifier_a",
    "edge_prob_hat",
    "emit_report",
    "er_exact_pmf",
    "p_bounds",
    "project_to_graph",
    "q_k",
    "render_report",
    "rig_exact_pmf",
    "run_experiment",
    "sample_er",
    "sample_rig_graph",
    "sample_rig_stratified",
    "tv_exact",
]

__version__ = "0.1.0"
