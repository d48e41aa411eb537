"""Game-theoretic group explainers for ML models.

Cooperative-game values with coalition structure (Shapley, Banzhaf, Owen,
Banzhaf-Owen, two-step Shapley, symmetric Banzhaf, recursive tree values),
empirical marginal / analytic conditional games built from data and a model,
MIC-based predictor clustering, and stability / energy diagnostics.
"""

from ._backend import backend_name
from .games import (Game, GameError, Partition, center, full_mask, mask_of,
                    members, modified_quotient_game, project, quotient_game,
                    restrict_to_carrier, tsh_intermediate_game)
from .values import (AxiomReport, WeightedValueSpec, axiom_check, banzhaf,
                     canonical_coeffs, extend_centered, shapley, weighted_value)
from .coalitions import (CoalitionalResult, CoalitionalValueSpec, banzhaf_owen,
                         coalitional_value, evaluate_with_blocks, owen,
                         quotient_property_check, symmetric_banzhaf,
                         two_step_evaluate, two_step_shapley)
from .tree import (PartitionTree, RecursiveValues, TreeCutExplanations,
                   recursive_values, tree_group_explanations)
from .mic import MicConfig, discrete_mutual_information, mic_e
from .clustering import (DissimilarityMatrix, average_linkage_cluster,
                         cluster_features, dissimilarity_matrix)
from .models import (AnalyticModel, OracleProtocolError, SubprocessModel,
                     parse_analytic_model)
from .synthetic import (DiscreteFamily, GaussianFamily, QuadraticModel,
                        generate_mic_test, generate_pedagogical,
                        pedagogical_true_model)
from .explain import (Dataset, ExplanationMatrix, analytic_conditional_game,
                      empirical_marginal_game, explain)
from .diagnostics import (StabilityReport, product_model_energy_ratio,
                          rectangle_blowup_curve, stability_report,
                          two_point_witness)

__all__ = [
    "AnalyticModel", "AxiomReport", "CoalitionalResult", "CoalitionalValueSpec",
    "Dataset", "DiscreteFamily", "DissimilarityMatrix", "ExplanationMatrix",
    "Game", "GameError", "GaussianFamily", "MicConfig", "OracleProtocolError",
    "Partition", "PartitionTree", "QuadraticModel", "RecursiveValues",
    "StabilityReport", "SubprocessModel", "TreeCutExplanations",
    "WeightedValueSpec", "analytic_conditional_game", "average_linkage_cluster",
    "axiom_check", "backend_name", "banzhaf", "banzhaf_owen",
    "canonical_coeffs", "center", "cluster_features", "coalitional_value",
    "discrete_mutual_information", "dissimilarity_matrix",
    "empirical_marginal_game", "evaluate_with_blocks", "explain",
    "extend_centered", "full_mask", "generate_mic_test",
    "generate_pedagogical", "mask_of", "members", "mic_e",
    "modified_quotient_game", "owen", "parse_analytic_model",
    "pedagogical_true_model", "product_model_energy_ratio", "project",
    "quotient_game", "quotient_property_check", "recursive_values",
    "rectangle_blowup_curve", "restrict_to_carrier", "shapley",
    "stability_report", "symmetric_banzhaf", "tree_group_explanations",
    "tsh_intermediate_game", "two_point_witness", "two_step_evaluate",
    "two_step_shapley", "weighted_value",
]

__version__ = "0.1.0"
