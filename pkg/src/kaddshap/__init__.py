"""Model-agnostic Shapley-value explanations.

Exact attributions by power-set enumeration, the kernel-weighted sampling
estimator, and a k-additive estimator built on the Choquet-integral view of
games, which additionally yields pairwise and higher-order interaction
indices.
"""

from ._version import __version__
from .coalitions import Coalition, PowerSetOrder, binomial, enumerate_powerset
from .choquet import choquet_2add_eval, choquet_eval
from .exceptions import (
    BudgetError,
    FitError,
    FrameError,
    HandshakeError,
    IngestionError,
    ModelTransportError,
    NumericInputError,
    PredictionCountError,
    SizeLimitError,
    TransportTimeout,
    UnsupportedRepresentationError,
)
from .explainers import (
    BackgroundSet,
    BlackBoxModel,
    CoalitionSample,
    ExactShapExplainer,
    ExplanationResult,
    FunctionModel,
    KAdditiveShapExplainer,
    KernelShapExplainer,
    ValueFunctionEstimate,
    build_value_function,
    expected_prediction,
    explain_exact,
    explain_kadd,
    explain_kernel_shap,
    full_powerset_sample,
    kernel_weight,
    precompute_solver,
    sample_coalitions,
)
from .games import (
    Game,
    InteractionVector,
    TransformMatrix,
    bernoulli_numbers,
    build_transform_matrix,
    gamma_coefficient,
    game_to_interactions,
    interaction_general,
    interaction_pair,
    interactions_to_game,
    is_k_additive,
    shapley_exact,
)
from .datasets import Dataset, load_csv_dataset
from .experiments import (
    ConvergenceReport,
    ExperimentConfig,
    convergence_experiment,
    emit_reports,
    nearest_rank_percentile,
    squared_error,
)
from .models import (
    LinearModel,
    RemoteModelClient,
    SyntheticInteractionModel,
    serve_check,
)
from .wls import WlsProblem, WlsSolution, solve_weighted_ls, weighted_pseudoinverse

__all__ = [
    "__version__",
    "BackgroundSet",
    "BlackBoxModel",
    "BudgetError",
    "Coalition",
    "CoalitionSample",
    "ConvergenceReport",
    "Dataset",
    "ExactShapExplainer",
    "ExperimentConfig",
    "ExplanationResult",
    "FitError",
    "FrameError",
    "FunctionModel",
    "Game",
    "HandshakeError",
    "IngestionError",
    "InteractionVector",
    "KAdditiveShapExplainer",
    "KernelShapExplainer",
    "LinearModel",
    "ModelTransportError",
    "NumericInputError",
    "PowerSetOrder",
    "PredictionCountError",
    "RemoteModelClient",
    "SizeLimitError",
    "SyntheticInteractionModel",
    "TransformMatrix",
    "TransportTimeout",
    "UnsupportedRepresentationError",
    "ValueFunctionEstimate",
    "WlsProblem",
    "WlsSolution",
    "bernoulli_numbers",
    "binomial",
    "build_transform_matrix",
    "build_value_function",
    "choquet_2add_eval",
    "choquet_eval",
    "convergence_experiment",
    "emit_reports",
    "enumerate_powerset",
    "expected_prediction",
    "explain_exact",
    "explain_kadd",
    "explain_kernel_shap",
    "full_powerset_sample",
    "gamma_coefficient",
    "game_to_interactions",
    "interaction_general",
    "interaction_pair",
    "interactions_to_game",
    "is_k_additive",
    "kernel_weight",
    "load_csv_dataset",
    "nearest_rank_percentile",
    "precompute_solver",
    "sample_coalitions",
    "serve_check",
    "shapley_exact",
    "solve_weighted_ls",
    "squared_error",
    "weighted_pseudoinverse",
]
