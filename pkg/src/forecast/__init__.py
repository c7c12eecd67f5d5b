"""Per-client LSTM forecasting, similarity selection and federated aggregation."""

from .lstm import (
    LSTMParams,
    DimensionMismatch,
    HEAD_MODES,
    init_params,
    lstm_forward,
    predict,
    loss_and_grad,
    mse_loss,
    numerical_gradient,
)
from .training import (
    TrainingConfig,
    LocalUpdate,
    TrainingCurve,
    DivergedTraining,
    train_local,
)
from .similarity import DEFAULT_TAU, ZeroVector, cosine_similarity, similarity_matrix, select_similar
from .metrics import ForecastReport, EmptyTestSet, evaluate, evaluate_pairs
from .federation import (
    GlobalModel,
    FederationConfig,
    FederationResult,
    RoundRecord,
    AGGREGATION_MODES,
    aggregate,
    aggregate_vectors,
    initial_model,
    run_federation,
    forecast_recursive,
)
from .checkpoint import CheckpointError, save_checkpoint, load_checkpoint

__all__ = [
    "LSTMParams",
    "DimensionMismatch",
    "HEAD_MODES",
    "init_params",
    "lstm_forward",
    "predict",
    "loss_and_grad",
    "mse_loss",
    "numerical_gradient",
    "TrainingConfig",
    "LocalUpdate",
    "TrainingCurve",
    "DivergedTraining",
    "train_local",
    "DEFAULT_TAU",
    "ZeroVector",
    "cosine_similarity",
    "similarity_matrix",
    "select_similar",
    "ForecastReport",
    "EmptyTestSet",
    "evaluate",
    "evaluate_pairs",
    "GlobalModel",
    "FederationConfig",
    "FederationResult",
    "RoundRecord",
    "AGGREGATION_MODES",
    "aggregate",
    "aggregate_vectors",
    "initial_model",
    "run_federation",
    "forecast_recursive",
    "CheckpointError",
    "save_checkpoint",
    "load_checkpoint",
]
