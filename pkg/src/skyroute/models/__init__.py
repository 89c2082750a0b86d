"""Feature encoding, baselines, the weather-aware transformer, training,
evaluation, and rollout."""

from .baselines import FfnnModel, GreedyBaseline, KnnModel
from .checkpoint import load_model, model_from_doc, model_to_bytes, save_model
from .evaluation import AStarOracle, EvalReport, RolloutResult, evaluate, predict_next, rollout
from .features import (
    BlindEncoder,
    Sample,
    encode_dataset,
    normalized_coords,
    severity_features,
    split_by_request,
    weather_feature_grid,
)
from .training import MODEL_KINDS, ModelConfig, TrainConfig, TrainResult, build_model, train
from .transformer import WeatherTransformer

__all__ = [
    "AStarOracle",
    "BlindEncoder",
    "EvalReport",
    "FfnnModel",
    "GreedyBaseline",
    "KnnModel",
    "MODEL_KINDS",
    "ModelConfig",
    "RolloutResult",
    "Sample",
    "TrainConfig",
    "TrainResult",
    "WeatherTransformer",
    "build_model",
    "encode_dataset",
    "evaluate",
    "load_model",
    "model_from_doc",
    "model_to_bytes",
    "normalized_coords",
    "predict_next",
    "rollout",
    "save_model",
    "severity_features",
    "split_by_request",
    "train",
    "weather_feature_grid",
]
