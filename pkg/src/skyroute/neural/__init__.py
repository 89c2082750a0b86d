"""Neural substrate: tensors with reverse-mode gradients, layers, attention,
losses, AdamW, and the warmup-cosine schedule."""

from .tensor import Tensor, embedding, no_grad, xavier_uniform
from .layers import (
    AttentionConfig,
    Dropout,
    Embedding,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
    attention,
)
from .losses import LossConfig, cross_entropy, weather_penalty_loss
from .optim import AdamW, OptimConfig, ScheduleConfig, clip_grad_norm, lr_factor

__all__ = [
    "AdamW",
    "AttentionConfig",
    "Dropout",
    "Embedding",
    "LayerNorm",
    "Linear",
    "LossConfig",
    "Module",
    "MultiHeadAttention",
    "OptimConfig",
    "ScheduleConfig",
    "Tensor",
    "attention",
    "clip_grad_norm",
    "cross_entropy",
    "embedding",
    "lr_factor",
    "no_grad",
    "weather_penalty_loss",
    "xavier_uniform",
]
