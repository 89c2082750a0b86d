"""Cross-entropy with an optional differentiable weather penalty.

The penalty is the softmax expectation of per-class weather severity:
lambda * mean_b sum_c p(c) * (severity(c) . weights). With lambda = 0 the
loss is plain cross-entropy, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor


@dataclass(frozen=True)
class LossConfig:
    penalty_weight: float = 0.0           # lambda
    weather_weights: tuple[float, ...] = ()  # w_i, one per severity feature

    def __post_init__(self):
        if self.penalty_weight < 0:
            raise ValueError("penalty_weight must be >= 0")
        if any(not np.isfinite(w) or w < 0 for w in self.weather_weights):
            raise ValueError("weather_weights must be finite and non-negative")


def cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean negative log-likelihood; targets are class indices (B,)."""
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or targets.ndim != 1 or targets.shape[0] != logits.shape[0]:
        raise ShapeMismatch(f"cross_entropy shapes: logits {logits.shape}, targets {targets.shape}")
    onehot = np.zeros(logits.shape)
    onehot[np.arange(targets.shape[0]), targets] = 1.0
    log_p = logits.log_softmax(axis=-1)
    return -(log_p * Tensor(onehot)).sum() / logits.shape[0]


def weather_penalty_loss(logits: Tensor, targets: np.ndarray,
                         severity: np.ndarray | None, cfg: LossConfig) -> Tensor:
    """Cross-entropy plus the softmax-expected weather severity of the chosen class.

    severity has shape (B, C, K): per candidate class, K weather-severity
    features; cfg.weather_weights has length K.
    """
    ce = cross_entropy(logits, targets)
    if cfg.penalty_weight == 0.0:
        return ce
    if severity is None:
        raise ValueError("penalty_weight > 0 requires a severity array")
    severity = np.asarray(severity, dtype=np.float64)
    w = np.asarray(cfg.weather_weights, dtype=np.float64)
    if severity.ndim != 3 or severity.shape[:2] != tuple(logits.shape) or severity.shape[2] != w.shape[0]:
        raise ShapeMismatch(
            f"severity shape {severity.shape} incompatible with logits {logits.shape} "
            f"and {w.shape[0]} weights"
        )
    class_sev = severity @ w  # (B, C)
    probs = logits.softmax(axis=-1)
    expected = (probs * Tensor(class_sev)).sum() / logits.shape[0]
    return ce + cfg.penalty_weight * expected
