"""Model construction and the training loop.

Batches are shuffled per epoch from a seeded stream; the learning rate is
base_lr * warmup-cosine factor at each global step; gradients are clipped to
the configured global norm before every optimizer step. Two runs with the
same seeds produce bitwise-identical parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import Diverged
from ..neural import (
    LossConfig,
    OptimConfig,
    ScheduleConfig,
    AdamW,
    lr_factor,
    no_grad,
    weather_penalty_loss,
)
from ..neural.layers import AttentionConfig
from ..skynet import Network
from ..weathersim import WeatherSeries
from .baselines import FfnnModel, GreedyBaseline, KnnModel
from .features import Sample, split_by_request, weather_feature_grid
from .transformer import WeatherTransformer

_STREAM_SHUFFLE = 6
_STREAM_DROPOUT = 7

MODEL_KINDS = ("greedy", "knn", "ffnn", "transformer")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "transformer"
    hidden: tuple[int, int] = (128, 64)   # ffnn
    d_model: int = 128                    # transformer
    n_heads: int = 4
    dropout_p: float = 0.1
    n_layers: int = 2
    ffn_dim: int = 256
    knn_k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    epochs: int = 30
    optim: OptimConfig = field(default_factory=OptimConfig)
    warmup_steps: int = 100
    loss: LossConfig = field(default_factory=LossConfig)
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0


@dataclass
class TrainResult:
    model: object
    curves: list[dict]
    splits: dict[str, list[Sample]]


def build_model(cfg: ModelConfig, net: Network, wx: WeatherSeries | None = None):
    if cfg.kind == "greedy":
        return GreedyBaseline(net)
    if cfg.kind == "knn":
        return KnnModel(net, k=cfg.knn_k)
    if cfg.kind == "ffnn":
        return FfnnModel(net, hidden=cfg.hidden, seed=cfg.seed)
    if wx is None:
        raise ValueError("transformer needs a weather series")
    attn = AttentionConfig(d_model=cfg.d_model, n_heads=cfg.n_heads, dropout_p=cfg.dropout_p)
    return WeatherTransformer(net, weather_feature_grid(wx), wx.interval_s,
                              attention=attn, n_layers=cfg.n_layers,
                              ffn_dim=cfg.ffn_dim, seed=cfg.seed)


def _eval_batched(model, data: dict, loss_cfg: LossConfig, batch_size: int = 512):
    """Mean loss and accuracy over an encoded dataset, without a tape."""
    m = data["labels"].shape[0]
    total_loss, correct = 0.0, 0
    with no_grad():
        for start in range(0, m, batch_size):
            idx = np.arange(start, min(start + batch_size, m))
            logits, targets = model.logits(data, idx)
            sev = _severity_for(model, data, idx, loss_cfg)
            loss = weather_penalty_loss(logits, targets, sev, loss_cfg)
            total_loss += loss.item() * idx.shape[0]
            correct += int((logits.data.argmax(axis=1) == targets).sum())
    return total_loss / m, correct / m


def _severity_for(model, data: dict, idx: np.ndarray, loss_cfg: LossConfig):
    if loss_cfg.penalty_weight == 0.0:
        return None
    if not hasattr(model, "class_severity"):
        raise ValueError(f"{model.kind} model has no severity features for the weather penalty")
    return model.class_severity(data, idx)


def train(model_cfg: ModelConfig, train_cfg: TrainConfig, samples: list[Sample],
          net: Network, wx: WeatherSeries | None = None) -> TrainResult:
    """Split, build, and fit a model; returns it with per-epoch curves.

    Greedy needs no fitting and KNN just memorizes the training split; both
    return empty curves. Raises Diverged if the training loss goes non-finite.
    """
    if len({s.label for s in samples}) < 2:
        raise ValueError("need at least 2 label classes to train")
    splits = split_by_request(samples, train_cfg.split, train_cfg.seed)
    model = build_model(model_cfg, net, wx)

    if model_cfg.kind == "greedy":
        return TrainResult(model, [], splits)
    if model_cfg.kind == "knn":
        model.fit(splits["train"])
        return TrainResult(model, [], splits)

    train_data = model.encode(splits["train"])
    val_data = model.encode(splits["val"]) if splits["val"] else None
    m = len(splits["train"])
    steps_per_epoch = max(1, math.ceil(m / train_cfg.batch_size))
    total_steps = steps_per_epoch * train_cfg.epochs
    warmup = min(train_cfg.warmup_steps, max(1, total_steps // 2))
    sched = ScheduleConfig(warmup_steps=warmup, total_steps=total_steps) if total_steps > 1 else None

    optimizer = AdamW(model.parameters(), train_cfg.optim)
    shuffle_rng = np.random.default_rng([train_cfg.seed, _STREAM_SHUFFLE])
    dropout_rng = np.random.default_rng([train_cfg.seed, _STREAM_DROPOUT])

    curves: list[dict] = []
    step = 0
    for epoch in range(train_cfg.epochs):
        order = shuffle_rng.permutation(m)
        epoch_loss = 0.0
        for start in range(0, m, train_cfg.batch_size):
            idx = order[start:start + train_cfg.batch_size]
            model.zero_grad()
            logits, targets = model.logits(train_data, idx, training=True, rng=dropout_rng)
            sev = _severity_for(model, train_data, idx, train_cfg.loss)
            loss = weather_penalty_loss(logits, targets, sev, train_cfg.loss)
            value = loss.item()
            if not math.isfinite(value):
                raise Diverged(f"training loss became {value} at step {step}")
            epoch_loss += value * idx.shape[0]
            loss.backward()
            scale = lr_factor(step, sched) if sched else 1.0
            optimizer.clip_and_step(lr_scale=scale)
            step += 1
        row = {"epoch": epoch + 1, "train_loss": epoch_loss / m}
        if val_data is not None:
            val_loss, val_acc = _eval_batched(model, val_data, train_cfg.loss)
            row["val_loss"] = val_loss
            row["val_accuracy"] = val_acc
        curves.append(row)
    return TrainResult(model, curves, splits)
