"""AdamW with decoupled weight decay, global-norm clipping, warmup-cosine factor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteGradient
from .tensor import Tensor


@dataclass(frozen=True)
class OptimConfig:
    lr: float = 0.0005
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 1.0

    def __post_init__(self):
        if self.lr <= 0 or self.eps <= 0 or self.clip_norm <= 0:
            raise ValueError("lr, eps and clip_norm must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass(frozen=True)
class ScheduleConfig:
    warmup_steps: int = 100
    total_steps: int = 1000

    def __post_init__(self):
        if not (0 < self.warmup_steps < self.total_steps):
            raise ValueError("need 0 < warmup_steps < total_steps")


def lr_factor(step: int, sched: ScheduleConfig) -> float:
    """Learning-rate multiplier in [0, 1]: linear warmup then half-cosine decay."""
    if step < 0 or step > sched.total_steps:
        raise ValueError(f"step {step} outside [0, {sched.total_steps}]")
    if step < sched.warmup_steps:
        return float(step) / float(max(1, sched.warmup_steps))
    return 0.5 * (1.0 + math.cos(
        math.pi * (step - sched.warmup_steps) / (sched.total_steps - sched.warmup_steps)
    ))


def clip_grad_norm(grads: list[np.ndarray], max_norm: float) -> float:
    """Scale all grads in place so the global L2 norm is <= max_norm.

    Returns the scale that was applied (1.0 when already within bounds).
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = math.sqrt(total)
    if norm <= max_norm or norm == 0.0:
        return 1.0
    scale = max_norm / norm
    for g in grads:
        g *= scale
    return scale


class AdamW:
    """Decoupled-weight-decay Adam over a named parameter dict.

    Decay is applied directly to the parameter (p -= lr*wd*p), separate from
    the bias-corrected moment update. Parameters iterate in sorted-name order
    so runs are bitwise reproducible.
    """

    def __init__(self, params: dict[str, Tensor], cfg: OptimConfig):
        self.cfg = cfg
        self.params = dict(sorted(params.items()))
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.t = 0

    def step(self, lr_scale: float = 1.0) -> None:
        cfg = self.cfg
        for name, p in self.params.items():
            g = p.grad
            if g is not None and not np.all(np.isfinite(g)):
                raise NonFiniteGradient(f"non-finite gradient in parameter '{name}'")
        self.t += 1
        lr = cfg.lr * lr_scale
        bc1 = 1.0 - cfg.beta1 ** self.t
        bc2 = 1.0 - cfg.beta2 ** self.t
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if cfg.weight_decay != 0.0:
                p.data -= lr * cfg.weight_decay * p.data
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * (g * g)
            m_hat = m / bc1
            v_hat = v / bc2
            p.data -= lr * m_hat / (np.sqrt(v_hat) + cfg.eps)

    def clip_and_step(self, lr_scale: float = 1.0) -> float:
        """Clip the global grad norm to cfg.clip_norm, then step; returns the clip scale."""
        grads = [p.grad for p in self.params.values() if p.grad is not None]
        scale = clip_grad_norm(grads, self.cfg.clip_norm)
        self.step(lr_scale=lr_scale)
        return scale
