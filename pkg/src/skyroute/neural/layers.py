"""Layers and the multi-head attention core.

Attention follows softmax(QK^T/sqrt(d_head))V per head with the heads
concatenated afterwards; the learned input/output projections live in
MultiHeadAttention, the functional core is projection-free so its
closed-form examples hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor, embedding, xavier_uniform

NEG_INF = -1e9


@dataclass(frozen=True)
class AttentionConfig:
    d_model: int = 128
    n_heads: int = 4
    dropout_p: float = 0.1

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")


class Module:
    """Parameter container; submodules and parameters discovered by attribute scan."""

    def parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                out[name] = value
            elif isinstance(value, Module):
                for sub, p in value.parameters().items():
                    out[f"{name}.{sub}"] = p
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        for sub, p in item.parameters().items():
                            out[f"{name}.{i}.{sub}"] = p
        return out

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.grad = None


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Tensor(xavier_uniform(rng, in_dim, out_dim, (in_dim, out_dim)), requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x @ self.weight
        if self.bias is not None:
            y = y + self.bias
        return y


class Embedding(Module):
    def __init__(self, num: int, dim: int, rng: np.random.Generator):
        self.weight = Tensor(xavier_uniform(rng, num, dim, (num, dim)), requires_grad=True)

    def __call__(self, ids: np.ndarray) -> Tensor:
        return embedding(self.weight, ids)


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gamma = Tensor(np.ones(dim), requires_grad=True)
        self.beta = Tensor(np.zeros(dim), requires_grad=True)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        inv = (var + self.eps) ** -0.5
        return centered * inv * self.gamma + self.beta


class Dropout(Module):
    def __init__(self, p: float):
        if not (0.0 <= p < 1.0):
            raise ValueError("dropout p must be in [0, 1)")
        self.p = p

    def __call__(self, x: Tensor, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        if not training or self.p == 0.0:
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs an rng for determinism")
        mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * Tensor(mask)


def attention(q: Tensor, k: Tensor, v: Tensor, n_heads: int, mask: np.ndarray | None = None,
              return_weights: bool = False):
    """Multi-head scaled dot-product attention (no learned projections).

    q: (..., Tq, d); k, v: (..., Tk, d); d divisible by n_heads; scaling uses
    the per-head dimension. `mask` is boolean, broadcastable to
    (..., Tq, Tk), True where attending is allowed.
    """
    if q.shape[-1] != k.shape[-1] or k.shape[:-1] != v.shape[:-1]:
        raise ShapeMismatch(f"attention shapes disagree: q{q.shape} k{k.shape} v{v.shape}")
    d = q.shape[-1]
    if d % n_heads != 0:
        raise ShapeMismatch(f"model dim {d} not divisible by {n_heads} heads")
    d_head = d // n_heads
    tq, tk = q.shape[-2], k.shape[-2]
    batch = q.shape[:-2]

    def split(t: Tensor, tlen: int) -> Tensor:
        # (..., T, d) -> (..., H, T, d_head)
        t = t.reshape(batch + (tlen, n_heads, d_head))
        axes = tuple(range(len(batch))) + (len(batch) + 1, len(batch), len(batch) + 2)
        return t.transpose(axes)

    qh, kh, vh = split(q, tq), split(k, tk), split(v, tk)
    kt_axes = tuple(range(len(batch) + 1)) + (len(batch) + 2, len(batch) + 1)
    scores = (qh @ kh.transpose(kt_axes)) * (1.0 / np.sqrt(d_head))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        additive = np.where(np.expand_dims(mask, -3), 0.0, NEG_INF)  # head axis
        scores = scores + Tensor(additive)
    weights = scores.softmax(axis=-1)
    out = weights @ vh  # (..., H, Tq, d_head)
    merge_axes = tuple(range(len(batch))) + (len(batch) + 1, len(batch), len(batch) + 2)
    out = out.transpose(merge_axes).reshape(batch + (tq, d))
    if return_weights:
        return out, weights
    return out


class MultiHeadAttention(Module):
    """Learned projections around the attention core, with attention dropout."""

    def __init__(self, cfg: AttentionConfig, rng: np.random.Generator):
        d = cfg.d_model
        self.cfg = cfg
        self.w_q = Linear(d, d, rng)
        self.w_k = Linear(d, d, rng)
        self.w_v = Linear(d, d, rng)
        self.w_o = Linear(d, d, rng)
        self.dropout = Dropout(cfg.dropout_p)

    def __call__(self, q_in: Tensor, k_in: Tensor, v_in: Tensor, mask: np.ndarray | None = None,
                 training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        out = attention(self.w_q(q_in), self.w_k(k_in), self.w_v(v_in), self.cfg.n_heads, mask=mask)
        out = self.dropout(out, training=training, rng=rng)
        return self.w_o(out)
