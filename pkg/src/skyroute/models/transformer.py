"""Weather-aware transformer for next-node prediction.

Queries are a short token sequence (current node, destination, one token per
neighbor of the current node); keys and values are the whole network's
weather state at the decision time, one token per node, built from projected
weather features plus that node's embedding. Each block runs self-attention
over the query tokens, cross-attention into the weather tokens, and a
position-wise feedforward, all pre-norm with residuals. The readout scores
each neighbor token, so predictions are structurally confined to the
adjacency list.

Inference cost is linear in both the node count (weather key/value tokens)
and the weather feature width (key/value projection).
"""

from __future__ import annotations

import numpy as np

from ..neural import Tensor, no_grad
from ..neural.layers import (
    NEG_INF,
    AttentionConfig,
    Dropout,
    Embedding,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
)
from ..skynet import Network
from .features import PAYLOAD_SCALE, Sample, _bbox_diag, normalized_coords, severity_features

_STREAM_INIT = 5

_ROLE_CURRENT, _ROLE_DEST, _ROLE_NEIGHBOR = 0, 1, 2


class _Block(Module):
    def __init__(self, cfg: AttentionConfig, ffn_dim: int, rng: np.random.Generator):
        d = cfg.d_model
        self.ln_self = LayerNorm(d)
        self.self_attn = MultiHeadAttention(cfg, rng)
        self.ln_cross = LayerNorm(d)
        self.cross_attn = MultiHeadAttention(cfg, rng)
        self.ln_ffn = LayerNorm(d)
        self.ffn_in = Linear(d, ffn_dim, rng)
        self.ffn_out = Linear(ffn_dim, d, rng)
        self.dropout = Dropout(cfg.dropout_p)

    def __call__(self, x: Tensor, memory: Tensor, self_mask: np.ndarray,
                 training: bool, rng) -> Tensor:
        h = self.ln_self(x)
        x = x + self.self_attn(h, h, h, mask=self_mask, training=training, rng=rng)
        h = self.ln_cross(x)
        x = x + self.cross_attn(h, memory, memory, training=training, rng=rng)
        h = self.ln_ffn(x)
        x = x + self.dropout(self.ffn_out(self.ffn_in(h).relu()), training=training, rng=rng)
        return x


class WeatherTransformer(Module):
    """Next-node classifier with cross-attention over per-node weather tokens."""

    kind = "transformer"

    def __init__(self, net: Network, grid: np.ndarray, interval_s: float,
                 attention: AttentionConfig | None = None,
                 n_layers: int = 2, ffn_dim: int = 256, seed: int = 0):
        self.net = net
        self.grid = np.asarray(grid, dtype=np.float64)  # (steps, nodes, w)
        self.interval_s = float(interval_s)
        self.attn_cfg = attention or AttentionConfig()
        self.n_layers = n_layers
        self.ffn_dim = ffn_dim
        self.seed = seed

        n = len(net.nodes)
        d = self.attn_cfg.d_model
        w = self.grid.shape[-1]
        self.max_deg = max(net.degree(i) for i in range(n))
        self.seq_len = 2 + self.max_deg
        self._coords = normalized_coords(net)
        self._dist_scale = 3.0 * _bbox_diag(net)
        self._roles = np.array([_ROLE_CURRENT, _ROLE_DEST] + [_ROLE_NEIGHBOR] * self.max_deg)
        self._current_slot = np.zeros((1, self.seq_len, 1))
        self._current_slot[0, 0, 0] = 1.0
        self._severity = severity_features(self.grid)  # (steps, nodes, 4)

        rng = np.random.default_rng([seed, _STREAM_INIT])
        self.node_emb = Embedding(n, d, rng)
        self.role_emb = Embedding(3, d, rng)
        self.coord_proj = Linear(2, d, rng)
        self.ctx_proj = Linear(2, d, rng)
        self.weather_proj = Linear(w, d, rng)
        self.blocks = [_Block(self.attn_cfg, ffn_dim, rng) for _ in range(n_layers)]
        self.ln_final = LayerNorm(d)
        self.score = Linear(d, 1, rng)

    def config(self) -> dict:
        return {
            "d_model": self.attn_cfg.d_model,
            "n_heads": self.attn_cfg.n_heads,
            "dropout_p": self.attn_cfg.dropout_p,
            "n_layers": self.n_layers,
            "ffn_dim": self.ffn_dim,
            "seed": self.seed,
        }

    def step_for(self, t: float) -> int:
        """Zero-order-hold weather step for a plan time, clamped to the grid."""
        return min(max(int(t // self.interval_s), 0), self.grid.shape[0] - 1)

    # -- encoding -------------------------------------------------------------

    def encode(self, samples: list[Sample]) -> dict:
        """Pack samples into dense arrays; neighbor slots are padded/masked."""
        m, t = len(samples), self.seq_len
        ids = np.zeros((m, t), dtype=np.int64)
        valid = np.zeros((m, t), dtype=bool)
        coords = np.zeros((m, t, 2))
        ctx = np.zeros((m, 2))
        steps = np.zeros(m, dtype=np.int64)
        label_slot = np.full(m, -1, dtype=np.int64)
        labels = np.zeros(m, dtype=np.int64)
        for i, s in enumerate(samples):
            nbs = self.net.neighbors(s.current_node)
            ids[i, 0], ids[i, 1] = s.current_node, s.end_node
            ids[i, 2:2 + len(nbs)] = nbs
            valid[i, :2 + len(nbs)] = True
            coords[i, 0] = self._coords[s.current_node]
            coords[i, 1] = self._coords[s.end_node]
            coords[i, 2:2 + len(nbs)] = self._coords[nbs]
            ctx[i] = (s.payload / PAYLOAD_SCALE, s.total_distance / self._dist_scale)
            steps[i] = self.step_for(s.t)
            labels[i] = s.label
            if s.label in nbs:
                label_slot[i] = nbs.index(s.label)
        return {
            "ids": ids, "valid": valid, "coords": coords, "ctx": ctx,
            "steps": steps, "label_slot": label_slot, "labels": labels,
        }

    # -- forward ---------------------------------------------------------------

    def logits(self, batch: dict, idx: np.ndarray, training: bool = False,
               rng: np.random.Generator | None = None) -> tuple[Tensor, np.ndarray]:
        ids = batch["ids"][idx]
        valid = batch["valid"][idx]
        x = self.node_emb(ids) + self.role_emb(self._roles) \
            + self.coord_proj(Tensor(batch["coords"][idx]))
        ctx = self.ctx_proj(Tensor(batch["ctx"][idx]))
        x = x + ctx.reshape(ctx.shape[0], 1, ctx.shape[1]) * Tensor(self._current_slot)

        kv = Tensor(self.grid[batch["steps"][idx]])            # (B, n, w)
        memory = self.weather_proj(kv) + self.node_emb.weight  # weather-enhanced KV tokens

        self_mask = np.broadcast_to(valid[:, None, :], (valid.shape[0], self.seq_len, self.seq_len))
        for block in self.blocks:
            x = block(x, memory, self_mask, training, rng)
        h = self.ln_final(x)
        scores = self.score(h).reshape(h.shape[0], self.seq_len)[:, 2:]
        pad = np.where(valid[:, 2:], 0.0, NEG_INF)
        return scores + Tensor(pad), batch["label_slot"][idx]

    def class_severity(self, batch: dict, idx: np.ndarray) -> np.ndarray:
        """(B, max_deg, 4) severity of each candidate neighbor's weather."""
        ids = batch["ids"][idx][:, 2:]
        steps = batch["steps"][idx]
        sev = self._severity[steps[:, None], ids].copy()
        sev[~batch["valid"][idx][:, 2:]] = 0.0
        return sev

    # -- prediction ----------------------------------------------------------------

    def predict_proba(self, sample: Sample) -> tuple[list[int], np.ndarray]:
        with no_grad():
            batch = self.encode([sample])
            z, _ = self.logits(batch, np.array([0]))
            nbs = self.net.neighbors(sample.current_node)
            raw = z.data[0, :len(nbs)]
            e = np.exp(raw - raw.max())
            return nbs, e / e.sum()
