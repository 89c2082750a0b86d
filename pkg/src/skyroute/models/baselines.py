"""Next-node baselines: greedy geometric, KNN, and the feedforward network.

All predictors share one contract: `predict_proba(sample)` returns the sorted
neighbor ids of the sample's current node and a probability vector over them
(non-neighbors implicitly carry zero mass).
"""

from __future__ import annotations

import numpy as np

from ..neural import Tensor, no_grad
from ..neural.layers import NEG_INF, Linear, Module
from ..skynet import Network, euclidean
from .features import BlindEncoder, Sample, severity_features

_STREAM_INIT = 5


class GreedyBaseline:
    """Pick the neighbor closest (straight-line) to the destination."""

    kind = "greedy"

    def __init__(self, net: Network):
        self.net = net

    def predict_proba(self, sample: Sample) -> tuple[list[int], np.ndarray]:
        nbs = self.net.neighbors(sample.current_node)
        goal = self.net.node(sample.end_node)
        dists = [euclidean(self.net.node(v), goal) for v in nbs]
        probs = np.zeros(len(nbs))
        probs[int(np.argmin(dists))] = 1.0
        return nbs, probs


class KnnModel:
    """Brute-force k-nearest-neighbors vote in the weather-blind feature space.

    Ties in distance resolve by training index; votes landing outside the
    current node's adjacency are discarded (uniform fallback when none land).
    """

    kind = "knn"

    def __init__(self, net: Network, k: int = 5):
        self.net = net
        self.k = k
        self.encoder = BlindEncoder(net)
        self._x: np.ndarray | None = None
        self._y: np.ndarray | None = None

    def fit(self, samples: list[Sample]) -> None:
        self._x = self.encoder.encode(samples)
        self._y = np.array([s.label for s in samples], dtype=np.int64)

    def predict_proba(self, sample: Sample) -> tuple[list[int], np.ndarray]:
        if self._x is None:
            raise RuntimeError("KnnModel.predict_proba called before fit()")
        q = self.encoder.encode([sample])[0]
        d2 = np.einsum("ij,ij->i", self._x - q, self._x - q)
        k = min(self.k, d2.shape[0])
        idx = np.lexsort((np.arange(d2.shape[0]), d2))[:k]
        nbs = self.net.neighbors(sample.current_node)
        pos = {v: i for i, v in enumerate(nbs)}
        votes = np.zeros(len(nbs))
        for i in idx:
            p = pos.get(int(self._y[i]))
            if p is not None:
                votes[p] += 1.0
        if votes.sum() == 0:
            votes[:] = 1.0
        return nbs, votes / votes.sum()


class FfnnModel(Module):
    """Two hidden layers with ReLU; logits over all nodes, masked to neighbors."""

    kind = "ffnn"

    def __init__(self, net: Network, hidden: tuple[int, int] = (128, 64), seed: int = 0):
        self.net = net
        self.hidden = tuple(hidden)
        self.seed = seed
        self.encoder = BlindEncoder(net)
        rng = np.random.default_rng([seed, _STREAM_INIT])
        n = len(net.nodes)
        self.fc1 = Linear(self.encoder.dim, hidden[0], rng)
        self.fc2 = Linear(hidden[0], hidden[1], rng)
        self.out = Linear(hidden[1], n, rng)
        self._adj_mask = np.full((n, n), NEG_INF)
        for u in range(n):
            self._adj_mask[u, net.neighbors(u)] = 0.0

    # -- training interface ------------------------------------------------

    def encode(self, samples: list[Sample]) -> dict:
        return {
            "x": self.encoder.encode(samples),
            "current": np.array([s.current_node for s in samples], dtype=np.int64),
            "labels": np.array([s.label for s in samples], dtype=np.int64),
        }

    def logits(self, batch: dict, idx: np.ndarray, training: bool = False,
               rng: np.random.Generator | None = None) -> tuple[Tensor, np.ndarray]:
        x = Tensor(batch["x"][idx])
        h = self.fc1(x).relu()
        h = self.fc2(h).relu()
        z = self.out(h) + Tensor(self._adj_mask[batch["current"][idx]])
        return z, batch["labels"][idx]

    def class_severity(self, batch: dict, idx: np.ndarray, grid: np.ndarray,
                       steps: np.ndarray) -> np.ndarray:
        """(B, N, 4) severity of each candidate node's weather; used when the
        weather-penalty loss weight is non-zero."""
        sev = severity_features(grid)  # (steps, nodes, 4)
        return sev[steps[idx]]

    # -- prediction ----------------------------------------------------------

    def predict_proba(self, sample: Sample) -> tuple[list[int], np.ndarray]:
        with no_grad():
            batch = self.encode([sample])
            z, _ = self.logits(batch, np.array([0]))
            nbs = self.net.neighbors(sample.current_node)
            masked = z.data[0, nbs]
            e = np.exp(masked - masked.max())
            return nbs, e / e.sum()
