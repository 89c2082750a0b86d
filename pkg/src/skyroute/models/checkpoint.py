"""Versioned model checkpoints.

A checkpoint is one canonical-JSON document: format version, model kind,
architecture config, the network it was built for, the label vocabulary, and
every learned array as base64-encoded little-endian float64 bytes (bit-exact
round trip). The weather feature grid rides along for weather-aware models so
a checkpoint alone suffices for prediction.
"""

from __future__ import annotations

import base64
from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..jsonio import dumps_canonical, load_json
from ..skynet import Network
from .baselines import FfnnModel, GreedyBaseline, KnnModel
from .transformer import WeatherTransformer

FORMAT_VERSION = 1


def _enc(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    return {
        "shape": list(a.shape),
        "dtype": str(a.dtype),
        "data": base64.b64encode(a.astype("<" + a.dtype.str[1:], copy=False).tobytes()).decode("ascii"),
    }


def _dec(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<" + np.dtype(d["dtype"]).str[1:]).reshape(d["shape"]).astype(d["dtype"])


def model_to_bytes(model) -> bytes:
    doc: dict = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "net": model.net.to_dict(),
        "label_vocab": [n.id for n in model.net.nodes],
    }
    if model.kind == "greedy":
        pass
    elif model.kind == "knn":
        if model._x is None:
            raise ValueError("cannot checkpoint an unfitted KNN model")
        doc["config"] = {"k": model.k}
        doc["arrays"] = {"x": _enc(model._x), "y": _enc(model._y)}
    elif model.kind == "ffnn":
        doc["config"] = {"hidden": list(model.hidden), "seed": model.seed}
        doc["params"] = {name: _enc(p.data) for name, p in sorted(model.parameters().items())}
    elif model.kind == "transformer":
        doc["config"] = dict(model.config(), interval_s=model.interval_s)
        doc["arrays"] = {"grid": _enc(model.grid)}
        doc["params"] = {name: _enc(p.data) for name, p in sorted(model.parameters().items())}
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    return (dumps_canonical(doc) + "\n").encode("utf-8")


def save_model(model, path: str | Path) -> int:
    """Write the checkpoint; returns its size in bytes."""
    blob = model_to_bytes(model)
    Path(path).write_bytes(blob)
    return len(blob)


def model_from_doc(doc: dict):
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported checkpoint format version {doc.get('format_version')}")
    net = Network.from_dict(doc["net"])
    kind = doc["kind"]
    if kind == "greedy":
        return GreedyBaseline(net)
    if kind == "knn":
        model = KnnModel(net, k=int(doc["config"]["k"]))
        model._x = _dec(doc["arrays"]["x"])
        model._y = _dec(doc["arrays"]["y"]).astype(np.int64)
        return model
    if kind == "ffnn":
        cfg = doc["config"]
        model = FfnnModel(net, hidden=tuple(cfg["hidden"]), seed=int(cfg["seed"]))
    elif kind == "transformer":
        cfg = doc["config"]
        from ..neural.layers import AttentionConfig

        model = WeatherTransformer(
            net,
            grid=_dec(doc["arrays"]["grid"]),
            interval_s=float(cfg["interval_s"]),
            attention=AttentionConfig(d_model=int(cfg["d_model"]), n_heads=int(cfg["n_heads"]),
                                      dropout_p=float(cfg["dropout_p"])),
            n_layers=int(cfg["n_layers"]),
            ffn_dim=int(cfg["ffn_dim"]),
            seed=int(cfg["seed"]),
        )
    else:
        raise ParseError(f"unknown checkpoint kind {kind!r}")
    params = model.parameters()
    stored = doc["params"]
    if set(stored) != set(params):
        raise ParseError("checkpoint parameter names do not match the architecture")
    for name, p in params.items():
        arr = _dec(stored[name])
        if tuple(arr.shape) != tuple(p.data.shape):
            raise ParseError(f"checkpoint parameter {name} has shape {arr.shape}, expected {p.data.shape}")
        p.data = arr.astype(np.float64)
    return model


def load_model(path: str | Path):
    return model_from_doc(load_json(path))
