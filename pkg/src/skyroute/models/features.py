"""Feature encoding: route records -> per-decision training samples.

Each route segment becomes one sample: the drone sits at the segment's
from-node, the label is the to-node the optimal planner chose. Node ids are
one-hot (baselines) or embedded (transformer); coordinates are normalized to
[0,1]; wind bearing is encoded as a (sin, cos) pair to avoid the 0/360
discontinuity. Splitting is by request id so no route leaks across splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnknownNode
from ..fleetsim import Request, RouteRecord
from ..skynet import Network
from ..weathersim import WeatherSeries

_STREAM_SPLIT = 9

# Fixed normalization scales for the weather feature channels.
WIND_SCALE = 15.0
TEMP_OFFSET, TEMP_SCALE = 5.0, 40.0
VIS_SCALE = 20.0
CLOUD_SCALE = 100.0
PAYLOAD_SCALE = 10.0

N_WEATHER_FEATURES = 6  # speed, sin(bearing), cos(bearing), temp, visibility, cloud
N_SEVERITY_FEATURES = 4  # wind, cold, low visibility, cloud


@dataclass(frozen=True)
class Sample:
    request_id: int
    start_node: int
    end_node: int
    current_node: int
    payload: float
    total_distance: float
    t: float                 # plan time (weather context)
    label: int               # next node chosen by the planner
    weather_features: np.ndarray | None = None  # (deg, 6) per sorted neighbor


def weather_feature_grid(wx: WeatherSeries, extra_channels: int = 0, seed: int = 0) -> np.ndarray:
    """Normalized per-(step, node) weather features, shape (steps, nodes, w).

    The base 6 channels are wind speed, bearing sin/cos, temperature,
    visibility and cloud cover. `extra_channels` appends seeded deterministic
    mixtures of the base channels; benchmarks use this to sweep the feature
    count without touching the generator.
    """
    speed = wx.array("wind_speed").T / WIND_SCALE
    bearing = np.radians(wx.array("wind_bearing").T)
    temp = (wx.array("temperature").T + TEMP_OFFSET) / TEMP_SCALE
    vis = wx.array("visibility").T / VIS_SCALE
    cloud = wx.array("cloud_cover").T / CLOUD_SCALE
    base = np.stack([speed, np.sin(bearing), np.cos(bearing), temp, vis, cloud], axis=-1)
    if extra_channels == 0:
        return base
    rng = np.random.default_rng([seed, 11])
    mix = rng.uniform(-1.0, 1.0, size=(N_WEATHER_FEATURES, extra_channels))
    return np.concatenate([base, base @ mix], axis=-1)


def severity_features(grid: np.ndarray) -> np.ndarray:
    """Non-negative weather-severity channels per (step, node), shape (..., 4).

    wind intensity, cold below the battery derating knee, visibility deficit,
    cloud cover; all already normalized to roughly [0, 1].
    """
    speed = grid[..., 0]
    temp_c = grid[..., 3] * TEMP_SCALE - TEMP_OFFSET
    cold = np.maximum(0.0, 15.0 - temp_c) / 20.0
    low_vis = 1.0 - grid[..., 4]
    cloud = grid[..., 5]
    return np.stack([speed, cold, low_vis, cloud], axis=-1)


def normalized_coords(net: Network) -> np.ndarray:
    """Node coordinates scaled into [0,1]^2, shape (N, 2)."""
    xy = np.array([[n.x, n.y] for n in net.nodes], dtype=np.float64)
    lo = xy.min(axis=0)
    span = np.maximum(xy.max(axis=0) - lo, 1e-9)
    return (xy - lo) / span


def encode_dataset(records: list[RouteRecord], net: Network,
                   wx: WeatherSeries | None = None, weather_aware: bool = False,
                   requests: list[Request] | None = None) -> list[Sample]:
    """One Sample per route segment.

    Payload and plan time come from the request table (they are not on the
    dataset wire format); without it payload falls back to 0 and plan time to
    the start of the horizon. Weather-aware encoding requires both the weather
    series and the request table.
    """
    if weather_aware and (wx is None or requests is None):
        raise ValueError("weather-aware encoding needs the weather series and the request table")
    n = len(net.nodes)
    req_by_id = {r.request_id: r for r in requests} if requests else {}
    grid = weather_feature_grid(wx) if weather_aware else None

    samples: list[Sample] = []
    for rec in records:
        for seg in rec.route_segments:
            if not (0 <= seg.from_node < n and 0 <= seg.to_node < n):
                raise UnknownNode(
                    f"record {rec.request_id} references node {max(seg.from_node, seg.to_node)}"
                )
        req = req_by_id.get(rec.request_id)
        payload = req.payload_kg if req else 0.0
        t_plan = req.request_time if req else 0.0
        total_distance = sum(s.distance for s in rec.route_segments)
        step = wx.step_index(t_plan) if wx is not None else 0
        for seg in rec.route_segments:
            wf = None
            if weather_aware:
                nbs = net.neighbors(seg.from_node)
                wf = grid[step, nbs]  # (deg, 6), sorted-neighbor order
            samples.append(Sample(
                request_id=rec.request_id,
                start_node=rec.origin,
                end_node=rec.destination,
                current_node=seg.from_node,
                payload=payload,
                total_distance=total_distance,
                t=t_plan,
                label=seg.to_node,
                weather_features=wf,
            ))
    return samples


def split_by_request(samples: list[Sample], fractions: tuple[float, float, float],
                     seed: int) -> dict[str, list[Sample]]:
    """Seeded train/val/test partition of the request ids (no route leakage)."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    ids = sorted({s.request_id for s in samples})
    rng = np.random.default_rng([seed, _STREAM_SPLIT])
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]
    n_train = int(round(fractions[0] * len(ids)))
    n_val = int(round(fractions[1] * len(ids)))
    groups = {
        "train": set(shuffled[:n_train]),
        "val": set(shuffled[n_train:n_train + n_val]),
        "test": set(shuffled[n_train + n_val:]),
    }
    out: dict[str, list[Sample]] = {"train": [], "val": [], "test": []}
    for s in samples:
        for name, members in groups.items():
            if s.request_id in members:
                out[name].append(s)
                break
    return out


class BlindEncoder:
    """Fixed-size weather-blind feature vectors for the FFNN and KNN baselines.

    Layout: one-hot(current) + one-hot(destination) + one-hot(start) +
    [cur_xy, dest_xy, payload, total_distance], all normalized.
    """

    def __init__(self, net: Network):
        self.n = len(net.nodes)
        self.coords = normalized_coords(net)
        # crude route-length scale: a few bounding-box diagonals
        self.dist_scale = 3.0 * _bbox_diag(net)

    @property
    def dim(self) -> int:
        return 3 * self.n + 6

    def encode(self, samples: list[Sample]) -> np.ndarray:
        m = len(samples)
        x = np.zeros((m, self.dim))
        for i, s in enumerate(samples):
            x[i, s.current_node] = 1.0
            x[i, self.n + s.end_node] = 1.0
            x[i, 2 * self.n + s.start_node] = 1.0
            base = 3 * self.n
            x[i, base:base + 2] = self.coords[s.current_node]
            x[i, base + 2:base + 4] = self.coords[s.end_node]
            x[i, base + 4] = s.payload / PAYLOAD_SCALE
            x[i, base + 5] = s.total_distance / self.dist_scale
        return x


def _bbox_diag(net: Network) -> float:
    xy = np.array([[n.x, n.y] for n in net.nodes])
    span = xy.max(axis=0) - xy.min(axis=0)
    return float(np.hypot(span[0], span[1])) or 1.0
