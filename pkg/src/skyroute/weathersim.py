"""Per-node weather time series: synthetic generation, file ingestion, lookup.

The synthetic generator is a seeded stand-in for a live weather feed. Each
variable follows a mean-reverting random walk shared regionally, with a static
per-node offset plus small per-node noise, then clamping to physical ranges.
The JSONL snapshot format doubles as the ingestion contract for any real
fetcher that wants to supply data instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridIncomplete, OutOfHorizon, ParseError, WeatherRangeError
from .jsonio import dumps_ordered, iter_jsonl
from .skynet import Network

_STREAM_WEATHER = 3

WIND_SPEED_RANGE = (0.0, 15.0)
TEMPERATURE_RANGE = (-5.0, 35.0)
VISIBILITY_RANGE = (0.0, 20.0)
CLOUD_COVER_RANGE = (0.0, 100.0)

_FIELDS = ("wind_speed", "wind_bearing", "temperature", "visibility", "cloud_cover")


@dataclass(frozen=True)
class WeatherSample:
    node_id: int
    t: float
    wind_speed: float      # m/s, >= 0
    wind_bearing: float    # deg [0, 360), meteorological FROM convention
    temperature: float     # degC
    visibility: float      # km, >= 0
    cloud_cover: float     # percent [0, 100]

    def validate(self) -> None:
        if self.wind_speed < 0:
            raise WeatherRangeError(f"wind_speed {self.wind_speed} < 0")
        if not (0.0 <= self.wind_bearing < 360.0):
            raise WeatherRangeError(f"wind_bearing {self.wind_bearing} outside [0,360)")
        if self.visibility < 0:
            raise WeatherRangeError(f"visibility {self.visibility} < 0")
        if not (0.0 <= self.cloud_cover <= 100.0):
            raise WeatherRangeError(f"cloud_cover {self.cloud_cover} outside [0,100]")


class WeatherSeries:
    """Dense node x time grid of weather samples at a fixed sampling interval.

    Values live in (n_nodes, n_steps) float arrays; `sample(node, step)`
    materializes a WeatherSample. The grid covers t = 0, interval, ...,
    horizon inclusive, and the series is immutable after construction.
    """

    def __init__(self, interval_s: float, values: dict[str, np.ndarray]):
        if interval_s <= 0:
            raise ValueError("interval_s must be positive")
        shapes = {v.shape for v in values.values()}
        if len(shapes) != 1 or set(values) != set(_FIELDS):
            raise ValueError("weather variable arrays must share one (nodes, steps) shape")
        self.interval_s = float(interval_s)
        self._values = {k: np.asarray(v, dtype=np.float64) for k, v in values.items()}
        for arr in self._values.values():
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self._values["wind_speed"].shape[0]

    @property
    def n_steps(self) -> int:
        return self._values["wind_speed"].shape[1]

    @property
    def horizon_s(self) -> float:
        return (self.n_steps - 1) * self.interval_s

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.interval_s

    def array(self, field: str) -> np.ndarray:
        return self._values[field]

    def max_wind_speed(self) -> float:
        return float(self._values["wind_speed"].max())

    def step_index(self, t: float) -> int:
        """Zero-order hold: index of the sample in effect at time t."""
        if t < 0 or t > self.horizon_s:
            raise OutOfHorizon(f"t={t} outside [0, {self.horizon_s}]")
        return min(int(t // self.interval_s), self.n_steps - 1)

    def sample(self, node_id: int, step: int) -> WeatherSample:
        return WeatherSample(
            node_id=node_id,
            t=float(step * self.interval_s),
            wind_speed=float(self._values["wind_speed"][node_id, step]),
            wind_bearing=float(self._values["wind_bearing"][node_id, step]),
            temperature=float(self._values["temperature"][node_id, step]),
            visibility=float(self._values["visibility"][node_id, step]),
            cloud_cover=float(self._values["cloud_cover"][node_id, step]),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeatherSeries):
            return NotImplemented
        return self.interval_s == other.interval_s and all(
            np.array_equal(self._values[k], other._values[k]) for k in _FIELDS
        )


def snapshot_at(series: WeatherSeries, node_id: int, t: float) -> WeatherSample:
    """Sample in effect at time t for node_id (piecewise-constant hold)."""
    return series.sample(node_id, series.step_index(t))


def _mean_reverting_walk(rng, n_steps, mean, start_spread, pull, sigma):
    """AR(1)-style walk pulled toward `mean`; returns shape (n_steps,)."""
    out = np.empty(n_steps)
    out[0] = mean + rng.normal(0.0, start_spread)
    for k in range(1, n_steps):
        out[k] = out[k - 1] + pull * (mean - out[k - 1]) + rng.normal(0.0, sigma)
    return out


def synth_weather(net: Network, horizon_s: float, interval_s: float, seed: int) -> WeatherSeries:
    """Seeded synthetic weather over the network.

    The grid has floor(horizon/interval)+1 steps (both endpoints on the grid).
    Per variable: a regional mean-reverting walk shared by all nodes, a static
    per-node offset, and small per-node walk noise, clamped to physical ranges.
    """
    if interval_s <= 0:
        raise ValueError("interval_s must be positive")
    if horizon_s < interval_s:
        raise ValueError("horizon_s must be >= interval_s")
    rng = np.random.default_rng([seed, _STREAM_WEATHER])
    n_nodes = len(net.nodes)
    n_steps = int(horizon_s // interval_s) + 1

    def field(mean, start_spread, pull, sigma, offset_sd, node_sigma, clamp):
        base = _mean_reverting_walk(rng, n_steps, mean, start_spread, pull, sigma)
        offsets = rng.normal(0.0, offset_sd, size=n_nodes)
        noise = np.zeros((n_nodes, n_steps))
        for k in range(1, n_steps):
            noise[:, k] = 0.8 * noise[:, k - 1] + rng.normal(0.0, node_sigma, size=n_nodes)
        grid = base[None, :] + offsets[:, None] + noise
        return np.clip(grid, clamp[0], clamp[1])

    wind_speed = field(6.0, 1.5, 0.12, 0.55, 0.9, 0.22, WIND_SPEED_RANGE)
    temperature = field(16.0, 4.0, 0.05, 0.35, 1.2, 0.15, TEMPERATURE_RANGE)
    visibility = field(12.0, 2.0, 0.08, 0.40, 1.0, 0.20, VISIBILITY_RANGE)
    cloud_cover = field(45.0, 15.0, 0.06, 2.5, 6.0, 1.0, CLOUD_COVER_RANGE)

    # Bearing drifts freely (no mean reversion; direction has no preferred value).
    bearing_base = np.cumsum(rng.normal(0.0, 6.0, size=n_steps)) + rng.uniform(0.0, 360.0)
    bearing_offsets = rng.normal(0.0, 8.0, size=n_nodes)
    wind_bearing = np.mod(bearing_base[None, :] + bearing_offsets[:, None], 360.0)

    return WeatherSeries(
        interval_s=float(interval_s),
        values={
            "wind_speed": wind_speed,
            "wind_bearing": wind_bearing,
            "temperature": temperature,
            "visibility": visibility,
            "cloud_cover": cloud_cover,
        },
    )


def write_weather(series: WeatherSeries, path: str | Path) -> None:
    """One WeatherSample per line, node-major then time-major; byte-deterministic."""
    with open(path, "w", encoding="utf-8") as fh:
        for node_id in range(series.n_nodes):
            for step in range(series.n_steps):
                s = series.sample(node_id, step)
                row = {
                    "node_id": s.node_id,
                    "t": s.t,
                    "wind_speed": s.wind_speed,
                    "wind_bearing": s.wind_bearing,
                    "temperature": s.temperature,
                    "visibility": s.visibility,
                    "cloud_cover": s.cloud_cover,
                }
                fh.write(dumps_ordered(row))
                fh.write("\n")


def load_weather(path: str | Path) -> WeatherSeries:
    """Parse and validate a weather JSONL snapshot.

    Raises ParseError (malformed line), GridIncomplete (missing node/time
    cell), or WeatherRangeError (value outside its documented range).
    """
    cells: dict[tuple[int, float], WeatherSample] = {}
    for lineno, obj in iter_jsonl(path):
        try:
            s = WeatherSample(
                node_id=int(obj["node_id"]),
                t=float(obj["t"]),
                wind_speed=float(obj["wind_speed"]),
                wind_bearing=float(obj["wind_bearing"]),
                temperature=float(obj["temperature"]),
                visibility=float(obj["visibility"]),
                cloud_cover=float(obj["cloud_cover"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad weather sample: {exc}", line=lineno) from exc
        s.validate()
        key = (s.node_id, s.t)
        if key in cells:
            raise ParseError(f"duplicate sample for node {s.node_id} t={s.t}", line=lineno)
        cells[key] = s

    if not cells:
        raise ParseError("weather file contains no samples")
    node_ids = sorted({nid for nid, _ in cells})
    ts = sorted({t for _, t in cells})
    n_nodes = node_ids[-1] + 1

    # Dense ids and a complete grid; report the first missing cell.
    for nid in range(n_nodes):
        for t in ts:
            if (nid, t) not in cells:
                raise GridIncomplete(nid, t)

    if len(ts) > 1:
        diffs = np.diff(ts)
        interval = float(diffs[0])
        if not np.allclose(diffs, interval, rtol=0, atol=1e-9) or ts[0] != 0.0:
            raise ParseError("sample times are not a uniform grid starting at 0")
    else:
        interval = 1.0  # single-step series: interval is arbitrary for hold lookup

    values = {f: np.empty((n_nodes, len(ts))) for f in _FIELDS}
    for i, nid in enumerate(range(n_nodes)):
        for j, t in enumerate(ts):
            s = cells[(nid, t)]
            values["wind_speed"][i, j] = s.wind_speed
            values["wind_bearing"][i, j] = s.wind_bearing
            values["temperature"][i, j] = s.temperature
            values["visibility"][i, j] = s.visibility
            values["cloud_cover"][i, j] = s.cloud_cover
    return WeatherSeries(interval_s=interval, values=values)


def lag1_autocorrelation(series: WeatherSeries, field: str, node_id: int) -> float:
    """Lag-1 autocorrelation of one node's series; smoothness diagnostic."""
    x = series.array(field)[node_id]
    x0, x1 = x[:-1], x[1:]
    denom = math.sqrt(np.var(x0) * np.var(x1))
    if denom == 0:
        return 1.0
    return float(np.mean((x0 - x0.mean()) * (x1 - x1.mean())) / denom)
