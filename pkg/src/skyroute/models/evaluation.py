"""Prediction wrappers, held-out evaluation, and route rollout.

Rollout repeatedly applies the model's argmax next-node choice with
already-visited nodes masked out (cycle prevention), then costs the realized
route with the same frozen-at-dispatch weather the planners use, so cost
ratios against the A* reference are apples to apples.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import NoRoute
from ..flightcost import DroneSpec, duration_heuristic, frozen_cost_fn
from ..planner import Route, astar
from ..skynet import Network
from ..weathersim import WeatherSeries
from .features import Sample


def predict_next(model, sample: Sample) -> tuple[list[int], np.ndarray]:
    """Probability vector over the current node's neighbors; sums to 1."""
    nbs, probs = model.predict_proba(sample)
    return nbs, probs


@dataclass
class EvalReport:
    accuracy: float
    precision_macro: float
    recall_macro: float
    f1_macro: float
    n_samples: int
    n_classes: int
    top_confusions: list[tuple[int, int, int]]  # (true, predicted, count)
    latency_ns: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f1_macro": self.f1_macro,
            "n_samples": self.n_samples,
            "n_classes": self.n_classes,
            "top_confusions": [list(c) for c in self.top_confusions],
            "latency_ns": self.latency_ns,
        }


def _macro_prf(true: np.ndarray, pred: np.ndarray) -> tuple[float, float, float]:
    classes = sorted(set(true.tolist()))
    precisions, recalls, f1s = [], [], []
    for c in classes:
        tp = int(np.sum((pred == c) & (true == c)))
        fp = int(np.sum((pred == c) & (true != c)))
        fn = int(np.sum((pred != c) & (true == c)))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    return float(np.mean(precisions)), float(np.mean(recalls)), float(np.mean(f1s))


def evaluate(model, samples: list[Sample], latency_probes: int = 200) -> EvalReport:
    """Exact-match accuracy plus macro precision/recall/F1 on held-out samples.

    Per-prediction latency is measured over the first `latency_probes`
    single-sample calls (reported, never asserted: it is hardware-bound).
    """
    if not samples:
        raise ValueError("evaluate needs at least one sample")
    preds = np.zeros(len(samples), dtype=np.int64)
    true = np.array([s.label for s in samples], dtype=np.int64)
    timings = []
    for i, s in enumerate(samples):
        t0 = time.perf_counter_ns()
        nbs, probs = model.predict_proba(s)
        dt = time.perf_counter_ns() - t0
        if i < latency_probes:
            timings.append(dt)
        preds[i] = nbs[int(np.argmax(probs))]
    acc = float(np.mean(preds == true))
    p, r, f1 = _macro_prf(true, preds)
    confusions = Counter(
        (int(t), int(q)) for t, q in zip(true, preds) if t != q
    )
    top = [(t, q, c) for (t, q), c in confusions.most_common(10)]
    lat = np.array(timings, dtype=np.float64)
    return EvalReport(
        accuracy=acc,
        precision_macro=p,
        recall_macro=r,
        f1_macro=f1,
        n_samples=len(samples),
        n_classes=len(set(true.tolist())),
        top_confusions=top,
        latency_ns={
            "mean": float(lat.mean()),
            "p50": float(np.percentile(lat, 50)),
            "p95": float(np.percentile(lat, 95)),
            "probes": int(lat.size),
        },
    )


@dataclass
class RolloutResult:
    success: bool
    reason: str | None
    route: Route | None
    reference: Route | None   # the A* plan for the same episode

    @property
    def cost_ratio(self) -> float | None:
        if not self.success or self.reference is None or self.reference.total_duration == 0:
            return None
        return self.route.total_duration / self.reference.total_duration


def rollout(model, net: Network, wx: WeatherSeries, origin: int, dest: int, t0: float,
            drone: DroneSpec | None = None, payload: float = 0.0,
            max_steps: int | None = None) -> RolloutResult:
    """Greedy argmax rollout with visited-node masking.

    The A* reference plan (same frozen weather) supplies the default step cap
    (4x the optimal hop count) and the planned-total-distance feature the
    dataset schema carries for each decision.
    """
    drone = drone or DroneSpec()
    if origin == dest:
        empty = Route([origin], 0.0, 0.0, [], 0, 0)
        return RolloutResult(True, None, empty, empty)

    cost_fn = frozen_cost_fn(net, wx, drone, payload, t0)
    h = duration_heuristic(net, dest, drone, wx.max_wind_speed())
    try:
        reference = astar(net, cost_fn, h, origin, dest)
    except NoRoute as exc:
        return RolloutResult(False, f"no_route: {exc}", None, None)
    if max_steps is None:
        max_steps = max(1, 4 * reference.hops)
    planned_distance = sum(net.edge_distance(u, v) for u, v in
                           zip(reference.node_sequence, reference.node_sequence[1:]))

    seq = [origin]
    visited = {origin}
    costs = []
    u = origin
    for _ in range(max_steps):
        sample = Sample(
            request_id=-1, start_node=origin, end_node=dest, current_node=u,
            payload=payload, total_distance=planned_distance, t=t0, label=-1,
        )
        nbs, probs = model.predict_proba(sample)
        probs = probs.copy()
        for i, v in enumerate(nbs):
            if v in visited:
                probs[i] = 0.0
        if probs.sum() <= 0.0:
            return RolloutResult(False, "dead_end", None, reference)
        v = nbs[int(np.argmax(probs))]
        ec = cost_fn(u, v)
        if not ec.feasible:
            return RolloutResult(False, f"infeasible_edge:{u}->{v}", None, reference)
        costs.append(ec)
        seq.append(v)
        visited.add(v)
        u = v
        if u == dest:
            realized = Route(
                node_sequence=seq,
                total_duration=sum(c.duration for c in costs),
                total_energy=sum(c.energy for c in costs),
                segment_costs=costs,
                expanded_nodes=0,
                plan_time_ns=0,
            )
            return RolloutResult(True, None, realized, reference)
    return RolloutResult(False, "step_limit", None, reference)


class AStarOracle:
    """Planner wrapped as a predictor: one-hot on A*'s next hop.

    Test utility; rollout driven by this model must reproduce the planner's
    cost exactly.
    """

    kind = "oracle"

    def __init__(self, net: Network, wx: WeatherSeries, drone: DroneSpec | None = None,
                 payload: float = 0.0):
        self.net = net
        self.wx = wx
        self.drone = drone or DroneSpec()
        self.payload = payload

    def predict_proba(self, sample: Sample) -> tuple[list[int], np.ndarray]:
        cost_fn = frozen_cost_fn(self.net, self.wx, self.drone, self.payload, sample.t)
        h = duration_heuristic(self.net, sample.end_node, self.drone, self.wx.max_wind_speed())
        route = astar(self.net, cost_fn, h, sample.current_node, sample.end_node)
        nbs = self.net.neighbors(sample.current_node)
        probs = np.zeros(len(nbs))
        probs[nbs.index(route.node_sequence[1])] = 1.0
        return nbs, probs
