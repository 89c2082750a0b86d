"""Delivery-workload simulation and the training-dataset wire format.

Requests are dispatched in time order to the earliest-available drone
(nearest to the pickup among ties). Each delivery is planned by A* with
weather frozen at the request time; the drone repositions to the pickup
first (planned and battery-charged, but not recorded), then flies the
delivery route, which is emitted as one dataset record. Failures are data,
not errors.

Wire format: JSON lines, one record per line, field names exactly as the
dataset schema dictates (`wind_direction`, not `wind_bearing`, on the wire).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NoRoute, ParseError
from .flightcost import DroneSpec, duration_heuristic, frozen_cost_fn
from .jsonio import dumps_ordered, iter_jsonl
from .planner import Route, astar
from .skynet import Network, euclidean
from .weathersim import WeatherSeries

logger = logging.getLogger(__name__)

_STREAM_REQUESTS = 4

RECHARGE_THRESHOLD = 0.2
CHARGE_TIME_S = 1800.0


@dataclass(frozen=True)
class Request:
    request_id: int
    origin: int
    destination: int
    payload_kg: float
    request_time: float


@dataclass(frozen=True)
class RouteSegment:
    from_node: int
    to_node: int
    wind_speed: float
    wind_direction: float
    temperature: float
    distance: float
    flight_duration: float
    battery_consumed: float

    def to_dict(self) -> dict:
        return {
            "from_node": self.from_node,
            "to_node": self.to_node,
            "wind_speed": self.wind_speed,
            "wind_direction": self.wind_direction,
            "temperature": self.temperature,
            "distance": self.distance,
            "flight_duration": self.flight_duration,
            "battery_consumed": self.battery_consumed,
        }


@dataclass(frozen=True)
class RouteRecord:
    request_id: int
    route_segments: tuple[RouteSegment, ...]

    def validate(self) -> None:
        if not self.route_segments:
            raise ValueError(f"record {self.request_id} has no segments")
        for a, b in zip(self.route_segments, self.route_segments[1:]):
            if a.to_node != b.from_node:
                raise ValueError(
                    f"record {self.request_id}: segment chain broken at {a.to_node}->{b.from_node}"
                )

    @property
    def origin(self) -> int:
        return self.route_segments[0].from_node

    @property
    def destination(self) -> int:
        return self.route_segments[-1].to_node

    def node_sequence(self) -> list[int]:
        return [self.route_segments[0].from_node] + [s.to_node for s in self.route_segments]

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "route_segments": [s.to_dict() for s in self.route_segments],
        }


@dataclass
class DroneState:
    drone_id: int
    current_node: int
    battery_remaining: float
    available_at: float = 0.0


@dataclass(frozen=True)
class FailedRequest:
    request_id: int
    reason: str


@dataclass
class SimResult:
    records: list[RouteRecord]
    failures: list[FailedRequest]
    metadata: dict

    @property
    def success_rate(self) -> float:
        total = len(self.records) + len(self.failures)
        return len(self.records) / total if total else 0.0


def generate_requests(net: Network, count: int, horizon_s: float,
                      payload_range: tuple[float, float], seed: int) -> list[Request]:
    """Uniform random requests, sorted by request time; ids follow sort order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo, hi = payload_range
    if not (0 < lo <= hi):
        raise ValueError("payload_range must satisfy 0 < lo <= hi")
    n = len(net.nodes)
    if n < 2:
        raise ValueError("need at least 2 nodes to generate requests")
    rng = np.random.default_rng([seed, _STREAM_REQUESTS])
    rows = []
    for _ in range(count):
        origin = int(rng.integers(0, n))
        dest = int(rng.integers(0, n - 1))
        if dest >= origin:
            dest += 1  # uniform over nodes != origin
        payload = float(rng.uniform(lo, hi))
        t = float(rng.uniform(0.0, horizon_s))
        rows.append((t, origin, dest, payload))
    rows.sort(key=lambda r: r[0])
    return [
        Request(request_id=i, origin=o, destination=d, payload_kg=p, request_time=t)
        for i, (t, o, d, p) in enumerate(rows)
    ]


def make_fleet(net: Network, n_drones: int, drone: DroneSpec) -> list[DroneState]:
    """Fully charged fleet parked round-robin over the nodes."""
    n = len(net.nodes)
    return [
        DroneState(drone_id=i, current_node=i % n, battery_remaining=drone.battery_capacity)
        for i in range(n_drones)
    ]


def _plan(net: Network, wx: WeatherSeries, drone: DroneSpec, payload: float,
          t_plan: float, origin: int, dest: int, wx_bound: float) -> Route:
    cost = frozen_cost_fn(net, wx, drone, payload, t_plan)
    h = duration_heuristic(net, dest, drone, wx_bound)
    return astar(net, cost, h, origin, dest)


def plan_request(net: Network, wx: WeatherSeries, drone: DroneSpec,
                 req: Request, wx_bound: float | None = None) -> Route:
    """The delivery plan for one request (the label-generating computation)."""
    bound = wx.max_wind_speed() if wx_bound is None else wx_bound
    return _plan(net, wx, drone, req.payload_kg, req.request_time,
                 req.origin, req.destination, bound)


def _segments_for(route: Route, net: Network, wx: WeatherSeries, t_plan: float) -> tuple[RouteSegment, ...]:
    step = wx.step_index(t_plan)
    segs = []
    seq = route.node_sequence
    for (u, v), cost in zip(zip(seq, seq[1:]), route.segment_costs):
        w = wx.sample(u, step)
        segs.append(RouteSegment(
            from_node=u,
            to_node=v,
            wind_speed=w.wind_speed,
            wind_direction=w.wind_bearing,
            temperature=w.temperature,
            distance=net.edge_distance(u, v),
            flight_duration=cost.duration,
            battery_consumed=cost.energy,
        ))
    return tuple(segs)


def run_simulation(net: Network, wx: WeatherSeries, fleet: list[DroneState],
                   requests: list[Request], drone: DroneSpec | None = None,
                   recharge_threshold: float = RECHARGE_THRESHOLD,
                   charge_time_s: float = CHARGE_TIME_S) -> SimResult:
    """Dispatch every request and collect successful deliveries as records.

    A drone recharges to full (taking charge_time_s) before a mission when its
    battery is under recharge_threshold of capacity or short of the mission's
    planned energy; a request fails only if the mission exceeds a full battery
    or no feasible route exists.
    """
    if not fleet:
        raise ValueError("fleet must be non-empty")
    drone = drone or DroneSpec()
    wx_bound = wx.max_wind_speed()
    records: list[RouteRecord] = []
    failures: list[FailedRequest] = []
    recharges = 0

    for req in requests:
        t = req.request_time
        chosen = min(fleet, key=lambda d: (max(d.available_at, t),
                                           euclidean(net.node(d.current_node), net.node(req.origin)),
                                           d.drone_id))
        try:
            reposition: Route | None = None
            if chosen.current_node != req.origin:
                reposition = _plan(net, wx, drone, 0.0, t, chosen.current_node, req.origin, wx_bound)
            delivery = _plan(net, wx, drone, req.payload_kg, t, req.origin, req.destination, wx_bound)
        except NoRoute as exc:
            failures.append(FailedRequest(req.request_id, f"no_route: {exc}"))
            continue

        energy_needed = delivery.total_energy + (reposition.total_energy if reposition else 0.0)
        start = max(chosen.available_at, t)
        if (chosen.battery_remaining < recharge_threshold * drone.battery_capacity
                or chosen.battery_remaining < energy_needed):
            chosen.battery_remaining = drone.battery_capacity
            start += charge_time_s
            recharges += 1
        if energy_needed > drone.battery_capacity:
            failures.append(FailedRequest(
                req.request_id,
                f"energy {energy_needed:.1f} Wh exceeds capacity {drone.battery_capacity:.1f} Wh",
            ))
            continue

        duration = delivery.total_duration + (reposition.total_duration if reposition else 0.0)
        chosen.battery_remaining -= energy_needed
        chosen.available_at = start + duration
        chosen.current_node = req.destination
        records.append(RouteRecord(
            request_id=req.request_id,
            route_segments=_segments_for(delivery, net, wx, t),
        ))

    durations = [sum(s.flight_duration for s in r.route_segments) for r in records]
    energies = [sum(s.battery_consumed for s in r.route_segments) for r in records]
    meta = {
        "requests": len(requests),
        "successes": len(records),
        "failures": len(failures),
        "success_rate": len(records) / len(requests) if requests else 0.0,
        "mean_route_duration_s": float(np.mean(durations)) if durations else 0.0,
        "mean_route_energy_wh": float(np.mean(energies)) if energies else 0.0,
        "recharges": recharges,
        "fixtures": {
            "recharge_threshold": recharge_threshold,
            "charge_time_s": charge_time_s,
            "dispatch_policy": "earliest-available, nearest to pickup, lowest id",
            "plan_time": "request_time (weather frozen per plan)",
            "drone": drone.to_dict(),
        },
    }
    return SimResult(records=records, failures=failures, metadata=meta)


_SEGMENT_FIELDS = ("from_node", "to_node", "wind_speed", "wind_direction",
                   "temperature", "distance", "flight_duration", "battery_consumed")


def write_dataset(records: list[RouteRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_ordered(rec.to_dict()))
            fh.write("\n")


def read_dataset(path: str | Path) -> list[RouteRecord]:
    records = []
    for lineno, obj in iter_jsonl(path):
        try:
            segs = tuple(
                RouteSegment(
                    from_node=int(s["from_node"]),
                    to_node=int(s["to_node"]),
                    wind_speed=float(s["wind_speed"]),
                    wind_direction=float(s["wind_direction"]),
                    temperature=float(s["temperature"]),
                    distance=float(s["distance"]),
                    flight_duration=float(s["flight_duration"]),
                    battery_consumed=float(s["battery_consumed"]),
                )
                for s in obj["route_segments"]
            )
            rec = RouteRecord(request_id=int(obj["request_id"]), route_segments=segs)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad route record: {exc}", line=lineno) from exc
        rec.validate()
        records.append(rec)
    return records


def replan_record(net: Network, wx: WeatherSeries, record: RouteRecord,
                  request: Request, drone: DroneSpec | None = None) -> Route:
    """Recompute the record's plan from the stored weather context.

    Used by the label-reproducibility check: the returned route's node
    sequence must equal the record's.
    """
    drone = drone or DroneSpec()
    if record.origin != request.origin or record.destination != request.destination:
        raise ValueError(f"record {record.request_id} does not match its request")
    return plan_request(net, wx, drone, request)
