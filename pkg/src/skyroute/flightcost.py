"""Weather-adjusted edge physics.

Ground speed uses the full wind triangle with crab correction; wind bearings
follow the meteorological FROM convention, so wind_bearing == track_bearing is
a pure headwind. Battery draw is base power plus a linear payload term, with a
linear cold-weather derating below 15 degC. All constants here are explicit
artifact fixtures, isolated so they can be re-calibrated per platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CrosswindExceedsAirspeed
from .skynet import Network, Node
from .weathersim import WeatherSample, WeatherSeries, snapshot_at

TEMP_DERATING_KNEE_C = 15.0
TEMP_DERATING_PER_DEG = 0.01


@dataclass(frozen=True)
class DroneSpec:
    airspeed: float = 20.0            # m/s cruise
    battery_capacity: float = 500.0   # Wh
    max_payload: float = 5.0          # kg
    base_power: float = 360.0         # W at zero payload
    payload_power_coeff: float = 40.0  # W per kg
    min_ground_speed: float = 1.0     # m/s floor under strong headwind

    def __post_init__(self):
        if min(self.airspeed, self.battery_capacity, self.max_payload,
               self.base_power, self.payload_power_coeff, self.min_ground_speed) <= 0:
            raise ValueError("all DroneSpec fields must be strictly positive")
        if self.min_ground_speed >= self.airspeed:
            raise ValueError("min_ground_speed must be below airspeed")

    def to_dict(self) -> dict:
        return {
            "airspeed": self.airspeed,
            "battery_capacity": self.battery_capacity,
            "max_payload": self.max_payload,
            "base_power": self.base_power,
            "payload_power_coeff": self.payload_power_coeff,
            "min_ground_speed": self.min_ground_speed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DroneSpec":
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class EdgeCost:
    duration: float   # s
    energy: float     # Wh
    feasible: bool
    reason: str | None = None

    @classmethod
    def infeasible(cls, reason: str) -> "EdgeCost":
        return cls(duration=math.inf, energy=math.inf, feasible=False, reason=reason)


def compass_bearing(a: Node, b: Node) -> float:
    """Bearing of travel from a to b, degrees clockwise from north (+y)."""
    return math.degrees(math.atan2(b.x - a.x, b.y - a.y)) % 360.0


def ground_speed(airspeed: float, wind_speed: float, wind_bearing: float,
                 track_bearing: float, floor: float = 0.0) -> float:
    """Speed over ground while holding a track through wind.

    Decomposes the wind into headwind h = W*cos(bearing - track) and crosswind
    c = W*sin(bearing - track); the crab-corrected result is
    sqrt(airspeed^2 - c^2) - h, clamped below at `floor`. Raises
    CrosswindExceedsAirspeed when |c| >= airspeed (the track cannot be held).
    """
    if airspeed <= 0:
        raise ValueError("airspeed must be positive")
    rel = math.radians(wind_bearing - track_bearing)
    headwind = wind_speed * math.cos(rel)
    crosswind = wind_speed * math.sin(rel)
    if abs(crosswind) >= airspeed:
        raise CrosswindExceedsAirspeed(
            f"crosswind {abs(crosswind):.2f} m/s >= airspeed {airspeed:.2f} m/s"
        )
    gs = math.sqrt(airspeed * airspeed - crosswind * crosswind) - headwind
    return max(gs, floor)


def temperature_derating(temp_c: float) -> float:
    """Extra-energy factor: 1% per degC below 15 degC, no penalty above."""
    return 1.0 + TEMP_DERATING_PER_DEG * max(0.0, TEMP_DERATING_KNEE_C - temp_c)


def edge_cost(distance_m: float, track_bearing: float, weather: WeatherSample,
              drone: DroneSpec, payload_kg: float) -> EdgeCost:
    """Duration and battery energy to fly one edge under a weather sample."""
    if payload_kg < 0 or payload_kg > drone.max_payload:
        raise ValueError(f"payload {payload_kg} kg outside [0, {drone.max_payload}]")
    if distance_m == 0:
        return EdgeCost(duration=0.0, energy=0.0, feasible=True)
    try:
        gs = ground_speed(drone.airspeed, weather.wind_speed, weather.wind_bearing,
                          track_bearing, floor=drone.min_ground_speed)
    except CrosswindExceedsAirspeed as exc:
        return EdgeCost.infeasible(str(exc))
    duration = distance_m / gs
    power = drone.base_power + drone.payload_power_coeff * payload_kg
    energy = power * duration * temperature_derating(weather.temperature) / 3600.0
    return EdgeCost(duration=duration, energy=energy, feasible=True)


def frozen_cost_fn(net: Network, wx: WeatherSeries, drone: DroneSpec,
                   payload_kg: float, t_plan: float):
    """Edge-cost function with weather frozen at plan time.

    Weather for edge (u, v) is read at the departure node u via zero-order
    hold at t_plan; one snapshot per plan, so the per-plan graph is static and
    classical shortest-path optimality holds. Costs are memoized per edge.
    """
    step = wx.step_index(t_plan)
    cache: dict[tuple[int, int], EdgeCost] = {}

    def cost(u: int, v: int) -> EdgeCost:
        key = (u, v)
        hit = cache.get(key)
        if hit is not None:
            return hit
        a, b = net.node(u), net.node(v)
        ec = edge_cost(
            distance_m=net.edge_distance(u, v),
            track_bearing=compass_bearing(a, b),
            weather=wx.sample(u, step),
            drone=drone,
            payload_kg=payload_kg,
        )
        cache[key] = ec
        return ec

    return cost


def heuristic_lower_bound(node: Node, goal: Node, drone: DroneSpec, wx_bound: float) -> float:
    """Admissible remaining-duration bound: straight-line distance at the best
    possible ground speed (airspeed + max wind anywhere in the horizon)."""
    if wx_bound < 0:
        raise ValueError("wx_bound must be >= 0")
    return math.hypot(node.x - goal.x, node.y - goal.y) / (drone.airspeed + wx_bound)


def duration_heuristic(net: Network, goal: int, drone: DroneSpec, wx_bound: float):
    """Node-id keyed wrapper around heuristic_lower_bound for the A* planner."""
    goal_node = net.node(goal)

    def h(node_id: int) -> float:
        return heuristic_lower_bound(net.node(node_id), goal_node, drone, wx_bound)

    return h
