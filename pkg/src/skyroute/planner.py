"""Classical optimal routing: Dijkstra and A* over weather-adjusted edge costs.

Both planners share one search core (Dijkstra is A* with a zero heuristic) and
a deterministic tie-break: equal-cost labels prefer fewer hops, then the lower
predecessor id. Determinism matters because the learned models are trained on
these routes; ambiguous ties would corrupt the labels.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Callable

from .errors import NoRoute
from .flightcost import EdgeCost
from .skynet import Network

CostFn = Callable[[int, int], EdgeCost]
Heuristic = Callable[[int], float]


@dataclass
class Route:
    node_sequence: list[int]
    total_duration: float
    total_energy: float
    segment_costs: list[EdgeCost]
    expanded_nodes: int
    plan_time_ns: int

    @property
    def hops(self) -> int:
        return len(self.node_sequence) - 1

    def validate(self, net: Network) -> None:
        seq = self.node_sequence
        for u, v in zip(seq, seq[1:]):
            if not net.has_edge(u, v):
                raise ValueError(f"route step ({u},{v}) is not a network edge")
        if len(self.segment_costs) != len(seq) - 1:
            raise ValueError("segment_costs length disagrees with sequence")
        dur = sum(c.duration for c in self.segment_costs)
        en = sum(c.energy for c in self.segment_costs)
        if abs(dur - self.total_duration) > 1e-9 * max(1.0, abs(dur)):
            raise ValueError("total_duration != sum of segments")
        if abs(en - self.total_energy) > 1e-9 * max(1.0, abs(en)):
            raise ValueError("total_energy != sum of segments")


def _zero_heuristic(_: int) -> float:
    return 0.0


def _search(net: Network, cost_fn: CostFn, heuristic: Heuristic,
            origin: int, dest: int) -> Route:
    t0 = time.perf_counter_ns()
    if origin == dest:
        return Route([origin], 0.0, 0.0, [], expanded_nodes=0,
                     plan_time_ns=time.perf_counter_ns() - t0)

    dist: dict[int, float] = {origin: 0.0}
    hops: dict[int, int] = {origin: 0}
    pred: dict[int, int] = {}
    settled: set[int] = set()
    expanded = 0
    heap: list[tuple[float, float, int, int]] = [(heuristic(origin), 0.0, 0, origin)]

    while heap:
        _, g, hp, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        expanded += 1
        if u == dest:
            break
        for v in net.neighbors(u):
            if v in settled:
                continue
            ec = cost_fn(u, v)
            if not ec.feasible:
                continue
            ng = g + ec.duration
            nh = hp + 1
            old = dist.get(v)
            if (old is None or ng < old
                    or (ng == old and (nh < hops[v] or (nh == hops[v] and u < pred[v])))):
                dist[v] = ng
                hops[v] = nh
                pred[v] = u
                heapq.heappush(heap, (ng + heuristic(v), ng, nh, v))

    if dest not in settled:
        raise NoRoute(f"no feasible route from {origin} to {dest}")

    seq = [dest]
    while seq[-1] != origin:
        seq.append(pred[seq[-1]])
    seq.reverse()
    costs = [cost_fn(u, v) for u, v in zip(seq, seq[1:])]
    return Route(
        node_sequence=seq,
        total_duration=sum(c.duration for c in costs),
        total_energy=sum(c.energy for c in costs),
        segment_costs=costs,
        expanded_nodes=expanded,
        plan_time_ns=time.perf_counter_ns() - t0,
    )


def dijkstra(net: Network, cost_fn: CostFn, origin: int, dest: int) -> Route:
    """Minimum-total-duration route; deterministic tie-break (hops, then id)."""
    _check_ids(net, origin, dest)
    return _search(net, cost_fn, _zero_heuristic, origin, dest)


def astar(net: Network, cost_fn: CostFn, heuristic: Heuristic,
          origin: int, dest: int) -> Route:
    """A* search; with an admissible heuristic the cost equals Dijkstra's."""
    _check_ids(net, origin, dest)
    return _search(net, cost_fn, heuristic, origin, dest)


def _check_ids(net: Network, origin: int, dest: int) -> None:
    n = len(net.nodes)
    if not (0 <= origin < n and 0 <= dest < n):
        raise ValueError(f"origin/dest ({origin},{dest}) outside node range 0..{n-1}")
