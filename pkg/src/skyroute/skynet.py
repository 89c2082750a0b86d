"""Skyway network generation.

Three stages: minimum-separation node placement, a degree-limited spanning
tree built greedily in Kruskal order, and random augmentation edges between
nearby non-adjacent pairs. Each stage draws from its own seeded RNG stream so
changing one stage's parameters never perturbs the others.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, PlacementInfeasible
from .jsonio import dump_json, load_json

logger = logging.getLogger(__name__)

# Per-stage RNG stream tags (mixed with the config seed).
_STREAM_NODES = 1
_STREAM_EXTRA_EDGES = 2

PLACEMENT_ATTEMPTS_PER_NODE = 10_000


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class NetConfig:
    node_count: int = 50
    bbox: tuple[float, float] = (10_000.0, 10_000.0)
    min_separation_m: float = 500.0
    max_degree: int = 4
    extra_edges: int = 25
    max_extra_edge_m: float = 3_000.0
    seed: int = 0

    def validate(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if self.bbox[0] <= 0 or self.bbox[1] <= 0:
            raise ValueError("bbox dimensions must be positive")
        if self.min_separation_m < 0:
            raise ValueError("min_separation_m must be >= 0")
        if self.max_degree < 2:
            raise ValueError("max_degree must be >= 2")
        if self.extra_edges < 0:
            raise ValueError("extra_edges must be >= 0")


@dataclass
class Network:
    nodes: list[Node]
    edges: list[tuple[int, int, float]]  # (u, v, distance_m) with u < v
    adjacency: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.adjacency:
            self.adjacency = {n.id: [] for n in self.nodes}
            for u, v, _ in self.edges:
                self.adjacency[u].append(v)
                self.adjacency[v].append(u)
            for nid in self.adjacency:
                self.adjacency[nid].sort()

    def neighbors(self, node_id: int) -> list[int]:
        return self.adjacency[node_id]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def edge_distance(self, u: int, v: int) -> float:
        return euclidean(self.nodes[u], self.nodes[v])

    def degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        seen = {self.nodes[0].id}
        stack = [self.nodes[0].id]
        while stack:
            u = stack.pop()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    def validate(self) -> None:
        """Check the structural invariants; raises ValueError on violation."""
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(self.nodes))):
            raise ValueError("node ids must be dense 0..N-1 in order")
        seen = set()
        for u, v, d in self.edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < len(ids) and 0 <= v < len(ids)):
                raise ValueError(f"edge ({u},{v}) references unknown node")
            if u > v:
                raise ValueError(f"edge ({u},{v}) not in canonical u<v order")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            actual = self.edge_distance(u, v)
            if not math.isclose(d, actual, rel_tol=1e-9, abs_tol=1e-9):
                raise ValueError(f"edge ({u},{v}) distance {d} != euclidean {actual}")
            if d <= 0:
                raise ValueError(f"edge ({u},{v}) has non-positive length")
        if not self.is_connected():
            raise ValueError("network is not connected")

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in self.nodes],
            "edges": [{"u": u, "v": v, "distance": d} for u, v, d in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        try:
            nodes = [Node(id=n["id"], x=float(n["x"]), y=float(n["y"])) for n in data["nodes"]]
            edges = [(e["u"], e["v"], float(e["distance"])) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed network object: {exc}") from exc
        return cls(nodes=nodes, edges=edges)


def euclidean(a: Node, b: Node) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def sample_nodes(cfg: NetConfig) -> list[Node]:
    """Place node_count nodes uniformly in the bbox, all pairs >= min_separation_m apart.

    Rejection sampling with a bounded attempt budget; raises PlacementInfeasible
    once the budget is exhausted.
    """
    cfg.validate()
    rng = np.random.default_rng([cfg.seed, _STREAM_NODES])
    width, height = cfg.bbox
    min_sep_sq = cfg.min_separation_m ** 2
    budget = PLACEMENT_ATTEMPTS_PER_NODE * cfg.node_count

    placed_x: list[float] = []
    placed_y: list[float] = []
    attempts = 0
    while len(placed_x) < cfg.node_count:
        if attempts >= budget:
            raise PlacementInfeasible(
                f"placed {len(placed_x)}/{cfg.node_count} nodes after {attempts} attempts; "
                f"min_separation_m={cfg.min_separation_m} is too tight for bbox {cfg.bbox}"
            )
        attempts += 1
        x = rng.uniform(0.0, width)
        y = rng.uniform(0.0, height)
        ok = True
        for px, py in zip(placed_x, placed_y):
            if (px - x) ** 2 + (py - y) ** 2 < min_sep_sq:
                ok = False
                break
        if ok:
            placed_x.append(x)
            placed_y.append(y)
    return [Node(id=i, x=placed_x[i], y=placed_y[i]) for i in range(cfg.node_count)]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def build_mst(nodes: list[Node], max_degree: int) -> list[tuple[int, int, float]]:
    """Spanning tree in Kruskal order, skipping edges that would exceed max_degree.

    The degree filter can disconnect the greedy tree in adversarial layouts; in
    that case the cap is relaxed by one and the construction retried (logged as
    a warning). Exact degree-constrained MST is NP-hard, so this is an
    explicitly documented heuristic.
    """
    n = len(nodes)
    if n <= 1:
        return []
    candidates = [
        (euclidean(nodes[i], nodes[j]), i, j)
        for i in range(n)
        for j in range(i + 1, n)
    ]
    candidates.sort()

    cap = max_degree
    while True:
        uf = _UnionFind(n)
        degree = [0] * n
        tree: list[tuple[int, int, float]] = []
        for d, i, j in candidates:
            if degree[i] >= cap or degree[j] >= cap:
                continue
            if uf.union(i, j):
                tree.append((i, j, d))
                degree[i] += 1
                degree[j] += 1
                if len(tree) == n - 1:
                    return tree
        logger.warning(
            "degree cap %d disconnected the greedy spanning tree (%d/%d edges); retrying with %d",
            cap, len(tree), n - 1, cap + 1,
        )
        cap += 1


def add_random_edges(net: Network, cfg: NetConfig) -> Network:
    """Add up to cfg.extra_edges short augmentation edges between non-adjacent pairs.

    Eligible pairs have Euclidean distance <= cfg.max_extra_edge_m. Pairs are
    drawn uniformly without replacement from the eligible set; if fewer exist
    than requested all of them are added.
    """
    if cfg.extra_edges == 0:
        return net
    eligible = []
    n = len(net.nodes)
    for i in range(n):
        for j in range(i + 1, n):
            if net.has_edge(i, j):
                continue
            d = euclidean(net.nodes[i], net.nodes[j])
            if d <= cfg.max_extra_edge_m:
                eligible.append((i, j, d))
    take = min(cfg.extra_edges, len(eligible))
    if take < cfg.extra_edges:
        logger.info("only %d eligible augmentation pairs (requested %d)", len(eligible), cfg.extra_edges)
    rng = np.random.default_rng([cfg.seed, _STREAM_EXTRA_EDGES])
    chosen_idx = rng.choice(len(eligible), size=take, replace=False) if take else []
    new_edges = net.edges + [eligible[k] for k in sorted(chosen_idx)]
    new_edges.sort()
    return Network(nodes=net.nodes, edges=new_edges)


def generate_network(cfg: NetConfig) -> Network:
    """Full pipeline: placement, degree-limited spanning tree, augmentation."""
    nodes = sample_nodes(cfg)
    tree = build_mst(nodes, cfg.max_degree)
    net = Network(nodes=nodes, edges=sorted(tree))
    net = add_random_edges(net, cfg)
    net.validate()
    return net


def write_network(net: Network, path: str | Path) -> None:
    dump_json(net.to_dict(), path)


def load_network(path: str | Path) -> Network:
    net = Network.from_dict(load_json(path))
    net.validate()
    return net
