"""Node-weighted network model, prior type spaces and random instance generation.

Node ids are 0-based everywhere inside the package. Human-facing output and
the JSON network file use 1-based ids.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import networkx as nx
import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    GenerationFailed,
    InvalidNetwork,
    InvalidTypeSpace,
    LengthMismatch,
    SchemaError,
    SelfLoop,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class Discrete:
    """Finite prior over forwarding costs."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if not values or len(values) != len(probs):
            raise InvalidTypeSpace("values and probs must be non-empty and of equal length")
        if any(not (v > 0 and math.isfinite(v)) for v in values):
            raise InvalidTypeSpace(f"type values must be positive: {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidTypeSpace(f"type values must be strictly increasing: {values}")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise InvalidTypeSpace(f"probabilities must be non-negative and sum to 1: {probs}")

    @classmethod
    def uniform(cls, values: Iterable[float]) -> "Discrete":
        values = sorted(float(v) for v in values)
        return cls(tuple(values), tuple(1.0 / len(values) for _ in values))

    def support(self) -> tuple[float, ...]:
        return self.values


@dataclass(frozen=True)
class UniformInterval:
    """Continuous uniform prior on ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (0 < self.lo < self.hi and math.isfinite(self.hi)):
            raise InvalidTypeSpace(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")


TypeSpace = Union[Discrete, UniformInterval]


def mean_cost(ts: TypeSpace) -> float:
    if isinstance(ts, Discrete):
        return math.fsum(v * p for v, p in zip(ts.values, ts.probs))
    if isinstance(ts, UniformInterval):
        return (ts.lo + ts.hi) / 2.0
    raise InvalidTypeSpace(f"unknown type space {ts!r}")


@dataclass(frozen=True)
class NetworkModel:
    """Immutable, validated network. Build instances with :func:`build_network`."""

    n: int
    edges: frozenset[tuple[int, int]]
    source: int
    type_spaces: tuple[TypeSpace, ...]
    adj: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def means(self) -> tuple[float, ...]:
        return tuple(mean_cost(ts) for ts in self.type_spaces)

    def with_source(self, source: int) -> "NetworkModel":
        return build_network(self.n, sorted(self.edges), source, self.type_spaces)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def to_json(self) -> dict:
        types = []
        for ts in self.type_spaces:
            if isinstance(ts, Discrete):
                types.append({"discrete": {"values": list(ts.values), "probs": list(ts.probs)}})
            else:
                types.append({"uniform": {"lo": ts.lo, "hi": ts.hi}})
        return {
            "n": self.n,
            "source": self.source + 1,
            "edges": [[u + 1, v + 1] for u, v in sorted(self.edges)],
            "types": types,
        }


def _bfs_reach(adj: Sequence[Sequence[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def build_network(
    n: int,
    edges: Iterable[Sequence[int]],
    source: int,
    type_spaces: Sequence[TypeSpace],
) -> NetworkModel:
    """Validate a graph description and return a :class:`NetworkModel`.

    Raises DisconnectedGraph, DuplicateEdge, SelfLoop, InvalidTypeSpace, or
    InvalidNetwork for out-of-range ids and node counts below two.
    """
    if n < 2:
        raise InvalidNetwork(f"need at least 2 nodes, got {n}")
    if not 0 <= source < n:
        raise InvalidNetwork(f"source {source} out of range")
    if len(type_spaces) != n:
        raise InvalidTypeSpace(f"expected {n} type spaces, got {len(type_spaces)}")
    for ts in type_spaces:
        if not isinstance(ts, (Discrete, UniformInterval)):
            raise InvalidTypeSpace(f"not a type space: {ts!r}")

    edge_set: set[tuple[int, int]] = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidNetwork(f"edge ({u}, {v}) references an unknown node")
        if u == v:
            raise SelfLoop(f"self loop at node {u}")
        key = (min(u, v), max(u, v))
        if key in edge_set:
            raise DuplicateEdge(f"duplicate edge {key}")
        edge_set.add(key)

    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edge_set:
        nbrs[u].append(v)
        nbrs[v].append(u)
    adj = tuple(tuple(sorted(a)) for a in nbrs)
    if len(_bfs_reach(adj, source)) != n:
        raise DisconnectedGraph("graph is not connected")
    return NetworkModel(n, frozenset(edge_set), source, tuple(type_spaces), adj)


def is_connected(net: NetworkModel) -> bool:
    return len(_bfs_reach(net.adj, net.source)) == net.n


def is_biconnected(net: NetworkModel) -> bool:
    """True iff the graph has at least 3 nodes and no cut vertex."""
    if net.n < 3:
        return False
    return nx.is_biconnected(net.to_networkx())


def validate_profile(net: NetworkModel, theta: Sequence[float]) -> tuple[float, ...]:
    theta = tuple(float(x) for x in theta)
    if len(theta) != net.n:
        raise LengthMismatch(f"profile has {len(theta)} entries, network has {net.n} nodes")
    if any(not (x > 0 and math.isfinite(x)) for x in theta):
        raise ValueError(f"costs must be positive and finite: {theta}")
    return theta


def _random_spanning_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    order = rng.permutation(n)
    edges = []
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        u, v = int(order[k]), int(parent)
        edges.append((min(u, v), max(u, v)))
    return edges


def random_graph_edges(
    n: int, edge_density: float, rng: np.random.Generator, retries: int = 20
) -> list[tuple[int, int]]:
    """Erdos-Renyi G(n, p) edges, resampled until connected.

    After ``retries`` disconnected draws the last draw is augmented with a
    random spanning tree, so the result is always connected.
    """
    iu, ju = np.triu_indices(n, k=1)
    edges: list[tuple[int, int]] = []
    for _ in range(retries):
        mask = rng.random(len(iu)) < edge_density
        edges = [(int(a), int(b)) for a, b in zip(iu[mask], ju[mask])]
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        if len(_bfs_reach(nbrs, 0)) == n:
            return edges
    merged = set(edges) | set(_random_spanning_edges(n, rng))
    return sorted(merged)


def random_network(
    n: int,
    edge_density: float = 0.3,
    cost_lo: float = 1.0,
    cost_hi: float = 50.0,
    rng_seed: int = 0,
    source: int = 0,
) -> tuple[NetworkModel, tuple[float, ...]]:
    """Random connected network with U[cost_lo, cost_hi] priors and drawn true costs."""
    if n < 2:
        raise InvalidNetwork("need at least 2 nodes")
    if not 0 < edge_density <= 1:
        raise InvalidNetwork(f"edge density must be in (0, 1], got {edge_density}")
    if not cost_lo < cost_hi:
        raise InvalidTypeSpace("cost_lo must be below cost_hi")
    rng = np.random.default_rng(rng_seed)
    edges = random_graph_edges(n, edge_density, rng)
    theta = tuple(float(x) for x in rng.uniform(cost_lo, cost_hi, size=n))
    ts = UniformInterval(cost_lo, cost_hi)
    net = build_network(n, edges, source, [ts] * n)
    if not is_connected(net):  # pragma: no cover - spanning-tree augmentation forbids this
        raise GenerationFailed("could not generate a connected graph")
    return net, theta


def random_discrete_network(
    n: int,
    n_values: int = 2,
    edge_density: float = 0.5,
    cost_lo: float = 1.0,
    cost_hi: float = 50.0,
    rng_seed: int = 0,
    source: int = 0,
) -> tuple[NetworkModel, tuple[float, ...]]:
    """Random connected network whose priors are finite (for exact enumeration).

    Each node gets ``n_values`` distinct integer costs in ``[cost_lo, cost_hi]``
    with Dirichlet(1) probabilities; the returned profile is a draw from the priors.
    """
    rng = np.random.default_rng(rng_seed)
    edges = random_graph_edges(n, edge_density, rng)
    spaces = []
    theta = []
    pool = np.arange(math.ceil(cost_lo), math.floor(cost_hi) + 1)
    for _ in range(n):
        vals = np.sort(rng.choice(pool, size=n_values, replace=False)).astype(float)
        probs = rng.dirichlet(np.ones(n_values))
        probs[-1] = 1.0 - probs[:-1].sum()
        spaces.append(Discrete(tuple(vals), tuple(probs)))
        theta.append(float(rng.choice(vals, p=probs)))
    return build_network(n, edges, source, spaces), tuple(theta)


def paper_fixture() -> tuple[NetworkModel, tuple[float, ...]]:
    """Four-node path 1-2-3-4 with source 1 and announced costs (10, 15, 13, 8)."""
    spaces = [
        Discrete.uniform([10, 11]),
        Discrete.uniform([15, 16]),
        Discrete.uniform([12, 13]),
        Discrete.uniform([7, 8]),
    ]
    net = build_network(4, [(0, 1), (1, 2), (2, 3)], 0, spaces)
    return net, (10.0, 15.0, 13.0, 8.0)


# --- JSON network files ------------------------------------------------------


def _parse_type(obj) -> TypeSpace:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SchemaError(f"type entry must have exactly one key: {obj!r}")
    if "discrete" in obj:
        d = obj["discrete"]
        try:
            return Discrete(tuple(d["values"]), tuple(d["probs"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad discrete type: {d!r}") from exc
    if "uniform" in obj:
        u = obj["uniform"]
        try:
            return UniformInterval(u["lo"], u["hi"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad uniform type: {u!r}") from exc
    raise SchemaError(f"unknown type kind: {list(obj)}")


def network_from_json(data: dict) -> NetworkModel:
    try:
        n = int(data["n"])
        source = int(data["source"]) - 1
        edges = [(int(u) - 1, int(v) - 1) for u, v in data["edges"]]
        types = [_parse_type(t) for t in data["types"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidTypeSpace):
            raise
        raise SchemaError(f"malformed network document: {exc}") from exc
    return build_network(n, edges, source, types)


def load_network(path: str | Path) -> NetworkModel:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return network_from_json(data)


def dump_network(net: NetworkModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_json(), fh, indent=2)
        fh.write("\n")
