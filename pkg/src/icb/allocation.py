"""Least-cost paths, source rooted broadcast trees and the allocation rule.

Path cost counts only the nodes strictly between the source and the
destination: the source does not charge for its own transmission and the
destination does not forward to itself.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InstanceTooLarge
from .network import NetworkModel, validate_profile

ALLOCATION_RULES = ("lcp", "optimal")
MAX_EXACT_NODES = 16


@dataclass(frozen=True)
class Srbt:
    """Source rooted broadcast tree.

    ``parent[v]`` is ``None`` only for the source. ``routers`` are the internal
    tree nodes other than the source; ``cost`` is the sum of their costs.
    """

    source: int
    parent: tuple[Optional[int], ...]
    routers: frozenset[int]
    cost: float

    @property
    def n(self) -> int:
        return len(self.parent)

    def children(self, v: int) -> list[int]:
        return [c for c, p in enumerate(self.parent) if p == v]

    def children_map(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(self.n)}
        for c, p in enumerate(self.parent):
            if p is not None:
                out[p].append(c)
        return out

    def path_to(self, v: int) -> list[int]:
        """Tree path from the source to ``v``, both ends included."""
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def descendants(self, v: int) -> list[int]:
        kids = self.children_map()
        out, stack = [], list(kids[v])
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(kids[u])
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "parent": {str(v + 1): p + 1 for v, p in enumerate(self.parent) if p is not None},
            "routers": sorted(r + 1 for r in self.routers),
            "cost": self.cost,
        }


def _tree_from_parent(
    source: int, parent: Sequence[Optional[int]], theta: Sequence[float]
) -> Srbt:
    routers = frozenset(p for p in parent if p is not None and p != source)
    cost = math.fsum(theta[r] for r in sorted(routers))
    return Srbt(source, tuple(parent), routers, cost)


def intermediate_distances(
    adj: Sequence[Sequence[int]],
    theta: Sequence[float],
    source: int,
    removed: Optional[int] = None,
) -> list[float]:
    """Node-weighted Dijkstra; ``dist[v]`` sums the costs of intermediate nodes.

    Nodes unreachable (or the ``removed`` node itself) get ``math.inf``.
    """
    n = len(adj)
    dist = [math.inf] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        step = d + (theta[u] if u != source else 0.0)
        for w in adj[u]:
            if w == removed or done[w]:
                continue
            if step < dist[w]:
                dist[w] = step
                heapq.heappush(heap, (step, w))
    if removed is not None:
        dist[removed] = math.inf
    return dist


def least_cost_paths(
    net: NetworkModel, theta: Sequence[float]
) -> tuple[list[float], list[Optional[int]]]:
    """Distances from the source and one optimal predecessor per node.

    Among optimal predecessors the smallest node id wins.
    """
    theta = validate_profile(net, theta)
    s = net.source
    dist = intermediate_distances(net.adj, theta, s)
    parent: list[Optional[int]] = [None] * net.n
    scale = max(theta) * net.n
    tol = 1e-12 * scale
    for v in range(net.n):
        if v == s:
            continue
        for u in net.adj[v]:  # sorted ascending
            via = dist[u] + (theta[u] if u != s else 0.0)
            if abs(via - dist[v]) <= tol and (u == s or dist[u] < dist[v]):
                parent[v] = u
                break
    return dist, parent


def build_srbt(net: NetworkModel, theta: Sequence[float]) -> Srbt:
    """Shortest-path (least cost path) broadcast tree."""
    theta = validate_profile(net, theta)
    _, parent = least_cost_paths(net, theta)
    return _tree_from_parent(net.source, parent, theta)


def _feasible(mask_adj: list[int], source: int, routers_mask: int, all_mask: int) -> bool:
    backbone = routers_mask | (1 << source)
    covered = backbone
    b = backbone
    while b:
        low = b & -b
        covered |= mask_adj[low.bit_length() - 1]
        b ^= low
    if covered != all_mask:
        return False
    # backbone must induce a connected subgraph
    seen = 1 << source
    frontier = seen
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= mask_adj[low.bit_length() - 1]
            f ^= low
        nxt &= backbone & ~seen
        seen |= nxt
        frontier = nxt
    return seen == backbone


def _bfs_tree(net: NetworkModel, backbone: frozenset[int]) -> list[Optional[int]]:
    parent: list[Optional[int]] = [None] * net.n
    seen = {net.source}
    queue = deque([net.source])
    while queue:
        u = queue.popleft()
        for w in net.adj[u]:
            if w not in seen:
                seen.add(w)
                parent[w] = u
                if w in backbone:
                    queue.append(w)
    return parent


def optimal_broadcast_tree(net: NetworkModel, theta: Sequence[float]) -> Srbt:
    """Exact minimum-cost broadcast tree by enumerating router sets.

    A router set is feasible when it induces, together with the source, a
    connected subgraph that dominates the whole graph. Ties go to the
    lexicographically smallest router set. Exponential; limited to 16 nodes.
    """
    theta = validate_profile(net, theta)
    if net.n > MAX_EXACT_NODES:
        raise InstanceTooLarge(f"exact broadcast tree limited to {MAX_EXACT_NODES} nodes, got {net.n}")
    s = net.source
    others = [v for v in range(net.n) if v != s]
    mask_adj = [sum(1 << w for w in net.adj[v]) for v in range(net.n)]
    all_mask = (1 << net.n) - 1
    tol = 1e-12 * max(theta) * net.n

    best_key: Optional[tuple[float, tuple[int, ...]]] = None
    for sub in range(1 << len(others)):
        members = tuple(others[k] for k in range(len(others)) if sub >> k & 1)
        cost = math.fsum(theta[v] for v in members)
        if best_key is not None and cost > best_key[0] + tol:
            continue
        rmask = sum(1 << v for v in members)
        if not _feasible(mask_adj, s, rmask, all_mask):
            continue
        if best_key is None or cost < best_key[0] - tol or (
            abs(cost - best_key[0]) <= tol and members < best_key[1]
        ):
            best_key = (cost, members)

    assert best_key is not None  # the full set is always feasible on a connected graph
    routers = frozenset(best_key[1])
    parent = _bfs_tree(net, routers | {s})
    tree = _tree_from_parent(s, parent, theta)
    # a minimal feasible set never leaves a router as a leaf
    assert tree.routers == routers, (tree.routers, routers)
    return tree


def allocate(net: NetworkModel, theta: Sequence[float], rule: str = "lcp") -> Srbt:
    if rule == "lcp":
        return build_srbt(net, theta)
    if rule == "optimal":
        return optimal_broadcast_tree(net, theta)
    raise ValueError(f"unknown allocation rule {rule!r}; expected one of {ALLOCATION_RULES}")


def allocation_of(srbt: Srbt, n: int) -> tuple[int, ...]:
    return tuple(1 if i in srbt.routers else 0 for i in range(n))
