"""Expected-externality (BIC-B) payments and the VCG-style DSIC-B baseline.

Sign convention: a positive payment means the node receives money, a
negative one means it pays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .allocation import Srbt, allocate, allocation_of, build_srbt, intermediate_distances
from .errors import InstanceTooLarge, InvalidTypeSpace, NotARouter, NotBiconnected
from .network import Discrete, NetworkModel, is_biconnected, mean_cost, validate_profile

MECHANISMS = ("bicb", "dsicb")
MECHANISM_LABELS = {"bicb": "BIC-B", "dsicb": "DSIC-B"}


@dataclass(frozen=True)
class Outcome:
    mechanism: str
    srbt: Srbt
    k: tuple[int, ...]
    t: tuple[float, ...]
    received: Optional[tuple[float, ...]] = field(default=None)
    paid: Optional[tuple[float, ...]] = field(default=None)

    @property
    def routers(self) -> frozenset[int]:
        return self.srbt.routers

    @property
    def budget_sum(self) -> float:
        return math.fsum(self.t)

    def to_json(self) -> dict:
        doc = {
            "mechanism": MECHANISM_LABELS.get(self.mechanism, self.mechanism),
            "k": list(self.k),
            "t": list(self.t),
            "routers": sorted(r + 1 for r in self.routers),
            "budget_sum": self.budget_sum,
            "srbt": self.srbt.to_json(),
        }
        if self.received is not None:
            doc["received"] = list(self.received)
            doc["paid"] = list(self.paid)
        return doc


# --- BIC-B ---------------------------------------------------------------------


def _check_routers(net: NetworkModel, routers: Iterable[int]) -> frozenset[int]:
    routers = frozenset(routers)
    if net.source in routers or any(not 0 <= r < net.n for r in routers):
        raise ValueError(f"routers must be non-source node ids: {sorted(routers)}")
    return routers


def expected_externalities(net: NetworkModel, routers: Iterable[int]) -> tuple[float, ...]:
    """xi_j: expected total cost of the routers other than j, from prior means."""
    routers = _check_routers(net, routers)
    means = net.means()
    return tuple(
        math.fsum(means[l] for l in sorted(routers) if l != j) for j in range(net.n)
    )


def bicb_payments(net: NetworkModel, routers: Iterable[int]) -> tuple[float, ...]:
    """t_i = (1/(n-1)) * sum_{j != i} xi_j - xi_i."""
    xi = expected_externalities(net, routers)
    n = net.n
    return tuple(
        math.fsum(xi[j] for j in range(n) if j != i) / (n - 1) - xi[i] for i in range(n)
    )


def bicb_payments_closed_form(net: NetworkModel, routers: Iterable[int]) -> tuple[float, ...]:
    """Same payments via (n E_i - S)/(n-1) for routers and -S/(n-1) otherwise."""
    routers = _check_routers(net, routers)
    means = net.means()
    n = net.n
    total = math.fsum(means[l] for l in sorted(routers))
    return tuple(
        (n * means[i] - total) / (n - 1) if i in routers else -total / (n - 1)
        for i in range(n)
    )


def nonrouter_payment(net: NetworkModel, routers: Iterable[int]) -> float:
    """The common payment of every non-router (the source is always one)."""
    routers = _check_routers(net, routers)
    return bicb_payments(net, routers)[net.source]


def router_utility(
    net: NetworkModel, routers: Iterable[int], announced: Sequence[float], i: int
) -> float:
    """Router utility with the non-router charge credited back: -cost - t_m + t_i."""
    routers = _check_routers(net, routers)
    if i not in routers:
        raise NotARouter(f"node {i + 1} is not a router")
    t = bicb_payments(net, routers)
    return -float(announced[i]) - t[net.source] + t[i]


def ir_threshold(net: NetworkModel, i: int) -> float:
    n = net.n
    return n / (n - 1) * mean_cost(net.type_spaces[i])


def bicb_outcome(net: NetworkModel, srbt: Srbt) -> Outcome:
    return Outcome("bicb", srbt, allocation_of(srbt, net.n), bicb_payments(net, srbt.routers))


# --- DSIC-B --------------------------------------------------------------------


def clarke_amount(
    announced: Sequence[float], router: int, dist: Sequence[float], dist_without: Sequence[float], j: int
) -> float:
    """VCG payment for ``router`` on the least cost path to ``j``."""
    return announced[router] + dist_without[j] - dist[j]


def dsicb_payments(
    net: NetworkModel, announced: Sequence[float], srbt: Optional[Srbt] = None
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-node (received, paid) under the DSIC-B baseline.

    Every non-source node j whose tree parent p is a router pays p the Clarke
    amount ``theta_p + d_{G-p}(s, j) - d_G(s, j)``. Each router p is credited
    the unicast VCG amount for every node of its subtree, not only for its
    children, so the mechanism runs a deficit whenever the tree is deeper
    than two router levels.
    """
    announced = validate_profile(net, announced)
    if not is_biconnected(net):
        raise NotBiconnected("DSIC-B requires a bi-connected network")
    if srbt is None:
        srbt = build_srbt(net, announced)
    s = net.source
    dist = intermediate_distances(net.adj, announced, s)
    received = [0.0] * net.n
    paid = [0.0] * net.n
    for p in sorted(srbt.routers):
        dist_wo = intermediate_distances(net.adj, announced, s, removed=p)
        for j in srbt.descendants(p):
            amount = clarke_amount(announced, p, dist, dist_wo, j)
            received[p] += amount
            if srbt.parent[j] == p:
                paid[j] = amount
    return tuple(received), tuple(paid)


def dsicb_outcome(net: NetworkModel, announced: Sequence[float], srbt: Optional[Srbt] = None) -> Outcome:
    if srbt is None:
        srbt = build_srbt(net, announced)
    received, paid = dsicb_payments(net, announced, srbt)
    t = tuple(r - p for r, p in zip(received, paid))
    return Outcome("dsicb", srbt, allocation_of(srbt, net.n), t, received, paid)


def compute_outcome(
    net: NetworkModel, announced: Sequence[float], mechanism: str = "bicb", allocation: str = "lcp"
) -> Outcome:
    srbt = allocate(net, announced, allocation)
    if mechanism == "bicb":
        return bicb_outcome(net, srbt)
    if mechanism == "dsicb":
        return dsicb_outcome(net, announced, srbt)
    raise ValueError(f"unknown mechanism {mechanism!r}; expected one of {MECHANISMS}")


# --- dominant-strategy truthfulness (brute force) -------------------------------


def _discrete_supports(net: NetworkModel, max_values: int) -> list[tuple[float, ...]]:
    supports = []
    for i, ts in enumerate(net.type_spaces):
        if not isinstance(ts, Discrete):
            raise InvalidTypeSpace(f"node {i + 1} needs a discrete type space for enumeration")
        if len(ts.values) > max_values:
            raise InstanceTooLarge(f"node {i + 1} has {len(ts.values)} types (max {max_values})")
        supports.append(ts.values)
    return supports


def realized_utility(outcome: Outcome, i: int, true_cost: float) -> float:
    return -true_cost * outcome.k[i] + outcome.t[i]


def find_dominant_strategy_violation(
    net: NetworkModel, mechanism: str = "dsicb", allocation: str = "lcp", tol: float = 1e-9
) -> Optional[dict]:
    """First (node, others' reports, true type, misreport) where lying pays, else None."""
    if net.n > 6:
        raise InstanceTooLarge(f"dominant-strategy check limited to 6 nodes, got {net.n}")
    supports = _discrete_supports(net, 4)
    cache: dict[tuple[float, ...], Outcome] = {}

    def outcome(profile):
        if profile not in cache:
            cache[profile] = compute_outcome(net, profile, mechanism, allocation)
        return cache[profile]

    for i in range(net.n):
        others = [supports[j] if j != i else (None,) for j in range(net.n)]
        for rest in itertools.product(*others):
            for true in supports[i]:
                truthful = list(rest)
                truthful[i] = true
                u_true = realized_utility(outcome(tuple(truthful)), i, true)
                for lie in supports[i]:
                    if lie == true:
                        continue
                    lied = list(rest)
                    lied[i] = lie
                    u_lie = realized_utility(outcome(tuple(lied)), i, true)
                    if u_lie > u_true + tol:
                        return {
                            "node": i,
                            "profile": truthful,
                            "true_type": true,
                            "misreport": lie,
                            "truthful_utility": u_true,
                            "misreport_utility": u_lie,
                        }
    return None


def dsicb_truthfulness_check(net: NetworkModel, profile: Optional[Sequence[float]] = None) -> bool:
    """Brute-force dominant-strategy truthfulness of DSIC-B on a small discrete instance.

    ``profile`` is accepted for interface symmetry; every announcement profile
    in the type spaces is enumerated regardless.
    """
    if net.n == 2:
        return True  # no node can relay, every payment is zero
    if not is_biconnected(net):
        raise NotBiconnected("DSIC-B requires a bi-connected network")
    return find_dominant_strategy_violation(net, "dsicb") is None
