"""In-process mediator: elicits reports, issues internal tables, replays a broadcast.

A node's internal table has one row per broadcast source. Each row holds the
children to forward to and the payment the node receives (positive) or
makes (negative). All money is settled at the mediator's ledger.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DeliveryFailure
from .network import NetworkModel
from .payments import compute_outcome


@dataclass(frozen=True)
class InternalTableEntry:
    source_id: int
    node_list: tuple[int, ...]
    payment: float


@dataclass(frozen=True)
class BroadcastTrace:
    source: int
    delivery_order: tuple[tuple[int, int], ...]
    ledger: tuple[float, ...]
    packets_received: tuple[int, ...]

    @property
    def ledger_sum(self) -> float:
        return math.fsum(self.ledger)

    def events_jsonl(self) -> str:
        return "".join(
            json.dumps({"from": u + 1, "to": v + 1}) + "\n" for u, v in self.delivery_order
        )

    def ledger_jsonl(self) -> str:
        return "".join(
            json.dumps({"node": i + 1, "net": x}) + "\n" for i, x in enumerate(self.ledger)
        )


def mediator_round(
    net: NetworkModel,
    announced: Sequence[float],
    mechanism: str = "bicb",
    allocation: str = "lcp",
) -> dict[int, InternalTableEntry]:
    """One table entry per node for a broadcast from ``net.source``.

    Raises NotBiconnected for DSIC-B on a network with a cut vertex.
    """
    outcome = compute_outcome(net, announced, mechanism, allocation)
    kids = outcome.srbt.children_map()
    return {
        v: InternalTableEntry(net.source, tuple(sorted(kids[v])), outcome.t[v])
        for v in range(net.n)
    }


def install(
    tables: dict[int, dict[int, InternalTableEntry]], round_entries: Mapping[int, InternalTableEntry]
) -> dict[int, dict[int, InternalTableEntry]]:
    """Add one round's entries to per-node tables keyed by source id."""
    for node, entry in round_entries.items():
        tables.setdefault(node, {})[entry.source_id] = entry
    return tables


def _entry(tables, node: int, source: int) -> InternalTableEntry:
    row = tables[node]
    if isinstance(row, InternalTableEntry):
        return row
    return row[source]


def execute_broadcast(tables: Mapping, net: NetworkModel) -> BroadcastTrace:
    """Forward a packet from the source by table lookup and settle payments.

    ``tables`` maps node -> entry (one round) or node -> {source_id: entry}.
    """
    s = net.source
    received = [0] * net.n
    events: list[tuple[int, int]] = []
    queue = deque([s])
    while queue:
        u = queue.popleft()
        entry = _entry(tables, u, s)
        for v in entry.node_list:
            if v not in net.adj[u]:
                raise DeliveryFailure(f"node {u + 1} lists non-neighbour {v + 1}")
            if v == s or received[v]:
                raise DeliveryFailure(f"node {v + 1} would receive the packet twice")
            received[v] = 1
            events.append((u, v))
            queue.append(v)
    missing = [v + 1 for v in range(net.n) if v != s and not received[v]]
    if missing:
        raise DeliveryFailure(f"nodes never reached: {missing}")
    ledger = tuple(_entry(tables, v, s).payment for v in range(net.n))
    return BroadcastTrace(s, tuple(events), ledger, tuple(received))
