"""Monte Carlo comparison of BIC-B against DSIC-B (APR and WOR per node count)."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .allocation import least_cost_paths
from .errors import ConfigInvalid, EmptyInput, NoPayers, NoRouters
from .network import NetworkModel, is_biconnected, random_network
from .payments import MECHANISMS, Outcome, compute_outcome

RECORD_COLUMNS = [
    "n", "instance", "seed", "mechanism", "apr", "wor", "budget_sum", "router_count", "skipped_reason",
]
SUMMARY_COLUMNS = ["n", "mechanism", "mean_apr", "mean_wor", "min_wor", "max_wor", "skips"]


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...] = (5, 10, 15, 20, 25, 30, 35, 40)
    instances: int = 100
    cost_range: tuple[float, float] = (1.0, 50.0)
    edge_density: float = 0.3
    base_seed: int = 0
    mechanisms: tuple[str, ...] = MECHANISMS
    allocation_rule: str = "lcp"
    biconnect_retries: int = 50

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "cost_range", tuple(float(c) for c in self.cost_range))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        if self.instances < 1:
            raise ConfigInvalid("instances must be at least 1")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise ConfigInvalid(f"every n must be at least 2: {self.n_values}")
        lo, hi = self.cost_range
        if not 0 < lo < hi:
            raise ConfigInvalid(f"invalid cost range {self.cost_range}")
        if not 0 < self.edge_density <= 1:
            raise ConfigInvalid(f"edge density must be in (0, 1]: {self.edge_density}")
        if not self.mechanisms or any(m not in MECHANISMS for m in self.mechanisms):
            raise ConfigInvalid(f"mechanisms must be drawn from {MECHANISMS}: {self.mechanisms}")
        if self.allocation_rule not in ("lcp", "optimal"):
            raise ConfigInvalid(f"unknown allocation rule {self.allocation_rule!r}")
        if self.biconnect_retries < 1:
            raise ConfigInvalid("biconnect_retries must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from exc


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    instance: int
    seed: int
    mechanism: str
    apr: Optional[float]
    wor: Optional[float]
    budget_sum: Optional[float]
    router_count: int
    skipped_reason: str = ""


def instance_seed(base_seed: int, n: int, instance: int, attempt: int = 0) -> int:
    digest = hashlib.blake2b(f"{n}:{instance}:{attempt}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "big")) & (2**63 - 1)


def payments_made(outcome: Outcome) -> dict[int, float]:
    """Money each paying node hands over, keyed by node."""
    if outcome.mechanism == "bicb":
        return {i: -x for i, x in enumerate(outcome.t) if i not in outcome.routers and x < 0}
    return {i: x for i, x in enumerate(outcome.paid) if x > 0}


def compute_apr(outcome: Outcome) -> float:
    """Average payment to routers."""
    routers = sorted(outcome.routers)
    if not routers:
        raise NoRouters("no routers in this instance")
    source = outcome.t if outcome.mechanism == "bicb" else outcome.received
    return math.fsum(source[r] for r in routers) / len(routers)


def compute_wor(outcome: Outcome, net: NetworkModel, theta: Sequence[float]) -> float:
    """Worst overpayment ratio: max payment / least-cost-path value over payers.

    Payers one hop from the source have a zero path value and are skipped.
    """
    dist, _ = least_cost_paths(net, theta)
    ratios = [amount / dist[i] for i, amount in payments_made(outcome).items() if dist[i] > 0]
    if not ratios:
        raise NoPayers("no paying node lies more than one hop from the source")
    return max(ratios)


def _record(n, instance, seed, outcome: Outcome, net, theta) -> ExperimentRecord:
    reasons = []
    try:
        apr = compute_apr(outcome)
    except NoRouters:
        apr = None
        reasons.append("no_routers")
    try:
        wor = compute_wor(outcome, net, theta)
    except NoPayers:
        wor = None
        reasons.append("no_payers")
    return ExperimentRecord(
        n, instance, seed, outcome.mechanism, apr, wor, outcome.budget_sum,
        len(outcome.routers), ";".join(reasons),
    )


def run_instance(cfg: ExperimentConfig, n: int, instance: int) -> list[ExperimentRecord]:
    lo, hi = cfg.cost_range
    need_bicon = "dsicb" in cfg.mechanisms
    attempts = cfg.biconnect_retries if need_bicon else 1
    for attempt in range(attempts):
        seed = instance_seed(cfg.base_seed, n, instance, attempt)
        net, theta = random_network(n, cfg.edge_density, lo, hi, seed)
        if not need_bicon or is_biconnected(net):
            break
    bicon = is_biconnected(net)
    records = []
    for mech in sorted(cfg.mechanisms):
        if mech == "dsicb" and not bicon:
            records.append(ExperimentRecord(n, instance, seed, mech, None, None, None, 0, "not_biconnected"))
            continue
        outcome = compute_outcome(net, theta, mech, cfg.allocation_rule)
        records.append(_record(n, instance, seed, outcome, net, theta))
    return records


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Every (n, instance) pair, both mechanisms on the same network.

    When DSIC-B is requested the network is redrawn (bounded retries) until
    it is bi-connected; the stored seed reproduces the network finally used.
    """
    records = []
    for n in cfg.n_values:
        for instance in range(cfg.instances):
            records.extend(run_instance(cfg, n, instance))
    records.sort(key=lambda r: (r.n, r.instance, r.mechanism))
    return records


def replay(record: ExperimentRecord, cfg: ExperimentConfig) -> ExperimentRecord:
    lo, hi = cfg.cost_range
    net, theta = random_network(record.n, cfg.edge_density, lo, hi, record.seed)
    outcome = compute_outcome(net, theta, record.mechanism, cfg.allocation_rule)
    return _record(record.n, record.instance, record.seed, outcome, net, theta)


@dataclass(frozen=True)
class SummaryRow:
    n: int
    mechanism: str
    mean_apr: Optional[float]
    min_apr: Optional[float]
    max_apr: Optional[float]
    mean_wor: Optional[float]
    min_wor: Optional[float]
    max_wor: Optional[float]
    skips: int
    count: int


def _stats(values):
    if not values:
        return None, None, None
    return math.fsum(values) / len(values), min(values), max(values)


def aggregate(records: Iterable[ExperimentRecord]) -> list[SummaryRow]:
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    groups: dict[tuple[int, str], list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.n, r.mechanism), []).append(r)
    rows = []
    for (n, mech), group in sorted(groups.items()):
        aprs = [r.apr for r in group if r.apr is not None]
        wors = [r.wor for r in group if r.wor is not None]
        rows.append(
            SummaryRow(n, mech, *_stats(aprs), *_stats(wors),
                       sum(1 for r in group if r.skipped_reason), len(group))
        )
    return rows


@dataclass
class Verdict:
    n: int
    apr_ok: bool
    wor_ok: bool
    bicb_wor: Optional[float] = None
    dsicb_wor: Optional[float] = None
    notes: list[str] = field(default_factory=list)


def ordering_verdicts(summary: Sequence[SummaryRow]) -> list[Verdict]:
    """Per n: is BIC-B strictly below DSIC-B on mean APR and on mean WOR?"""
    by = {(r.n, r.mechanism): r for r in summary}
    out = []
    for n in sorted({r.n for r in summary}):
        b, d = by.get((n, "bicb")), by.get((n, "dsicb"))
        if b is None or d is None or None in (b.mean_apr, d.mean_apr, b.mean_wor, d.mean_wor):
            out.append(Verdict(n, False, False, notes=["missing data"]))
            continue
        out.append(Verdict(n, b.mean_apr < d.mean_apr, b.mean_wor < d.mean_wor, b.mean_wor, d.mean_wor))
    return out


# --- serialisation ---------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in RECORD_COLUMNS])
    return buf.getvalue()


def summary_csv(summary: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in summary:
        w.writerow([_fmt(getattr(r, c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def summary_json(summary: Iterable[SummaryRow]) -> str:
    return json.dumps([asdict(r) for r in summary], indent=2) + "\n"


def read_records_csv(text: str) -> list[ExperimentRecord]:
    def num(s, kind=float):
        return None if s == "" else kind(s)

    rows = csv.DictReader(io.StringIO(text))
    return [
        ExperimentRecord(
            int(r["n"]), int(r["instance"]), int(r["seed"]), r["mechanism"],
            num(r["apr"]), num(r["wor"]), num(r["budget_sum"]), int(r["router_count"]),
            r["skipped_reason"],
        )
        for r in rows
    ]
