"""Executable checks of the BIC-B properties.

Each check returns a :class:`PropertyReport`; a failed report always carries
a witness that is enough to replay the failure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .allocation import allocate
from .errors import InstanceTooLarge, InvalidTypeSpace
from .network import Discrete, NetworkModel, validate_profile
from .payments import (
    bicb_outcome,
    bicb_payments,
    bicb_payments_closed_form,
    find_dominant_strategy_violation,
    ir_threshold,
    router_utility,
)

TOL = 1e-9
BIC_MAX_NODES = 5
BIC_MAX_TYPES = 3


@dataclass
class PropertyReport:
    property_name: str
    passed: bool
    instances_checked: int = 1
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("a failed report needs a witness")

    def merge(self, other: "PropertyReport") -> "PropertyReport":
        """Fold another report of the same property into this one (first witness wins)."""
        return PropertyReport(
            self.property_name,
            self.passed and other.passed,
            self.instances_checked + other.instances_checked,
            self.witness if self.witness is not None else other.witness,
        )

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.property_name} ({self.instances_checked} instance(s))"
        if self.witness is not None:
            text += f" witness={self.witness}"
        return text

    def to_json(self) -> dict:
        return {
            "property": self.property_name,
            "passed": self.passed,
            "instances_checked": self.instances_checked,
            "witness": self.witness,
            **({"details": self.details} if self.details else {}),
        }


def check_budget_balance(net: NetworkModel, routers: Iterable[int]) -> PropertyReport:
    routers = frozenset(routers)
    t = bicb_payments(net, routers)
    total = math.fsum(t)
    ok = abs(total) <= TOL
    witness = None if ok else {"routers": sorted(routers), "t": list(t), "sum": total}
    return PropertyReport("budget_balance", ok, witness=witness, details={"sum": total})


def check_nonrouter_payments(net: NetworkModel, routers: Iterable[int]) -> PropertyReport:
    """Non-routers all pay the same amount, strictly positive when routers exist.

    Payments are also cross-checked against the closed form.
    """
    routers = frozenset(routers)
    t = bicb_payments(net, routers)
    closed = bicb_payments_closed_form(net, routers)
    nonrouters = [i for i in range(net.n) if i not in routers]
    problems = []
    ref = t[nonrouters[0]]
    if any(t[i] != ref for i in nonrouters[1:]):
        # exact equality can fail only by summation order; report anything beyond TOL
        if max(abs(t[i] - ref) for i in nonrouters) > TOL:
            problems.append("unequal")
    if any(closed[i] != closed[nonrouters[0]] for i in nonrouters):
        problems.append("closed_form_unequal")
    if routers and any(t[i] >= 0 for i in nonrouters):
        problems.append("non_negative")
    if not routers and any(abs(t[i]) > TOL for i in nonrouters):
        problems.append("nonzero_without_routers")
    if max(abs(a - b) for a, b in zip(t, closed)) > TOL:
        problems.append("closed_form_mismatch")
    ok = not problems
    witness = None if ok else {"routers": sorted(routers), "t": list(t), "problems": problems}
    return PropertyReport("nonrouter_payments", ok, witness=witness)


def check_expost_ir(
    net: NetworkModel, routers: Iterable[int], announced: Sequence[float]
) -> PropertyReport:
    """Router utility is non-negative exactly when the report is under the IR threshold."""
    routers = frozenset(routers)
    announced = validate_profile(net, announced)
    for i in sorted(routers):
        u = router_utility(net, routers, announced, i)
        predicate = announced[i] <= ir_threshold(net, i) + TOL
        if (u >= -TOL) != predicate:
            return PropertyReport(
                "expost_ir",
                False,
                witness={
                    "node": i,
                    "announced": list(announced),
                    "utility": u,
                    "threshold": ir_threshold(net, i),
                },
            )
    return PropertyReport("expost_ir", True)


def _bic_supports(net: NetworkModel):
    if net.n > BIC_MAX_NODES:
        raise InstanceTooLarge(f"Bayesian IC enumeration limited to {BIC_MAX_NODES} nodes")
    out = []
    for i, ts in enumerate(net.type_spaces):
        if not isinstance(ts, Discrete):
            raise InvalidTypeSpace(f"node {i + 1}: Bayesian IC check needs discrete priors")
        if len(ts.values) > BIC_MAX_TYPES:
            raise InstanceTooLarge(f"node {i + 1}: at most {BIC_MAX_TYPES} types per node")
        out.append(list(zip(ts.values, ts.probs)))
    return out


def interim_utilities(net: NetworkModel, i: int, allocation_rule: str = "optimal") -> dict:
    """Expected utility of node ``i`` for every (true type, report) pair.

    Others report truthfully; the expectation enumerates their type profiles
    with prior probabilities and recomputes the allocation for every
    announced profile.
    """
    supports = _bic_supports(net)
    cache: dict[tuple[float, ...], tuple] = {}

    def outcome(profile):
        if profile not in cache:
            o = bicb_outcome(net, allocate(net, profile, allocation_rule))
            cache[profile] = (o.k, o.t)
        return cache[profile]

    others = [supports[j] if j != i else [(None, 1.0)] for j in range(net.n)]
    table = {}
    for true, _ in supports[i]:
        for report, _ in supports[i]:
            total = []
            for rest in itertools.product(*others):
                prob = math.prod(p for _, p in rest)
                profile = [v for v, _ in rest]
                profile[i] = report
                k, t = outcome(tuple(profile))
                total.append(prob * (-true * k[i] + t[i]))
            table[(true, report)] = math.fsum(total)
    return table


def check_bayesian_ic(net: NetworkModel, allocation_rule: str = "optimal") -> PropertyReport:
    """Brute-force Bayesian incentive compatibility of BIC-B on a small discrete instance."""
    supports = _bic_supports(net)
    worst = 0.0
    witness = None
    for i in range(net.n):
        eu = interim_utilities(net, i, allocation_rule)
        for true, _ in supports[i]:
            for report, _ in supports[i]:
                margin = eu[(true, true)] - eu[(true, report)]
                worst = min(worst, margin)
                if margin < -TOL and witness is None:
                    witness = {
                        "node": i,
                        "true_type": true,
                        "misreport": report,
                        "truthful_utility": eu[(true, true)],
                        "misreport_utility": eu[(true, report)],
                        "allocation_rule": allocation_rule,
                    }
    return PropertyReport(
        f"bayesian_ic[{allocation_rule}]",
        witness is None,
        witness=witness,
        details={"worst_margin": worst},
    )


def check_dominant_strategy_ic(
    net: NetworkModel, mechanism: str = "dsicb", allocation_rule: str = "lcp"
) -> PropertyReport:
    witness = find_dominant_strategy_violation(net, mechanism, allocation_rule)
    return PropertyReport(f"dominant_strategy_ic[{mechanism}]", witness is None, witness=witness)
