"""Incentive compatible broadcast in ad hoc networks with selfish nodes.

BIC-B (expected-externality payments over a source rooted broadcast tree),
a VCG-style DSIC-B baseline, property checks, a mediator simulation and a
Monte Carlo harness.
"""
from .allocation import Srbt, allocate, allocation_of, build_srbt, least_cost_paths, optimal_broadcast_tree
from .network import (
    Discrete,
    NetworkModel,
    UniformInterval,
    build_network,
    is_biconnected,
    mean_cost,
    paper_fixture,
    random_discrete_network,
    random_network,
)
from .payments import (
    Outcome,
    bicb_payments,
    bicb_payments_closed_form,
    compute_outcome,
    dsicb_payments,
    expected_externalities,
    ir_threshold,
    router_utility,
)

__version__ = "0.1.0"
