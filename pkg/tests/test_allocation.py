import math

import pytest
from hypothesis import given, settings, strategies as st

from icb.allocation import (
    allocate,
    allocation_of,
    build_srbt,
    least_cost_paths,
    optimal_broadcast_tree,
)
from icb.errors import InstanceTooLarge
from icb.network import UniformInterval, build_network, random_network

from _instances import heterogeneous_instance, optimal_router_oracle, path_cost_oracle

U = UniformInterval(1, 50)


def net_of(n, edges, source=0):
    return build_network(n, edges, source, [U] * n)


def test_lcp_on_path(fixture_net):
    net, theta = fixture_net
    dist, parent = least_cost_paths(net, theta)
    assert dist == [0, 0, 15, 28]
    assert parent == [None, 0, 1, 2]


def test_lcp_star_center_source():
    net = net_of(5, [(0, i) for i in range(1, 5)])
    dist, parent = least_cost_paths(net, [1, 2, 3, 4, 5])
    assert dist == [0, 0, 0, 0, 0]
    assert parent[1:] == [0, 0, 0, 0]


def test_lcp_direct_edge_beats_relay():
    net = net_of(3, [(0, 1), (0, 2), (1, 2)])
    dist, parent = least_cost_paths(net, [1, 5, 50])
    assert dist[2] == 0 and parent[2] == 0


def test_lcp_tie_break_smallest_predecessor():
    # 0-1-3 and 0-2-3 both cost 7
    net = net_of(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    _, parent = least_cost_paths(net, [1, 7, 7, 1])
    assert parent[3] == 1


@pytest.mark.parametrize("seed", range(60))
def test_lcp_matches_path_enumeration(seed):
    net, theta = heterogeneous_instance(seed, n=3 + seed % 6, density=0.4)
    dist, _ = least_cost_paths(net, theta)
    for v in range(net.n):
        assert dist[v] == pytest.approx(path_cost_oracle(net, theta, v), abs=1e-9)


def test_srbt_paper_fixture(fixture_net):
    net, theta = fixture_net
    tree = build_srbt(net, theta)
    assert tree.routers == {1, 2}
    assert tree.cost == 28
    assert tree.children(2) == [3] and tree.children(3) == []
    assert allocation_of(tree, 4) == (0, 1, 1, 0)


def test_srbt_source_adjacent_to_all():
    net = net_of(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
    tree = build_srbt(net, [3, 1, 1, 1])
    assert tree.routers == frozenset() and tree.cost == 0
    assert allocation_of(tree, 4) == (0, 0, 0, 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 25), st.integers(0, 10**9))
def test_srbt_invariants(n, seed):
    net, theta = random_network(n, 0.25, 1, 50, seed)
    dist, _ = least_cost_paths(net, theta)
    tree = build_srbt(net, theta)
    assert net.source not in tree.routers
    for v in range(n):
        path = tree.path_to(v)
        assert path[0] == net.source
        if v != net.source:
            assert math.isclose(math.fsum(theta[u] for u in path[1:-1]), dist[v], abs_tol=1e-9)
        if not tree.children(v):
            assert v not in tree.routers
    k = allocation_of(tree, n)
    assert sum(k) == len(tree.routers) and k[net.source] == 0
    assert build_srbt(net, theta) == tree


def test_optimal_path_forced():
    net = net_of(4, [(0, 1), (1, 2), (2, 3)])
    assert optimal_broadcast_tree(net, [10, 15, 13, 8]).routers == {1, 2}


def test_optimal_star_empty():
    net = net_of(5, [(0, i) for i in range(1, 5)])
    assert optimal_broadcast_tree(net, [1] * 5).routers == frozenset()


def test_optimal_four_cycle():
    # s=0, a=1, b=2, c=3; subsets of {a,b,c}: only {a} (cost 1) and supersets / {c} (100)
    # dominate b while staying connected to s, so {a} is optimal.
    net = net_of(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    tree = optimal_broadcast_tree(net, [7, 1, 5, 100])
    assert tree.routers == {1}
    assert tree.parent == (None, 0, 1, 0)


def test_optimal_beats_lcp_sometimes():
    # LCP routes each leaf through its own cheapest relay; a single hub covers both.
    # s=0 -- 1,2,3 ; 1->4, 2->5 cheap; 3 reaches both 4 and 5
    net = net_of(6, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 5), (3, 4), (3, 5)])
    theta = [1, 5, 5, 6, 1, 1]
    lcp = build_srbt(net, theta)
    opt = optimal_broadcast_tree(net, theta)
    assert lcp.cost == 10 and opt.cost == 6


def test_optimal_guard():
    net, theta = random_network(17, 0.5, 1, 50, 0)
    with pytest.raises(InstanceTooLarge):
        optimal_broadcast_tree(net, theta)


@pytest.mark.parametrize("seed", range(60))
def test_optimal_matches_oracle(seed):
    net, theta = heterogeneous_instance(seed, n=2 + seed % 7, density=0.35)
    cost, combo = optimal_router_oracle(net, theta)
    tree = optimal_broadcast_tree(net, theta)
    assert tree.cost == pytest.approx(cost, abs=1e-9)
    assert tree.routers == frozenset(combo)
    assert build_srbt(net, theta).cost >= tree.cost - 1e-9


def test_allocate_dispatch(fixture_net):
    net, theta = fixture_net
    assert allocate(net, theta, "lcp") == allocate(net, theta, "optimal")
    with pytest.raises(ValueError):
        allocate(net, theta, "greedy")


def test_srbt_json(fixture_net):
    net, theta = fixture_net
    doc = build_srbt(net, theta).to_json()
    assert doc == {"parent": {"2": 1, "3": 2, "4": 3}, "routers": [2, 3], "cost": 28.0}
