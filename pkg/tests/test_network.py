import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from icb.errors import DisconnectedGraph, DuplicateEdge, InvalidTypeSpace, SchemaError, SelfLoop
from icb.network import (
    Discrete,
    UniformInterval,
    build_network,
    is_biconnected,
    load_network,
    mean_cost,
    network_from_json,
    random_discrete_network,
    random_network,
)

from _instances import cut_vertex_oracle, heterogeneous_instance

U = UniformInterval(1, 50)


def test_paper_fixture_is_valid(fixture_net):
    net, theta = fixture_net
    assert net.n == 4 and net.source == 0
    assert net.edges == frozenset({(0, 1), (1, 2), (2, 3)})
    assert net.type_spaces[1] == Discrete((15, 16), (0.5, 0.5))


def test_two_node_network():
    net = build_network(2, [(0, 1)], 0, [U, U])
    assert net.adj == ((1,), (0,))


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraph):
        build_network(4, [(0, 1), (2, 3)], 0, [U] * 4)


@pytest.mark.parametrize(
    "edges, exc",
    [([(0, 1), (1, 0)], DuplicateEdge), ([(0, 1), (1, 1)], SelfLoop)],
)
def test_bad_edges(edges, exc):
    with pytest.raises(exc):
        build_network(2, edges, 0, [U, U])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(values=(2, 1), probs=(0.5, 0.5)),
        dict(values=(1, 2), probs=(0.5, 0.6)),
        dict(values=(0, 2), probs=(0.5, 0.5)),
        dict(values=(), probs=()),
    ],
)
def test_invalid_discrete(kwargs):
    with pytest.raises(InvalidTypeSpace):
        Discrete(**kwargs)


def test_invalid_interval():
    with pytest.raises(InvalidTypeSpace):
        UniformInterval(5, 5)


@pytest.mark.parametrize(
    "ts, expected",
    [
        (Discrete.uniform([15, 16]), 15.5),
        (Discrete.uniform([12, 13]), 12.5),
        (UniformInterval(1, 50), 25.5),
    ],
)
def test_mean_cost(ts, expected):
    assert mean_cost(ts) == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.floats(0.1, 100), min_size=1, max_size=6, unique=True), st.data())
def test_mean_cost_matches_bruteforce(values, data):
    values = sorted(values)
    weights = data.draw(st.lists(st.floats(0.01, 1), min_size=len(values), max_size=len(values)))
    total = sum(weights)
    probs = [w / total for w in weights]
    probs[-1] = 1 - sum(probs[:-1])
    if probs[-1] < 0:
        return
    ts = Discrete(tuple(values), tuple(probs))
    brute = 0.0
    for v, p in zip(values, probs):
        brute += v * p
    assert abs(mean_cost(ts) - brute) <= 1e-12 * max(values)


def test_random_network_deterministic():
    a = random_network(5, 0.5, 1, 50, 42)
    b = random_network(5, 0.5, 1, 50, 42)
    assert a == b
    assert a[0].adj == b[0].adj


def test_random_network_density_one_is_complete():
    net, _ = random_network(10, 1.0, 1, 50, 3)
    assert len(net.edges) == 45


def test_random_network_costs_in_range():
    net, theta = random_network(25, 0.3, 1, 50, 7)
    assert len(theta) == 25
    assert all(1 <= x <= 50 for x in theta)
    assert all(ts == UniformInterval(1, 50) for ts in net.type_spaces)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.floats(0.01, 1.0), st.integers(0, 2**32))
def test_random_networks_are_connected(n, p, seed):
    net, _ = random_network(n, p, 1, 50, seed)
    # BFS from source reaches every node
    seen, stack = {net.source}, [net.source]
    while stack:
        for w in net.adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    assert len(seen) == n


def test_different_seeds_differ():
    assert random_network(10, 0.3, 1, 50, 1)[1] != random_network(10, 0.3, 1, 50, 2)[1]


@pytest.mark.parametrize(
    "n, edges, expected",
    [
        (4, [(0, 1), (1, 2), (2, 3), (3, 0)], True),
        (4, [(0, 1), (1, 2), (2, 3)], False),
        (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], True),
        (2, [(0, 1)], False),
    ],
)
def test_is_biconnected_examples(n, edges, expected):
    assert is_biconnected(build_network(n, edges, 0, [U] * n)) is expected


@pytest.mark.parametrize("seed", range(150))
def test_is_biconnected_matches_vertex_deletion(seed):
    net, _ = heterogeneous_instance(seed, n=3 + seed % 6, density=0.3 + 0.4 * (seed % 2))
    assert is_biconnected(net) == cut_vertex_oracle(net)


def test_json_round_trip(tmp_path, fixture_net):
    net, _ = fixture_net
    path = tmp_path / "net.json"
    path.write_text(json.dumps(net.to_json()))
    assert load_network(path) == net
    doc = json.loads(path.read_text())
    assert doc["source"] == 1 and [1, 2] in doc["edges"]


def test_json_schema_errors():
    with pytest.raises(SchemaError):
        network_from_json({"n": 2, "source": 1, "edges": [[1, 2]]})
    with pytest.raises(SchemaError):
        network_from_json({"n": 2, "source": 1, "edges": [[1, 2]], "types": [{"gamma": {}}] * 2})


def test_random_discrete_network_profile_in_support():
    net, theta = random_discrete_network(5, 3, rng_seed=11)
    for ts, x in zip(net.type_spaces, theta):
        assert x in ts.values and len(ts.values) == 3
        assert math.isclose(sum(ts.probs), 1.0, abs_tol=1e-12)
