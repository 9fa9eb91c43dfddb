import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walkohm import (
    Disconnected, EmptyEdgeList, NonPositiveConductance, NotReversible, UnknownVertex,
    build_network, check_reversibility, from_resistances,
    network_from_chain, parse_edge_list, stationary_vector, transition_matrix,
)
from walkohm.fixtures import ehrenfest_chain, four_node
from walkohm.network import format_edge_list, merge_vertices

from _graphs import random_network, rng_for


def test_four_node_transition_rows():
    P = transition_matrix(four_node())
    expected = np.array([
        [0, 0, 1 / 2, 1 / 2],
        [0, 0, 1 / 3, 2 / 3],
        [1 / 4, 1 / 4, 0, 1 / 2],
        [1 / 5, 2 / 5, 2 / 5, 0],
    ])
    assert np.allclose(P, expected, atol=1e-15)
    assert np.allclose(P.sum(axis=1), 1.0)


def test_four_node_vertex_conductances_and_stationary():
    net = four_node()
    assert net.vertex_conductance.tolist() == [2, 3, 4, 5]
    assert net.total_conductance == 14
    assert np.allclose(stationary_vector(net), np.array([2, 3, 4, 5]) / 14)


def test_self_loop_counts_once_in_vertex_total():
    net = build_network([("x", "x", 1), ("x", "y", 3)])
    assert net.C("x") == 4
    P = transition_matrix(net)
    assert P[0, 0] == pytest.approx(0.25)
    assert P[0, 1] == pytest.approx(0.75)


def test_from_resistances_inverts():
    net = from_resistances([("a", "b", 4.0), ("b", "c", 0.5)])
    assert net.conductances.tolist() == [0.25, 2.0]


def test_ehrenfest_round_trip():
    P, w = ehrenfest_chain(4)
    assert np.allclose(w, [1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16])
    assert check_reversibility(P, w)
    net = network_from_chain(P, w)
    assert [float(c) for _, _, c in net.edges] == pytest.approx([1 / 16, 3 / 16, 3 / 16, 1 / 16])
    assert np.allclose(transition_matrix(net), P)
    assert np.allclose(stationary_vector(net), w)


def test_rotation_chain_is_not_reversible():
    P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
    w = np.full(3, 1 / 3)
    rep = check_reversibility(P, w)
    assert not rep.reversible
    # direct evaluation: w_0 P_01 - w_1 P_10 = 1/3
    assert rep.max_violation == pytest.approx(1 / 3)
    assert rep.cycle_violation == pytest.approx(1.0)
    with pytest.raises(NotReversible):
        network_from_chain(P, w)


@pytest.mark.parametrize("case", range(25))
def test_random_network_round_trip(case):
    net = random_network(rng_for(1, case))
    P = transition_matrix(net)
    w = stationary_vector(net)
    rep = check_reversibility(P, w)
    assert rep.reversible and rep.cycle_violation < 1e-12
    back = network_from_chain(P, w)
    assert np.allclose(transition_matrix(back), P, atol=1e-12)
    assert np.allclose(stationary_vector(back), w, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=2, max_size=8))
def test_path_stationary_is_proportional_to_vertex_conductance(cs):
    net = build_network([(i, i + 1, c) for i, c in enumerate(cs)])
    w = stationary_vector(net)
    C = net.vertex_conductance
    assert np.allclose(w, C / C.sum())
    assert math.isclose(w.sum(), 1.0)


def test_edge_list_round_trip():
    text = "# comment\na c 1\n\na d 1.5  # trailing\nb c 2\n"
    net = parse_edge_list(text)
    assert net.vertices == ("a", "c", "d", "b")
    again = parse_edge_list(format_edge_list(net))
    assert again.edges == net.edges


def test_merge_vertices_drops_internal_edges():
    merged, label = merge_vertices(four_node(), ["c", "d"])
    assert label == "c"
    assert merged.vertices == ("a", "b", "c")
    assert len(merged.edges) == 4
    assert merged.C("c") == 5


@pytest.mark.parametrize("edges, exc", [
    ([], EmptyEdgeList),
    ([("a", "b", 0)], NonPositiveConductance),
    ([("a", "b", -1)], NonPositiveConductance),
    ([("a", "b", float("inf"))], NonPositiveConductance),
])
def test_bad_edge_lists(edges, exc):
    with pytest.raises(exc):
        build_network(edges)


def test_bad_text_and_lookups():
    with pytest.raises(ValueError):
        parse_edge_list("a b\n")
    with pytest.raises(ValueError):
        parse_edge_list("a b x\n")
    with pytest.raises(UnknownVertex):
        four_node().idx("z")
    split = build_network([("a", "b", 1), ("c", "d", 1)])
    with pytest.raises(Disconnected):
        transition_matrix(split)
