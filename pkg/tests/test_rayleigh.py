import math
from fractions import Fraction

import numpy as np
import pytest

from walkohm import (
    Bridge, BridgeTouchesTerminal, Cut, NoInverse, ScaleEdge, Short, UnknownEdge,
    analyze_two_point, apply_edit, bridge_update_exact, build_network,
    effective_resistance, escape_probability, fundamental_matrix, make_absorbing,
    monotonicity_check, rank_one_inverse_update, reduce_series_parallel,
)
from walkohm.fixtures import four_node, street_grid, unit_cube
from walkohm.lattices import tree_network
from walkohm.rayleigh import bridged_fundamental_matrix, parse_edit_script

from _graphs import random_network, rng_for


def random_edit(net, rng):
    kind = int(rng.integers(4))
    if kind == 0:
        u, v, _ = net.edges[int(rng.integers(len(net.edges)))]
        return Cut(u, v)
    if kind == 1:
        k = int(rng.integers(2, 4))
        return Short(frozenset(net.vertices[i] for i in rng.choice(net.n, size=k, replace=False)))
    if kind == 2:
        r, s = rng.choice(net.n, size=2, replace=False)
        return Bridge(net.vertices[r], net.vertices[s], float(rng.uniform(0.01, 5)))
    u, v, _ = net.edges[int(rng.integers(len(net.edges)))]
    return ScaleEdge(u, v, float(rng.choice([rng.uniform(0.05, 0.95), rng.uniform(1.05, 20)])))


@pytest.mark.parametrize("case", range(50))
def test_monotonicity_on_random_edits(case):
    rng = rng_for(20, case)
    net = random_network(rng, n_max=12, extra=0.25)
    a, b = net.vertices[0], net.vertices[-1]
    e = random_edit(net, rng)
    res = monotonicity_check(net, a, b, e)
    assert res.holds, (e, res)
    # oracle: two independent dense solves
    before = effective_resistance(net, a, b)
    assert res.r_before == pytest.approx(before)
    if isinstance(e, Cut):
        assert res.r_after >= before - 1e-12
    elif isinstance(e, ScaleEdge) and e.factor < 1:
        assert res.r_after >= before - 1e-12
    else:
        assert res.r_after <= before + 1e-12


def test_cut_that_disconnects_gives_infinity():
    net = build_network([("a", "m", 1), ("m", "b", 1)])
    res = monotonicity_check(net, "a", "b", Cut("m", "b"))
    assert res.r_after == math.inf and res.holds


def test_cut_one_of_a_parallel_pair():
    net = build_network([("a", "b", 1), ("a", "b", 1)])
    assert effective_resistance(net, "a", "b") == pytest.approx(0.5)
    assert effective_resistance(apply_edit(net, Cut("a", "b")), "a", "b") == pytest.approx(1.0)


def test_shorting_binary_tree_levels():
    net, root, ends = tree_network("binary", 3)
    # vertices at the same depth: endpoints of each level
    levels, frontier = [], [root]
    adj = {x: set() for x in net.vertices}
    for u, v, _ in net.edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {root}
    for _ in range(3):
        frontier = [w for x in frontier for w in adj[x] if w not in seen]
        seen.update(frontier)
        levels.append(frontier)
    exact = net.with_edges([(u, v, Fraction(c)) for u, v, c in net.edges])
    for k, lev in enumerate(levels):
        exact = apply_edit(exact, Short(frozenset(lev), label=("L", k)))
    res = reduce_series_parallel(exact, root, ("L", 2))
    assert res.r_eff == Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 8)
    assert effective_resistance(net, root, list(ends)) == pytest.approx(7 / 8)


def test_street_grid_cut_lowers_escape():
    net, a, b = street_grid()
    before = escape_probability(net, a, b)
    after = escape_probability(apply_edit(net, Cut((3, 2), (3, 3))), a, b)
    assert after < before


def test_tiny_bridge_is_continuous():
    net = four_node()
    before = effective_resistance(net, "a", "b")
    after = effective_resistance(apply_edit(net, Bridge("a", "b", 1e-9)), "a", "b")
    assert after == pytest.approx(before, abs=1e-6)


def _bridge_cases():
    cases = []
    for case in range(20):
        rng = rng_for(21, case)
        net = random_network(rng, n_min=5)
        r, s = rng.choice(np.arange(1, net.n - 1), size=2, replace=False)
        cases.append((net, net.vertices[int(r)], net.vertices[int(s)], float(rng.uniform(0.01, 5))))
    return cases


@pytest.mark.parametrize("net, r, s, eps", _bridge_cases())
def test_bridge_update_matches_direct(net, r, s, eps):
    a, b = net.vertices[0], net.vertices[-1]
    upd = bridge_update_exact(net, a, b, r, s, eps)
    direct = escape_probability(apply_edit(net, Bridge(r, s, eps)), a, b)
    assert upd.p_esc_new == pytest.approx(direct, abs=1e-10)
    assert upd.delta >= 0


def test_bridge_update_four_node():
    net = four_node()
    upd = bridge_update_exact(net, "a", "b", "c", "d", 1.0)
    direct = analyze_two_point(apply_edit(net, Bridge("c", "d", 1.0)), "a", "b").p_esc
    assert upd.p_esc_new == pytest.approx(direct, abs=1e-12)


def test_bridge_between_equal_voltages_changes_nothing():
    upd = bridge_update_exact(unit_cube(), "a", "b", "c", "d", 2.0)
    assert upd.delta == pytest.approx(0.0, abs=1e-14)
    assert upd.p_esc_new == pytest.approx(4 / 7, abs=1e-12)


def test_zero_bridge_and_terminal_bridge():
    assert bridge_update_exact(four_node(), "a", "b", "c", "d", 0.0).delta == 0.0
    with pytest.raises(BridgeTouchesTerminal):
        bridge_update_exact(four_node(), "a", "b", "a", "d", 1.0)


@pytest.mark.parametrize("net, r, s, eps", _bridge_cases()[:10])
def test_bridged_fundamental_matrix(net, r, s, eps):
    a, b = net.vertices[0], net.vertices[-1]
    direct = fundamental_matrix(make_absorbing(apply_edit(net, Bridge(r, s, eps)), [a, b])).N
    assert np.allclose(bridged_fundamental_matrix(net, a, b, r, s, eps), direct, atol=1e-10)


@pytest.mark.parametrize("case", range(10))
def test_small_bridge_first_order_law(case):
    rng = rng_for(22, case)
    net = random_network(rng, n_min=5)
    a, b = net.vertices[0], net.vertices[-1]
    r, s = (net.vertices[int(i)] for i in rng.choice(np.arange(1, net.n - 1), size=2, replace=False))
    res = analyze_two_point(net, a, b)
    p = res.p_esc
    slope = (res.voltage(r) - res.voltage(s)) ** 2 / net.C(a)
    for eps in (1e-4, 1e-5):
        gain = escape_probability(apply_edit(net, Bridge(r, s, eps)), a, b) - p
        assert abs(gain - slope * eps) <= 1e-6 * p
    # the remainder is second order
    g1 = escape_probability(apply_edit(net, Bridge(r, s, 1e-3)), a, b) - p - slope * 1e-3
    g2 = escape_probability(apply_edit(net, Bridge(r, s, 5e-4)), a, b) - p - slope * 5e-4
    if abs(g1) > 1e-13:
        assert g2 / g1 == pytest.approx(0.25, abs=0.02)


@pytest.mark.parametrize("case", range(10))
def test_derivative_is_squared_current(case):
    rng = rng_for(23, case)
    net = random_network(rng)
    a, b = net.vertices[0], net.vertices[-1]
    k = int(rng.integers(len(net.edges)))
    i_k = analyze_two_point(net, a, b).unit_currents[k]
    h = 1e-6

    def R_with(delta):
        edges = list(net.edges)
        u, v, c = edges[k]
        edges[k] = (u, v, 1.0 / (1.0 / c + delta))
        return effective_resistance(net.with_edges(edges), a, b)

    deriv = (R_with(h) - R_with(-h)) / (2 * h)
    assert deriv == pytest.approx(i_k ** 2, abs=1e-5)


@pytest.mark.parametrize("case", range(10))
def test_resistance_is_superadditive(case):
    rng = rng_for(24, case)
    net = random_network(rng)
    a, b = net.vertices[0], net.vertices[-1]
    R1 = 1 / net.conductances
    R2 = rng.uniform(0.1, 10, size=len(net.edges))

    def reff(R):
        return effective_resistance(net.with_edges([(u, v, 1 / r) for (u, v, _), r in zip(net.edges, R)]), a, b)

    assert reff(R1 + R2) >= reff(R1) + reff(R2) - 1e-12


def test_rank_one_update_random():
    rng = rng_for(25)
    A = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    h, k = rng.normal(size=5), rng.normal(size=5)
    N = np.linalg.inv(A)
    got = rank_one_inverse_update(N, h, k)
    assert np.allclose(got, np.linalg.inv(A - np.outer(h, k)), atol=1e-8)
    assert np.array_equal(rank_one_inverse_update(N, np.zeros(5), k), N)


def test_rank_one_update_singular():
    N = np.eye(2)
    with pytest.raises(NoInverse):
        rank_one_inverse_update(N, np.array([1.0, 0]), np.array([1.0, 0]))


def test_edit_scripts_and_bad_edits():
    edits = parse_edit_script("# demo\nshort c d\ncut a c\nbridge c d 0.5\nscale b d 2\n")
    assert [type(e).__name__ for e in edits] == ["Short", "Cut", "Bridge", "ScaleEdge"]
    with pytest.raises(ValueError):
        parse_edit_script("twist a b\n")
    with pytest.raises(UnknownEdge):
        apply_edit(four_node(), Cut("a", "b"))
    with pytest.raises(ValueError):
        Short(frozenset())
