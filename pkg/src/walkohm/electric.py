"""Voltages, currents, effective resistance and escape probabilities.

The source ``a`` is held at 1 volt and the sink (one vertex or a set of
vertices shorted together) at 0.  Currents are reported per edge in the
edge's stored orientation ``(u, v)``, positive when flowing from u to v.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .dirichlet import BoundaryProblem, solve_exact
from .errors import Disconnected, FlowEdgeMismatch, NotUnitFlow, SameVertex
from .network import Network, merge_vertices, transition_csr


def as_sink_set(net: Network, b) -> tuple:
    """Interpret ``b`` as a single vertex if it names one, else as a collection."""
    if isinstance(b, Hashable) and b in net:
        return (b,)
    if isinstance(b, (str, bytes)) or not isinstance(b, Iterable):
        net.idx(b)  # raises UnknownVertex
    sinks = tuple(dict.fromkeys(b))
    for x in sinks:
        net.idx(x)
    if not sinks:
        raise ValueError("sink set is empty")
    return sinks


@dataclass(eq=False)
class TwoPointAnalysis:
    net: Network
    a: object
    sinks: tuple
    voltages: np.ndarray  # vertex order, v_a = 1, v_sink = 0
    currents: np.ndarray  # per edge
    i_a: float
    r_eff: float
    c_eff: float
    p_esc: float
    p_esc_check: float
    energy: float

    @property
    def b(self):
        return self.sinks[0] if len(self.sinks) == 1 else self.sinks

    @property
    def v(self) -> dict:
        return dict(zip(self.net.vertices, self.voltages.tolist()))

    def voltage(self, x) -> float:
        return float(self.voltages[self.net.idx(x)])

    def current(self, u, v) -> float:
        """Net current from u to v summed over all u-v edges."""
        ids = self.net.edge_ids(u, v)
        if not ids:
            from .errors import UnknownEdge
            raise UnknownEdge(f"no edge between {u!r} and {v!r}")
        total = 0.0
        for k in ids:
            sign = 1.0 if self.net.edges[k][0] == u else -1.0
            total += sign * self.currents[k]
        return total

    @property
    def unit_currents(self) -> np.ndarray:
        return self.currents / self.i_a

    @property
    def unit_voltages(self) -> np.ndarray:
        return self.voltages * self.r_eff

    def unit_flow(self) -> "EdgeFlow":
        return EdgeFlow(self.net, self.unit_currents, self.a, self.b)


def analyze_two_point(net: Network, a, b) -> TwoPointAnalysis:
    """Unit-voltage analysis between ``a`` and the sink ``b`` (vertex or set)."""
    net.idx(a)
    sinks = as_sink_set(net, b)
    if a in sinks:
        raise SameVertex("source and sink coincide")
    if not net.is_connected():
        raise Disconnected("network is not connected")
    if len(sinks) > 1:
        merged, label = merge_vertices(net, sinks)
        inner = analyze_two_point(merged, a, label)
        v = np.array([0.0 if x in sinks else inner.voltage(x) for x in net.vertices])
    elif net.n == 2:  # nothing to solve for
        v = np.array([1.0 if x == a else 0.0 for x in net.vertices])
    else:
        prob = BoundaryProblem(net, {a: 1.0, sinks[0]: 0.0})
        v = solve_exact(prob).array
    cur = (v[net.tails] - v[net.heads]) * net.conductances
    ia = _outflow(net, cur, net.idx(a))
    Ca = net.C(a)
    P_row = transition_csr(net).getrow(net.idx(a))
    p_check = 1.0 - float((P_row @ v).item())
    energy = float(np.sum(cur ** 2 / net.conductances))
    return TwoPointAnalysis(net, a, sinks, v, cur, ia, 1.0 / ia, ia, ia / Ca, p_check, energy)


def _outflow(net: Network, values: np.ndarray, i: int) -> float:
    out = values[net.tails == i].sum() - values[net.heads == i].sum()
    return float(out)


def effective_resistance(net: Network, a, b) -> float:
    """R_eff between ``a`` and ``b``; ``inf`` when they lie in different components."""
    comp = net.component_of(a)
    sinks = as_sink_set(net, b)
    live = [x for x in sinks if net.idx(x) in comp]
    if not live:
        return math.inf
    if len(comp) < net.n:
        from .network import induced_subnetwork
        net = induced_subnetwork(net, comp)
    return analyze_two_point(net, a, live if len(live) > 1 else live[0]).r_eff


def escape_probability(net: Network, a, b_set) -> float:
    """Probability that the walk from ``a`` reaches ``b_set`` before returning to ``a``.

    A step along a self-loop at ``a`` counts as a return.
    """
    res = analyze_two_point(net, a, as_sink_set(net, b_set))
    if abs(res.p_esc - res.p_esc_check) > 1e-9:
        raise ArithmeticError("escape probability cross-check failed")
    return res.p_esc


def expected_visits_before_absorption(net: Network, a, b) -> dict:
    """Expected number of visits to each vertex, starting at ``a``, before hitting ``b``.

    Equals C_x times the voltage of the unit current flow.
    """
    res = analyze_two_point(net, a, b)
    u = net.vertex_conductance * res.unit_voltages
    return dict(zip(net.vertices, u.tolist()))


# -- flows ---------------------------------------------------------------

@dataclass(eq=False)
class EdgeFlow:
    """Real flow on each edge of ``net``; the value on edge (u, v) runs from u to v."""

    net: Network
    values: np.ndarray
    source: object = None
    sink: object = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.net.edges),):
            raise FlowEdgeMismatch(
                f"flow has {self.values.shape} values for {len(self.net.edges)} edges")

    @classmethod
    def from_pairs(cls, net: Network, pairs: Mapping, source=None, sink=None) -> "EdgeFlow":
        """Build from ``{(x, y): j_xy}``; each pair must name exactly one edge."""
        vals = np.zeros(len(net.edges))
        for (x, y), j in pairs.items():
            ids = net.edge_ids(x, y)
            if len(ids) != 1:
                raise FlowEdgeMismatch(f"pair ({x!r}, {y!r}) matches {len(ids)} edges")
            k = ids[0]
            vals[k] = j if net.edges[k][0] == x else -j
        return cls(net, vals, source, sink)

    def divergence(self) -> np.ndarray:
        n = self.net.n
        return (np.bincount(self.net.tails, self.values, minlength=n)
                - np.bincount(self.net.heads, self.values, minlength=n))

    @property
    def strength(self) -> float:
        return float(self.divergence()[self.net.idx(self.source)])

    def energy(self) -> float:
        return energy_dissipation(self.net, self)

    def check_unit(self, tol: float = 1e-10) -> None:
        div = self.divergence()
        sinks = as_sink_set(self.net, self.sink)
        s = self.net.idx(self.source)
        mask = np.ones(self.net.n, dtype=bool)
        mask[s] = False
        mask[[self.net.idx(x) for x in sinks]] = False
        if abs(div[s] - 1.0) > tol or (mask.any() and np.max(np.abs(div[mask])) > tol):
            raise NotUnitFlow("not a unit flow from source to sink")


def energy_dissipation(net: Network, j) -> float:
    """Sum of j_e**2 R_e over edges (half the sum over ordered pairs)."""
    if isinstance(j, EdgeFlow):
        if j.net is not net and j.net.edges != net.edges:
            raise FlowEdgeMismatch("flow belongs to a different network")
        vals = j.values
    else:
        vals = np.asarray(j, dtype=float)
        if vals.shape != (len(net.edges),):
            raise FlowEdgeMismatch("flow length does not match edge count")
    return float(np.sum(vals ** 2 / net.conductances))


def verify_conservation_of_energy(net: Network, w, j: EdgeFlow) -> float:
    """|(w_a - w_b) j_a - sum_e (w_u - w_v) j_e| for a flow from a to the sink."""
    if isinstance(w, Mapping):
        w = np.array([float(w[x]) for x in net.vertices])
    w = np.asarray(w, dtype=float)
    div = j.divergence()
    a = net.idx(j.source)
    sinks = [net.idx(x) for x in as_sink_set(net, j.sink)]
    lhs = w[a] * div[a] + sum(w[s] * div[s] for s in sinks)
    rhs = float(np.sum((w[net.tails] - w[net.heads]) * j.values))
    return abs(lhs - rhs)


def cycle_basis(net: Network) -> np.ndarray:
    """Fundamental cycles of a BFS spanning forest as signed edge vectors.

    Each row is a circulation: it has zero divergence at every vertex.
    Self-loops are skipped since flow on a loop dissipates without moving.
    """
    n = net.n
    tails, heads = net.tails.tolist(), net.heads.tolist()
    inc = defaultdict(list)
    for k, (u, v) in enumerate(zip(tails, heads)):
        if u != v:
            inc[u].append(k)
            inc[v].append(k)
    parent_edge = [-1] * n
    depth = [-1] * n
    tree = set()
    for root in range(n):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        queue = [root]
        for x in queue:
            for k in inc[x]:
                y = heads[k] if tails[k] == x else tails[k]
                if depth[y] < 0:
                    depth[y] = depth[x] + 1
                    parent_edge[y] = k
                    tree.add(k)
                    queue.append(y)

    def up_path(x, vec, sign):
        # walk x -> root adding edge orientation signs for travel towards the root
        while parent_edge[x] >= 0:
            k = parent_edge[x]
            vec[k] += sign * (1.0 if tails[k] == x else -1.0)
            x = heads[k] if tails[k] == x else tails[k]

    rows = []
    for k, (u, v) in enumerate(zip(tails, heads)):
        if u == v or k in tree:
            continue
        vec = np.zeros(len(tails))
        vec[k] = 1.0          # u -> v along the chord
        up_path(v, vec, 1.0)  # v -> root
        up_path(u, vec, -1.0)  # root -> u
        rows.append(vec)
    return np.array(rows).reshape(len(rows), len(tails))


@dataclass
class ThomsonReport:
    passed: bool
    r_eff: float
    energies: np.ndarray
    min_energy: float

    def __bool__(self) -> bool:
        return self.passed


def random_unit_flows(net: Network, a, b, trials: int, seed: int, scale: float = 1.0):
    """Unit current plus random circulations, one generator per trial."""
    res = analyze_two_point(net, a, b)
    base = res.unit_currents
    Z = cycle_basis(net)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
        alpha = rng.normal(0.0, scale, size=Z.shape[0])
        yield EdgeFlow(net, base + alpha @ Z, a, b)


def verify_thomson(net: Network, a, b, trials: int = 100, seed: int = 0, scale: float = 1.0,
                   extra_flows: Iterable[EdgeFlow] = (), tol: float = 1e-10) -> ThomsonReport:
    """Check that no unit flow dissipates less than R_eff."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    r = analyze_two_point(net, a, b).r_eff
    energies = []
    for flow in list(random_unit_flows(net, a, b, trials, seed, scale)) + list(extra_flows):
        flow.check_unit(tol=1e-8)
        energies.append(flow.energy())
    energies = np.array(energies)
    return ThomsonReport(bool(np.all(energies >= r - tol)), r, energies, float(energies.min()))


# -- series-parallel reduction --------------------------------------------

@dataclass
class SeriesParallelResult:
    r_eff: object  # exact when the conductances were Fractions; None if irreducible
    reduced: Network
    trace: list

    @property
    def irreducible(self) -> bool:
        return self.r_eff is None


def reduce_series_parallel(net: Network, a, b) -> SeriesParallelResult:
    """Collapse parallel pairs and series chains until one a-b edge remains.

    Arithmetic follows the input type, so ``Fraction`` conductances give an
    exact answer.  Vertices other than a and b with a single neighbour carry
    no current and are pruned.  A network that gets stuck (a Wheatstone
    bridge, say) is returned partially reduced with ``r_eff=None``.
    """
    sinks = as_sink_set(net, b)
    if a in sinks:
        raise SameVertex("source and sink coincide")
    trace = []
    if len(sinks) > 1:
        net, b = merge_vertices(net, sinks)
        trace.append(f"merge sink set {list(sinks)} into {b!r}")
    else:
        b = sinks[0]
    keep = {a, b}
    edges = {}
    nid = 0
    for u, v, c in net.edges:
        if u == v:
            trace.append(f"drop loop at {u!r}")
            continue
        edges[nid] = (u, v, c)
        nid += 1
    alive = set(net.vertices)

    changed = True
    while changed:
        changed = False
        groups = defaultdict(list)
        for k, (u, v, c) in edges.items():
            groups[frozenset((u, v))].append(k)
        for key, ids in groups.items():
            if len(ids) > 1:
                u, v, _ = edges[ids[0]]
                total = sum(edges[k][2] for k in ids)
                for k in ids:
                    del edges[k]
                edges[nid] = (u, v, total)
                nid += 1
                trace.append(f"parallel {u!r}-{v!r}: {len(ids)} edges -> conductance {total}")
                changed = True
        incident = defaultdict(list)
        for k, (u, v, _) in edges.items():
            incident[u].append(k)
            incident[v].append(k)
        for x in list(alive):
            if x in keep:
                continue
            ks = incident.get(x, [])
            if any(k not in edges for k in ks):
                continue  # touched earlier in this pass
            if len(ks) <= 1:
                for k in ks:
                    del edges[k]
                alive.discard(x)
                trace.append(f"prune dangling {x!r}")
                changed = True
            elif len(ks) == 2:
                (u1, v1, c1), (u2, v2, c2) = edges[ks[0]], edges[ks[1]]
                y = v1 if u1 == x else u1
                z = v2 if u2 == x else u2
                c = c1 * c2 / (c1 + c2)
                del edges[ks[0]], edges[ks[1]]
                edges[nid] = (y, z, c)
                nid += 1
                alive.discard(x)
                trace.append(f"series through {x!r}: {y!r}-{z!r} conductance {c}")
                changed = True
    reduced = Network(tuple(x for x in net.vertices if x in alive), tuple(edges.values()))
    if alive == keep and len(edges) == 1:
        (_, _, c), = edges.values()
        r = 1 / c
        trace.append(f"R_eff = {r}")
        return SeriesParallelResult(r, reduced, trace)
    if alive == keep and not edges:
        raise Disconnected("source and sink are not connected")
    trace.append("irreducible")
    return SeriesParallelResult(None, reduced, trace)

