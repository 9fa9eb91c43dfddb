"""Finite conductance networks and the reversible chains they induce.

A :class:`Network` is an undirected multigraph whose edges carry positive
conductances.  Parallel edges and self-loops are allowed.  The random walk
on a network moves from ``x`` to ``y`` with probability ``C_xy / C_x`` where
``C_xy`` sums the conductances of all x-y edges and ``C_x = sum_y C_xy``.
A self-loop contributes its conductance to ``C_x`` once.
"""

from __future__ import annotations

import io
import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from numbers import Real
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    Disconnected,
    EmptyEdgeList,
    NonPositiveConductance,
    NotReversible,
    UnknownVertex,
)

Vertex = Hashable
Edge = tuple  # (u, v, conductance)

DENSE_LIMIT = 5000


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable conductance network.

    ``vertices`` fixes the ordering used by every matrix derived from the
    network.  ``edges`` holds ``(u, v, conductance)`` triples in input order;
    conductances may be floats or exact ``Fraction`` values.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        index = {}
        for i, x in enumerate(self.vertices):
            if x in index:
                raise ValueError(f"duplicate vertex {x!r}")
            index[x] = i
        object.__setattr__(self, "_index", index)
        for u, v, c in self.edges:
            if u not in index or v not in index:
                raise UnknownVertex(f"edge ({u!r}, {v!r}) uses an unknown vertex")
            _check_conductance(c, u, v)

    # -- basic lookups -------------------------------------------------
    @property
    def index(self) -> dict:
        return self._index

    @property
    def n(self) -> int:
        return len(self.vertices)

    def idx(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {x!r}") from None

    def __contains__(self, x) -> bool:
        return x in self._index

    def __repr__(self) -> str:
        return f"Network(n={self.n}, edges={len(self.edges)})"

    # -- array views ---------------------------------------------------
    @cached_property
    def tails(self) -> np.ndarray:
        return np.fromiter((self._index[u] for u, _, _ in self.edges), dtype=np.intp,
                           count=len(self.edges))

    @cached_property
    def heads(self) -> np.ndarray:
        return np.fromiter((self._index[v] for _, v, _ in self.edges), dtype=np.intp,
                           count=len(self.edges))

    @cached_property
    def conductances(self) -> np.ndarray:
        return np.fromiter((float(c) for _, _, c in self.edges), dtype=float,
                           count=len(self.edges))

    @property
    def resistances(self) -> np.ndarray:
        return 1.0 / self.conductances

    @cached_property
    def conductance_csr(self) -> sp.csr_matrix:
        """Symmetric C_xy with parallel edges summed; a loop sits once on the diagonal."""
        t, h, c = self.tails, self.heads, self.conductances
        loop = t == h
        rows = np.concatenate([t, h[~loop]])
        cols = np.concatenate([h, t[~loop]])
        vals = np.concatenate([c, c[~loop]])
        m = sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()
        m.sum_duplicates()
        return m

    def conductance_matrix(self) -> np.ndarray:
        return self.conductance_csr.toarray()

    @cached_property
    def vertex_conductance(self) -> np.ndarray:
        """C_x for every vertex, in vertex order."""
        return np.asarray(self.conductance_csr.sum(axis=1)).ravel()

    @property
    def total_conductance(self) -> float:
        return float(self.vertex_conductance.sum())

    def C(self, x) -> float:
        return float(self.vertex_conductance[self.idx(x)])

    @cached_property
    def adjacency(self) -> tuple:
        """Neighbour index lists (unweighted, loops excluded, no duplicates)."""
        nbrs = [set() for _ in range(self.n)]
        for u, v in zip(self.tails.tolist(), self.heads.tolist()):
            if u != v:
                nbrs[u].add(v)
                nbrs[v].add(u)
        return tuple(tuple(sorted(s)) for s in nbrs)

    def degree(self, x) -> int:
        return len(self.adjacency[self.idx(x)])

    # -- structure -----------------------------------------------------
    def component_of(self, x) -> set:
        """Indices reachable from vertex ``x``."""
        start = self.idx(x)
        seen = {start}
        queue = deque([start])
        adj = self.adjacency
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.component_of(self.vertices[0])) == self.n

    def require_connected(self) -> None:
        if not self.is_connected():
            raise Disconnected("network is not connected")

    def edge_ids(self, u, v) -> list[int]:
        """Positions in ``edges`` of every edge joining u and v (either orientation)."""
        out = []
        for k, (x, y, _) in enumerate(self.edges):
            if (x == u and y == v) or (x == v and y == u):
                out.append(k)
        return out

    def with_edges(self, edges: Iterable[Edge], vertices: Sequence | None = None) -> "Network":
        return Network(tuple(self.vertices if vertices is None else vertices), tuple(edges))


def _check_conductance(c, u=None, v=None) -> None:
    if not isinstance(c, Real) or isinstance(c, bool):
        raise NonPositiveConductance(f"conductance of ({u!r}, {v!r}) is not a real number: {c!r}")
    if not (c > 0) or not math.isfinite(float(c)):
        raise NonPositiveConductance(f"conductance of ({u!r}, {v!r}) must be positive and finite, got {c!r}")


def build_network(edge_list: Iterable[Edge], vertices: Sequence | None = None) -> Network:
    """Build a network from ``(u, v, conductance)`` triples.

    Vertices are ordered by first appearance unless ``vertices`` is given
    (isolated vertices can only be introduced that way).
    """
    edges = tuple((u, v, c) for u, v, c in edge_list)
    if not edges:
        raise EmptyEdgeList("edge list is empty")
    for u, v, c in edges:
        _check_conductance(c, u, v)
    if vertices is None:
        order = dict.fromkeys(itertools.chain.from_iterable((u, v) for u, v, _ in edges))
        vertices = tuple(order)
    return Network(tuple(vertices), edges)


def from_resistances(edge_list: Iterable[Edge]) -> Network:
    """Same as :func:`build_network` but the third field is a resistance."""
    return build_network((u, v, 1 / r) for u, v, r in edge_list)


def transition_matrix(net: Network) -> np.ndarray:
    """Row-stochastic P with P_xy = C_xy / C_x."""
    net.require_connected()
    Cm = net.conductance_matrix()
    return Cm / Cm.sum(axis=1, keepdims=True)


def transition_csr(net: Network) -> sp.csr_matrix:
    Cm = net.conductance_csr
    inv = sp.diags(1.0 / net.vertex_conductance)
    return (inv @ Cm).tocsr()


def stationary_vector(net: Network) -> np.ndarray:
    """w_x = C_x / C; checked against wP = w."""
    net.require_connected()
    w = net.vertex_conductance / net.total_conductance
    if net.n <= DENSE_LIMIT:
        P = transition_matrix(net)
        if np.max(np.abs(w @ P - w)) > 1e-10:
            raise AssertionError("stationary vector failed wP = w")
    return w


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    max_violation: float
    cycle_violation: float
    cycles_checked: int

    def __bool__(self) -> bool:
        return self.reversible


def check_reversibility(P, w, tol: float = 1e-10, max_cycles: int = 2000,
                        seed: int = 0) -> ReversibilityReport:
    """Detailed balance w_x P_xy = w_y P_yx, plus the three-cycle criterion.

    The cycle check compares P_ab P_bc P_ca with P_ac P_cb P_ba over all
    triples (or ``max_cycles`` random ones for large chains).
    """
    P = np.asarray(P, dtype=float)
    w = np.asarray(w, dtype=float)
    flux = w[:, None] * P
    max_violation = float(np.max(np.abs(flux - flux.T))) if P.size else 0.0
    n = P.shape[0]
    triples = list(itertools.combinations(range(n), 3)) if n <= 20 else None
    if triples is None or len(triples) > max_cycles:
        rng = np.random.default_rng(seed)
        triples = [tuple(rng.choice(n, size=3, replace=False)) for _ in range(max_cycles)]
    cyc = 0.0
    for a, b, c in triples:
        cyc = max(cyc, abs(P[a, b] * P[b, c] * P[c, a] - P[a, c] * P[c, b] * P[b, a]))
    return ReversibilityReport(max_violation <= tol, max_violation, float(cyc), len(triples))


def network_from_chain(P, w, vertices: Sequence | None = None, tol: float = 1e-10) -> Network:
    """Network with C_xy = w_x P_xy; a positive P_xx becomes a self-loop."""
    P = np.asarray(P, dtype=float)
    w = np.asarray(w, dtype=float)
    report = check_reversibility(P, w, tol=tol)
    if not report.reversible:
        raise NotReversible(f"detailed balance violated by {report.max_violation:.3g}")
    n = P.shape[0]
    vertices = tuple(range(n)) if vertices is None else tuple(vertices)
    edges = []
    for x in range(n):
        for y in range(x, n):
            if P[x, y] > 0:
                edges.append((vertices[x], vertices[y], float(w[x] * P[x, y])))
    return build_network(edges, vertices=vertices)


# -- edge-list text format ----------------------------------------------

def _token_to_vertex(tok: str):
    return tok


def parse_edge_list(text: str) -> Network:
    """Parse ``<u> <v> <conductance>`` lines; ``#`` starts a comment."""
    edges = []
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<u> <v> <conductance>', got {raw.strip()!r}")
        u, v, c = parts
        try:
            cond = float(c)
        except ValueError:
            raise ValueError(f"line {lineno}: bad conductance {c!r}") from None
        edges.append((_token_to_vertex(u), _token_to_vertex(v), cond))
    return build_network(edges)


def read_edge_list(path) -> Network:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def format_edge_list(net: Network) -> str:
    lines = [f"{u} {v} {float(c)!r}" for u, v, c in net.edges]
    return "\n".join(lines) + "\n"


def merge_vertices(net: Network, group: Iterable, label=None) -> tuple[Network, object]:
    """Identify the vertices of ``group`` into one node.

    Edges with both ends in the group are dropped; all other edges (parallel
    ones included) are kept with their endpoints relabelled.  The merged node
    takes ``label`` or, by default, the group member that comes first in the
    vertex order.  Returns the new network and the merged label.
    """
    members = {net.vertices[net.idx(x)] for x in group}
    if not members:
        raise ValueError("cannot merge an empty vertex set")
    first = min(members, key=net.idx)
    label = first if label is None else label
    if label not in members and label in net:
        raise ValueError(f"label {label!r} already names another vertex")
    vertices = []
    for x in net.vertices:
        if x in members:
            if x == first:
                vertices.append(label)
        else:
            vertices.append(x)
    edges = []
    for u, v, c in net.edges:
        iu, iv = u in members, v in members
        if iu and iv:
            continue
        edges.append((label if iu else u, label if iv else v, c))
    return Network(tuple(vertices), tuple(edges)), label


def induced_subnetwork(net: Network, keep: Iterable[int]) -> Network:
    """Network on the vertex indices ``keep`` (vertex order preserved)."""
    keep = sorted(set(keep))
    names = {net.vertices[i] for i in keep}
    edges = tuple(e for e in net.edges if e[0] in names and e[1] in names)
    return Network(tuple(net.vertices[i] for i in keep), edges)
