"""Finite pieces of infinite graphs and recurrence/transience evidence.

Balls are taken in graph distance for the chosen step set.  The sphere
S(r) is grounded (shorted into one sink) and the origin is the source, so
R(r) is the resistance from the origin to S(r).
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .electric import EdgeFlow, reduce_series_parallel
from .errors import NotUnitFlow, RadiusTooLargeForDeskScale
from .network import Network, build_network, merge_vertices

MAX_BALL_VERTICES = 200_000


def step_set(d: int, kind: str = "sc") -> tuple:
    kind = kind.lower()
    if kind == "sc":
        out = []
        for i in range(d):
            for s in (1, -1):
                v = [0] * d
                v[i] = s
                out.append(tuple(v))
        return tuple(out)
    if d != 3:
        raise ValueError(f"step set {kind!r} is only defined in three dimensions")
    if kind == "bcc":
        return tuple(itertools.product((1, -1), repeat=3))
    if kind == "fcc":
        out = []
        for i, j in itertools.combinations(range(3), 2):
            for si, sj in itertools.product((1, -1), repeat=2):
                v = [0, 0, 0]
                v[i], v[j] = si, sj
                out.append(tuple(v))
        return tuple(out)
    raise ValueError(f"unknown step set {kind!r}")


def _resolve_steps(d: int, steps) -> tuple:
    if isinstance(steps, str):
        return step_set(d, steps)
    steps = tuple(tuple(int(c) for c in s) for s in steps)
    if any(len(s) != d for s in steps):
        raise ValueError("step vectors must have length d")
    # the walk is symmetric, so close the set under negation
    return tuple(dict.fromkeys(steps + tuple(tuple(-c for c in s) for s in steps)))


@dataclass(eq=False)
class BallGraph:
    d: int
    r: int
    steps: tuple
    points: list          # lattice points, origin first, sorted by distance
    dist: np.ndarray
    tails: np.ndarray     # edge endpoints as indices into ``points``
    heads: np.ndarray

    @property
    def origin(self) -> tuple:
        return self.points[0]

    @property
    def sphere(self) -> list:
        return [p for p, k in zip(self.points, self.dist) if k == self.r]

    def level(self, k: int) -> list:
        return [p for p, q in zip(self.points, self.dist) if q == k]

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def network(self) -> Network:
        edges = [(self.points[u], self.points[v], 1) for u, v in zip(self.tails.tolist(), self.heads.tolist())]
        return build_network(edges, vertices=self.points)

    def degree(self, p) -> int:
        i = self.index[p]
        return int(np.sum(self.tails == i) + np.sum(self.heads == i))


def build_ball(d: int, r: int, steps="sc", limit: int = MAX_BALL_VERTICES) -> BallGraph:
    """All lattice points within graph distance ``r`` of the origin, unit resistors on edges."""
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if r < 1:
        raise ValueError("r must be at least 1")
    steps = _resolve_steps(d, steps)
    origin = (0,) * d
    dist = {origin: 0}
    order = [origin]
    frontier = [origin]
    for k in range(1, r + 1):
        nxt = []
        for p in frontier:
            for s in steps:
                q = tuple(a + b for a, b in zip(p, s))
                if q not in dist:
                    dist[q] = k
                    nxt.append(q)
                    if len(dist) > limit:
                        raise RadiusTooLargeForDeskScale(
                            f"ball of radius {r} exceeds {limit} vertices")
        nxt.sort()
        order.extend(nxt)
        frontier = nxt
    index = {p: i for i, p in enumerate(order)}
    tails, heads = [], []
    half = [s for s in steps if s > tuple(-c for c in s)]  # one of each +-pair
    for p in order:
        i = index[p]
        for s in half:
            q = tuple(a + b for a, b in zip(p, s))
            j = index.get(q)
            if j is not None:
                tails.append(i)
                heads.append(j)
    return BallGraph(d, r, steps, order, np.array([dist[p] for p in order]),
                     np.array(tails, dtype=np.intp), np.array(heads, dtype=np.intp))


def _grounded_laplacian(n: int, tails, heads, cond, grounded: np.ndarray):
    L = sp.coo_matrix((np.concatenate([cond, cond, -cond, -cond]),
                       (np.concatenate([tails, heads, tails, heads]),
                        np.concatenate([tails, heads, heads, tails]))), shape=(n, n)).tocsr()
    keep = np.flatnonzero(~grounded)
    return L[keep][:, keep].tocsc(), keep


def ball_voltages(ball: BallGraph) -> dict:
    """Voltages with the origin at 1 and S(r) at 0."""
    n = len(ball.points)
    grounded = ball.dist == ball.r
    L, keep = _grounded_laplacian(n, ball.tails, ball.heads, np.ones(len(ball.tails)), grounded)
    rhs = np.zeros(len(keep))
    rhs[0] = 1.0  # unit current into the origin (index 0 is always kept)
    v = np.zeros(n)
    v[keep] = spla.spsolve(L, rhs)
    v /= v[0]
    return dict(zip(ball.points, v.tolist()))


def ball_resistance(ball: BallGraph) -> float:
    """R_eff from the origin to S(r) via a sparse solve of the grounded Laplacian."""
    grounded = ball.dist == ball.r
    L, keep = _grounded_laplacian(len(ball.points), ball.tails, ball.heads,
                                  np.ones(len(ball.tails)), grounded)
    rhs = np.zeros(len(keep))
    rhs[0] = 1.0
    return float(spla.spsolve(L, rhs)[0])


def ball_escape_sequence(d: int, r_max: int, steps="sc") -> list:
    """[(r, R(r), p_esc(r))] for r = 1..r_max, with p_esc = 1/(deg * R)."""
    out = []
    deg = len(_resolve_steps(d, steps))
    for r in range(1, r_max + 1):
        R = ball_resistance(build_ball(d, r, steps))
        out.append((r, R, 1.0 / (deg * R)))
    return out


def shell_edge_count(d: int, n: int) -> int:
    """Number of SC edges joining S(n) to S(n+1)."""
    return {1: 2, 2: 8 * n + 4, 3: 12 * n * n + 12 * n + 6}[d]


def shorted_ball(ball: BallGraph) -> tuple[Network, object, object]:
    """The ball with every sphere S(1), ..., S(r) shorted to a single node."""
    net = ball.network
    for k in range(1, ball.r + 1):
        net, _ = merge_vertices(net, ball.level(k), label=("S", k))
    return net, ball.origin, ("S", ball.r)


def shorted_lower_bound(d: int, r: int, exact: bool = False):
    """Resistance of the SC ball with all spheres shorted: sum_{n<r} 1/e(n)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if exact:
        return sum(Fraction(1, shell_edge_count(d, n)) for n in range(r))
    n = np.arange(r, dtype=float)
    e = {1: np.full(r, 2.0), 2: 8 * n + 4, 3: 12 * n * n + 12 * n + 6}[d]
    return math.fsum((1.0 / e).tolist())


def shorted_2d_lower_bound(r_max: int, exact: bool = False):
    """sum_{n=0}^{r_max-1} 1/(8n+4), a lower bound on R(r_max) for Z^2."""
    return shorted_lower_bound(2, r_max, exact)


# -- trees ----------------------------------------------------------------

@dataclass(frozen=True)
class TreeKind:
    name: str
    roots: int    # branches leaving the root
    split: int    # each branch ends by splitting into this many
    doubling: bool  # branch length doubles at each level

    def level(self, k: int) -> tuple[int, int]:
        """(number of branches, length of each branch) at level k >= 0."""
        return self.roots * self.split ** k, (2 ** k if self.doubling else 1)


TREES = {
    "binary": TreeKind("binary", 2, 2, False),
    "deg3": TreeKind("deg3", 3, 2, False),
    "nt2": TreeKind("nt2", 2, 2, True),
    "nt3": TreeKind("nt3", 4, 4, True),
    "nt2.58": TreeKind("nt2.58", 3, 3, True),
}


@dataclass
class TreeResult:
    kind: str
    R: list                # exact R_1..R_n
    level_terms: list
    limit: object          # exact limit, or math.inf
    recurrence_ok: bool

    @property
    def transient(self) -> bool:
        return self.limit != math.inf


def tree_resistance(kind: str, n_levels: int) -> TreeResult:
    """Root-to-level-n resistance by collapsing each level to a parallel pack.

    Every vertex at a given distance from the root is at the same voltage,
    so shorting them changes nothing and the tree becomes a series chain of
    level packs.  The values are also checked against the self-similar
    recursion R_{n+1} = t_0 + rho R_n, where rho is the scale of a subtree
    hanging off the first level.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be at least 1")
    shape = TREES[kind]
    terms = []
    for k in range(n_levels):
        count, length = shape.level(k)
        terms.append(Fraction(length, count))
    R = list(itertools.accumulate(terms))
    rho = Fraction(2 if shape.doubling else 1, shape.split)
    ok = _check_recursion(shape, R)
    limit = math.inf if rho == 1 else terms[0] / (1 - rho)
    return TreeResult(kind, R, terms, limit, ok)


def _check_recursion(shape: TreeKind, R: list) -> bool:
    """Self-similarity: a first-level branch end carries a copy of the tree scaled by 2 (or 1).

    For a tree whose root fans out like every other vertex this gives
    R_{n+1} = t_0 + rho R_n with rho = (length scale)/split.  A different root
    fan-out only rescales the whole sequence by split/roots.
    """
    rho = Fraction(2 if shape.doubling else 1, shape.split)
    reg = [x * Fraction(shape.roots, shape.split) for x in R]
    return all(reg[n + 1] == reg[0] + rho * reg[n] for n in range(len(reg) - 1))


def tree_network(kind: str, n_levels: int) -> tuple[Network, object, tuple]:
    """The tree itself, branch by branch, with its level-n endpoints as the sink set."""
    shape = TREES[kind]
    edges = []
    counter = itertools.count(1)
    root = 0
    ends = [root]
    for k in range(n_levels):
        _, length = shape.level(k)
        fan = shape.roots if k == 0 else shape.split
        new_ends = []
        for start in ends:
            for _ in range(fan):
                prev = start
                for _ in range(length):
                    nxt = next(counter)
                    edges.append((prev, nxt, 1))
                    prev = nxt
                new_ends.append(prev)
        ends = new_ends
    return build_network(edges), root, tuple(ends)


# -- k-fuzz ------------------------------------------------------------------

def k_fuzz(net: Network, k: int) -> Network:
    """Add a unit edge between every pair at graph distance 2..k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = net.adjacency
    new = []
    for s in range(net.n):
        seen = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if seen[u] == k:
                continue
            for w in adj[u]:
                if w not in seen:
                    seen[w] = seen[u] + 1
                    queue.append(w)
        for t, dist in seen.items():
            if t > s and dist >= 2:
                new.append((net.vertices[s], net.vertices[t], 1))
    return net.with_edges(net.edges + tuple(new))


def edge_pairs(net: Network) -> set:
    return {frozenset((u, v)) for u, v, _ in net.edges if u != v}


# -- flows on the positive orthant ------------------------------------------------

def orthant_flow_value(d: int, p: Sequence[int], i: int) -> Fraction:
    """Flow from p to p + e_i for the uniform orthant flow (p >= 0 componentwise)."""
    n = sum(p)
    if d == 2:
        return Fraction(p[i] + 1, (n + 1) * (n + 2))
    if d == 3:
        return Fraction(2 * (p[i] + 1), (n + 1) * (n + 2) * (n + 3))
    raise ValueError("orthant flow is defined for d = 2 or 3")


def orthant_points(d: int, level: int):
    for p in itertools.product(range(level + 1), repeat=d):
        if sum(p) == level:
            yield p


@dataclass
class OrthantFlow:
    d: int
    n_max: int
    level_energy: list        # exact energy of the edges leaving level n
    max_divergence: Fraction  # at non-origin vertices up to level n_max
    source_strength: Fraction

    @property
    def energy_partial_sums(self) -> list:
        return list(itertools.accumulate(self.level_energy))


def orthant_flow(d: int, n_max: int) -> OrthantFlow:
    """Exact energy by level and divergence bookkeeping for the uniform orthant flow."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    energy = []
    worst = Fraction(0)
    source = sum(orthant_flow_value(d, (0,) * d, i) for i in range(d))
    for n in range(n_max + 1):
        e = Fraction(0)
        for p in orthant_points(d, n):
            out = Fraction(0)
            for i in range(d):
                j = orthant_flow_value(d, p, i)
                out += j
                e += j * j
            if n == 0:
                continue
            inflow = Fraction(0)
            for i in range(d):
                if p[i] > 0:
                    q = list(p)
                    q[i] -= 1
                    inflow += orthant_flow_value(d, q, i)
            worst = max(worst, abs(out - inflow))
        if n < n_max:
            energy.append(e)
    return OrthantFlow(d, n_max, energy, worst, source)


def orthant_energy_bound(n_max: int) -> float:
    """12 * sum_{n < n_max} 1/(n+1)^2, the level-by-level bound for d = 3."""
    return 12 * math.fsum(1.0 / (n + 1) ** 2 for n in range(n_max))


def orthant_ball(d: int, r: int) -> BallGraph:
    """The part of the SC ball lying in the closed positive orthant."""
    full = build_ball(d, r, "sc")
    keep = [i for i, p in enumerate(full.points) if min(p) >= 0]
    pos = {i: k for k, i in enumerate(keep)}
    mask = np.array([(t in pos and h in pos) for t, h in zip(full.tails.tolist(), full.heads.tolist())],
                    dtype=bool)
    tails = np.array([pos[t] for t in full.tails[mask].tolist()], dtype=np.intp)
    heads = np.array([pos[h] for h in full.heads[mask].tolist()], dtype=np.intp)
    return BallGraph(d, r, full.steps, [full.points[i] for i in keep], full.dist[keep], tails, heads)


def orthant_flow_function(d: int) -> Callable:
    """Flow on the SC orthant as a function of a directed edge (p, q)."""
    def f(p, q):
        diff = [b - a for a, b in zip(p, q)]
        if min(p) < 0 or min(q) < 0:
            return Fraction(0)
        if sorted(diff) == [0] * (d - 1) + [1]:
            return orthant_flow_value(d, p, diff.index(1))
        if sorted(diff) == [-1] + [0] * (d - 1):
            return -orthant_flow_value(d, q, diff.index(-1))
        return Fraction(0)
    return f


def symmetrized_orthant_flow(d: int) -> Callable:
    """Average of the orthant flow over all 2^d coordinate reflections (a flow on full Z^d)."""
    base = orthant_flow_function(d)
    signs = list(itertools.product((1, -1), repeat=d))

    def f(p, q):
        total = Fraction(0)
        for s in signs:
            total += base(tuple(a * b for a, b in zip(p, s)), tuple(a * b for a, b in zip(q, s)))
        return total / len(signs)
    return f


EMBEDDINGS = {
    "bcc": ((1, 1, 1), (1, 1, -1), (1, -1, 1)),
    "fcc": ((1, 1, 0), (1, 0, 1), (0, 1, 1)),
}


def embedded_orthant_flow(kind: str) -> Callable:
    """Push the SC orthant flow forward along x e1 + y e2 + z e3 -> x a + y b + c z.

    The three image vectors are steps of the target lattice and span it over
    the reals, so the map is injective and carries SC orthant edges onto
    lattice edges.
    """
    cols = np.array(EMBEDDINGS[kind], dtype=float).T
    inv = np.linalg.inv(cols)
    base = orthant_flow_function(3)

    def pre(p):
        x = inv @ np.asarray(p, dtype=float)
        r = np.rint(x)
        if np.max(np.abs(x - r)) > 1e-9:
            return None
        return tuple(int(v) for v in r)

    def f(p, q):
        pp, qq = pre(p), pre(q)
        if pp is None or qq is None:
            return Fraction(0)
        return base(pp, qq)
    return f


def flow_on_ball(ball: BallGraph, flow: Callable) -> EdgeFlow:
    vals = [flow(ball.points[t], ball.points[h]) for t, h in zip(ball.tails.tolist(), ball.heads.tolist())]
    return EdgeFlow(ball.network, np.array([float(v) for v in vals]), ball.origin, ball.sphere)


def flow_certificate_bound(ball: BallGraph, flow, tol: float = 1e-12) -> float:
    """Energy of ``flow`` restricted to the ball; an upper bound on R(r).

    ``flow`` is either an EdgeFlow on ``ball.network`` or a function of a
    directed edge ``(p, q)``.  The restriction must be a unit flow from the
    origin into S(r), otherwise :class:`NotUnitFlow` is raised.
    """
    j = flow if isinstance(flow, EdgeFlow) else flow_on_ball(ball, flow)
    div = j.divergence()
    inner = ball.dist < ball.r
    inner[0] = False
    if abs(div[0] - 1.0) > tol or (inner.any() and np.max(np.abs(div[inner])) > tol):
        raise NotUnitFlow("flow restricted to the ball is not a unit flow into the sphere")
    return j.energy()


# -- verdicts ----------------------------------------------------------------

@dataclass
class TypeVerdict:
    verdict: str  # "Recurrent" | "Transient" | "Undetermined"
    method: str
    evidence: dict = field(default_factory=dict)


def classify_type(target, method: str = "short", budget: int = 1000, steps: str = "sc") -> TypeVerdict:
    """Decide recurrence or transience for Z^d (``target`` = d) or a tree kind.

    ``short``: the sphere-shorted series; its divergence (terms at least
    c/(n+1)) proves recurrence.  ``flow``: an explicit finite-energy unit
    flow to infinity proves transience.  ``balls``: the resistance sequence
    R(1..budget), decided by whichever of the two certificates applies.
    """
    if isinstance(target, str):
        res = tree_resistance(target, budget)
        ev = {"R_n": float(res.R[-1]), "levels": budget,
              "limit": math.inf if res.limit == math.inf else float(res.limit)}
        return TypeVerdict("Recurrent" if res.limit == math.inf else "Transient", "collapse", ev)
    d = int(target)
    steps = steps.lower()
    if method == "short":
        if steps != "sc":
            return TypeVerdict("Undetermined", method, {"reason": "shorted series implemented for SC only"})
        partial = shorted_lower_bound(d, budget)
        # divergence test: e(n) <= C (n+1)^(d-1), harmonic-like exactly when d <= 2
        ev = {"partial_sum": partial, "terms": budget}
        if d <= 2:
            ev["comparison"] = f"1/e(n) >= 1/({shell_edge_count(d, 1)}(n+1)) and sum 1/(n+1) diverges"
            return TypeVerdict("Recurrent", method, ev)
        ev["reason"] = "shorted series converges, so it gives no conclusion"
        return TypeVerdict("Undetermined", method, ev)
    if method == "flow":
        if d != 3:
            ev = {"reason": "no finite-energy flow certificate in dimension < 3"}
            return TypeVerdict("Undetermined", method, ev)
        of = orthant_flow(3, min(budget, 60))
        ev = {"orthant_energy_partial": float(of.energy_partial_sums[-1]),
              "energy_bound": 12 * math.pi ** 2 / 6, "steps": steps,
              "reasoning": ("unit flow to infinity with energy < 2 pi^2 on a subgraph "
                            + ("(orthant of SC)" if steps == "sc" else f"(SC orthant embedded in {steps})")
                            + "; adding the rest of the lattice can only lower the resistance")}
        if steps in ("sc", "bcc", "fcc"):
            return TypeVerdict("Transient", method, ev)
        return TypeVerdict("Undetermined", method, ev)
    if method == "balls":
        seq = ball_escape_sequence(d, budget, steps)
        ev = {"sequence": [(r, R, p) for r, R, p in seq]}
        if d <= 2 and steps == "sc":
            ev["lower_bound"] = shorted_lower_bound(d, budget)
            return TypeVerdict("Recurrent", method, ev)
        if d == 3:
            ev["upper_bound"] = 12 * math.pi ** 2 / 6
            return TypeVerdict("Transient", method, ev)
        return TypeVerdict("Undetermined", method, ev)
    raise ValueError(f"unknown method {method!r}")
