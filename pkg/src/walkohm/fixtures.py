"""Small named networks and chains used as worked examples and regression fixtures."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from .dirichlet import BoundaryProblem
from .network import Network, build_network, from_resistances


def grid_problem() -> tuple[BoundaryProblem, tuple]:
    """Five interior lattice points a..e with 0/1 boundary values.

    Returns the problem and the column-major sweep order ``(c, d, a, e, b)``.
    Boundary points are named by grid position ``"r<row>c<col>"``.
    """
    interior = {"a": (2, 2), "b": (2, 3), "c": (3, 1), "d": (3, 2), "e": (3, 3)}
    boundary = {(1, 2): 1, (1, 3): 1, (2, 1): 1, (2, 4): 1, (3, 0): 1, (3, 4): 0,
                (4, 1): 1, (4, 2): 0, (4, 3): 0}
    name = {pos: k for k, pos in interior.items()}
    name.update({pos: f"r{pos[0]}c{pos[1]}" for pos in boundary})
    edges = []
    seen = set()
    for k, (r, c) in interior.items():
        for nb in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            key = frozenset(((r, c), nb))
            if key not in seen:
                seen.add(key)
                edges.append((k, name[nb], 1))
    net = build_network(edges)
    values = {name[pos]: v for pos, v in boundary.items()}
    return BoundaryProblem(net, values), ("c", "d", "a", "e", "b")


GRID_EXACT = {"a": .823, "b": .787, "c": .876, "d": .506, "e": .323}


def path(n: int, conductance=1) -> Network:
    """Vertices 0..n joined in a line."""
    return build_network([(i, i + 1, conductance) for i in range(n)])


def madison(n: int = 5) -> BoundaryProblem:
    return BoundaryProblem(path(n), {0: 0.0, n: 1.0})


def four_node() -> Network:
    """C_a=2, C_b=3, C_c=4, C_d=5."""
    return build_network([("a", "c", 1), ("a", "d", 1), ("b", "c", 1), ("b", "d", 2), ("c", "d", 2)],
                         vertices=("a", "b", "c", "d"))


# unit current from a to b in ``four_node`` measured by simulation, edge order as built
SIMULATED_FLOW = {("a", "c"): .4754, ("a", "d"): .5246, ("c", "b"): .3672,
                  ("c", "d"): .1082, ("d", "b"): .6328}


def unit_cube(exact: bool = False) -> Network:
    """Unit resistors on the cube, corners named a..h.

    a=000, b=100, c=010, d=001, e=110, f=101, g=011, h=111.
    """
    one = Fraction(1) if exact else 1
    names = {(0, 0, 0): "a", (1, 0, 0): "b", (0, 1, 0): "c", (0, 0, 1): "d",
             (1, 1, 0): "e", (1, 0, 1): "f", (0, 1, 1): "g", (1, 1, 1): "h"}
    edges = []
    for p, name in names.items():
        for k in range(3):
            if p[k] == 0:
                q = list(p)
                q[k] = 1
                edges.append((name, names[tuple(q)], one))
    return build_network(edges, vertices=tuple("abcdefgh"))


def ehrenfest_chain(n: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Urn chain on 0..n with binomial stationary vector."""
    P = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        if i < n:
            P[i, i + 1] = (n - i) / n
        if i > 0:
            P[i, i - 1] = i / n
    w = np.array([comb(n, i) for i in range(n + 1)], dtype=float) / 2 ** n
    return P, w


LAND_OF_OZ = np.array([[.5, .25, .25], [.5, 0, .5], [.25, .25, .5]])


def ladder(n: int, exact: bool = True) -> Network:
    """Ladder from ``a`` to ``b`` with resistance R_n satisfying R_{n+1} = (2 + 2R_n)/(2 + R_n).

    Top rail a - x1 - ... - xn; the first rail resistor is 1 and every later
    rail and rung resistor at step k is 2**-(k-1), so each added step halves
    the scale of the tail and R_{n+1} = 1 + (1 || R_n/2).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    unit = Fraction(1) if exact else 1.0
    edges = [("a", "x1", unit)]
    for k in range(1, n + 1):
        r = unit / 2 ** (k - 1)
        if k > 1:
            edges.append((f"x{k-1}", f"x{k}", r))
        edges.append((f"x{k}", "b", r))
    return from_resistances(edges)


def ladder_recurrence(n: int) -> list[Fraction]:
    R = [Fraction(2)]
    while len(R) < n:
        R.append((2 + 2 * R[-1]) / (2 + R[-1]))
    return R


def street_grid(size: int = 5) -> tuple[Network, tuple, tuple]:
    """Square patch of streets; ``a`` near the centre, ``b`` the far corner."""
    edges = []
    for x in range(size):
        for y in range(size):
            if x + 1 < size:
                edges.append(((x, y), (x + 1, y), 1))
            if y + 1 < size:
                edges.append(((x, y), (x, y + 1), 1))
    net = build_network(edges)
    return net, (size // 2, size // 2), (size - 1, size - 1)


def star(leaves: int) -> Network:
    return build_network([("hub", f"leaf{i}", 1) for i in range(leaves)])
