"""Discrete Dirichlet problems: exact solve, Gauss-Seidel relaxation, Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidBoundary, MaxSweepsExceeded, SingularSystem
from .network import DENSE_LIMIT, Network, transition_csr
from .walks import simulate


@dataclass(frozen=True, eq=False)
class BoundaryProblem:
    net: Network
    values: Mapping

    def __post_init__(self):
        vals = {}
        for x, f in dict(self.values).items():
            self.net.idx(x)
            vals[x] = float(f)
        if not vals:
            raise InvalidBoundary("boundary is empty")
        if len(vals) >= self.net.n:
            raise InvalidBoundary("boundary must be a strict subset of the vertices")
        object.__setattr__(self, "values", vals)
        # every interior vertex must reach the boundary
        seen = set(self.boundary_idx.tolist())
        frontier = list(seen)
        adj = self.net.adjacency
        while frontier:
            u = frontier.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if len(seen) != self.net.n:
            stranded = [self.net.vertices[i] for i in range(self.net.n) if i not in seen]
            raise InvalidBoundary(f"interior vertices cannot reach the boundary: {stranded[:5]!r}")

    @property
    def boundary(self) -> tuple:
        return tuple(self.values)

    @property
    def boundary_idx(self) -> np.ndarray:
        return np.array([self.net.idx(x) for x in self.values], dtype=np.intp)

    @property
    def interior_idx(self) -> np.ndarray:
        mask = np.ones(self.net.n, dtype=bool)
        mask[self.boundary_idx] = False
        return np.flatnonzero(mask)

    @property
    def interior(self) -> tuple:
        return tuple(self.net.vertices[i] for i in self.interior_idx)

    def full_vector(self, interior_values: np.ndarray) -> np.ndarray:
        f = np.empty(self.net.n)
        f[self.boundary_idx] = list(self.values.values())
        f[self.interior_idx] = interior_values
        return f


@dataclass
class HarmonicSolution:
    problem: BoundaryProblem
    array: np.ndarray  # values in vertex order
    residual: float
    method: str
    iterations: int = 0
    converged: bool = True
    stderr: np.ndarray | None = None
    trace: list = field(default_factory=list)

    @property
    def values(self) -> dict:
        return dict(zip(self.problem.net.vertices, self.array.tolist()))

    def __getitem__(self, x) -> float:
        return float(self.array[self.problem.net.idx(x)])


def read_boundary(path, net: Network) -> BoundaryProblem:
    vals = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidBoundary(f"line {lineno}: expected '<vertex> <value>'")
        vals[parts[0]] = float(parts[1])
    return BoundaryProblem(net, vals)


def check_harmonic(net: Network, f, interior) -> float:
    """max over ``interior`` of |f(x) - sum_y P_xy f(y)|."""
    if isinstance(f, Mapping):
        vec = np.array([float(f[x]) for x in net.vertices])
    else:
        vec = np.asarray(f, dtype=float)
    idx = np.array([net.idx(x) for x in interior], dtype=np.intp)
    if idx.size == 0:
        return 0.0
    avg = transition_csr(net) @ vec
    return float(np.max(np.abs(vec[idx] - avg[idx])))


def _linear_system(problem: BoundaryProblem):
    """(I - Q) and u = R f_B restricted to the interior, as sparse matrices."""
    P = transition_csr(problem.net)
    D, B = problem.interior_idx, problem.boundary_idx
    fB = np.array(list(problem.values.values()))
    Q = P[D][:, D]
    u = P[D][:, B] @ fB
    A = sp.identity(len(D), format="csr") - Q
    return A, u


def _dense_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(A, rhs)  # LU with partial pivoting
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite solution")
    return x


def solve_exact(problem: BoundaryProblem) -> HarmonicSolution:
    """Solve (I - Q) x = u directly.

    Dense LU up to ``DENSE_LIMIT`` interior vertices, sparse LU beyond that.
    """
    A, u = _linear_system(problem)
    if A.shape[0] <= DENSE_LIMIT:
        x = _dense_solve(A.toarray(), u)
    else:
        x = spla.spsolve(A.tocsc(), u)
        if not np.all(np.isfinite(x)):
            raise SingularSystem("sparse solve failed")
    f = problem.full_vector(x)
    res = check_harmonic(problem.net, f, problem.interior)
    return HarmonicSolution(problem, f, res, "exact")


def solve_relaxation(problem: BoundaryProblem, tol: float = 1e-10, max_sweeps: int = 100_000,
                     initial=None, order: Sequence | None = None, record: bool = False,
                     strict: bool = False) -> HarmonicSolution:
    """Gauss-Seidel sweeps over the interior in a fixed order.

    Each interior value is replaced, in place, by the P-weighted average of
    its neighbours; a self-loop is accounted for by solving the local
    equation for f(x).  Iteration stops once the largest change in a sweep
    drops below ``tol``.  On hitting ``max_sweeps`` the last iterate is
    returned with ``converged=False`` (or :class:`MaxSweepsExceeded` is
    raised if ``strict``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    net = problem.net
    P = transition_csr(net)
    P.sort_indices()
    indptr, indices, data = P.indptr, P.indices.tolist(), P.data.tolist()
    f = np.zeros(net.n)
    if initial is not None:
        if isinstance(initial, Mapping):
            for x, val in initial.items():
                f[net.idx(x)] = float(val)
        else:
            f[:] = np.asarray(initial, dtype=float)
    f[problem.boundary_idx] = list(problem.values.values())
    if order is None:
        sweep = problem.interior_idx.tolist()
    else:
        sweep = [net.idx(x) for x in order]
        if sorted(sweep) != sorted(problem.interior_idx.tolist()):
            raise ValueError("order must list every interior vertex exactly once")
    rows = []
    for i in sweep:
        lo, hi = indptr[i], indptr[i + 1]
        nb = [(j, p) for j, p in zip(indices[lo:hi], data[lo:hi]) if j != i]
        self_p = sum(p for j, p in zip(indices[lo:hi], data[lo:hi]) if j == i)
        rows.append((i, nb, 1.0 - self_p))
    vals = f.tolist()
    trace = []
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        change = 0.0
        for i, nb, denom in rows:
            new = sum(p * vals[j] for j, p in nb) / denom
            d = abs(new - vals[i])
            if d > change:
                change = d
            vals[i] = new
        if record:
            trace.append([vals[i] for i in sweep])
        if change < tol:
            converged = True
            break
    f = np.array(vals)
    if not converged and strict:
        raise MaxSweepsExceeded(f"no convergence after {max_sweeps} sweeps")
    res = check_harmonic(net, f, problem.interior)
    return HarmonicSolution(problem, f, res, "relax", sweeps, converged, trace=trace)


def solve_monte_carlo(problem: BoundaryProblem, walks_per_vertex: int = 10_000, seed: int = 0,
                      threads: int | None = None) -> HarmonicSolution:
    """Average boundary payoff of independent walks started at each interior vertex."""
    if walks_per_vertex < 1:
        raise ValueError("walks_per_vertex must be at least 1")
    net = problem.net
    payoff = np.zeros(net.n)
    payoff[problem.boundary_idx] = list(problem.values.values())
    f = payoff.copy()
    err = np.zeros(net.n)
    for i in problem.interior_idx:
        res = simulate(net, net.vertices[i], problem.boundary, walks_per_vertex, seed,
                       threads=threads)
        pay = payoff[res.final]
        f[i] = pay.mean()
        err[i] = pay.std(ddof=1) / math.sqrt(walks_per_vertex) if walks_per_vertex > 1 else math.inf
    res = check_harmonic(net, f, problem.interior)
    return HarmonicSolution(problem, f, res, "mc", walks_per_vertex, True, stderr=err)
