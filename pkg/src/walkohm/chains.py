"""Absorbing Markov chains in canonical form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dirichlet import BoundaryProblem, HarmonicSolution, check_harmonic
from .errors import NoAbsorbingState, SingularIminusQ, UnreachableAbsorption
from .network import Network, transition_matrix


@dataclass(frozen=True, eq=False)
class AbsorbingChain:
    """Transition matrix with the absorbing states listed first.

    ``order`` is the canonical permutation: absorbing states in the order
    given, then the remaining states in their original order.  ``P`` is the
    canonical-form matrix ``[[I, 0], [R, Q]]``.
    """

    states: tuple
    absorbing: tuple
    order: tuple
    P: np.ndarray

    @property
    def k(self) -> int:
        return len(self.absorbing)

    @property
    def transient(self) -> tuple:
        return tuple(self.states[i] for i in self.order[self.k:])

    @property
    def Q(self) -> np.ndarray:
        return self.P[self.k:, self.k:]

    @property
    def R(self) -> np.ndarray:
        return self.P[self.k:, :self.k]

    @property
    def labels(self) -> tuple:
        return tuple(self.states[i] for i in self.order)


@dataclass(frozen=True, eq=False)
class AbsorbingChainSolution:
    chain: AbsorbingChain
    N: np.ndarray
    t: np.ndarray
    B: np.ndarray


def absorbing_chain(P, absorbing: Sequence, states: Sequence | None = None) -> AbsorbingChain:
    """Canonical form of ``P`` after making ``absorbing`` states absorbing."""
    P = np.array(P, dtype=float)
    n = P.shape[0]
    states = tuple(range(n)) if states is None else tuple(states)
    pos = {s: i for i, s in enumerate(states)}
    absorbing = tuple(absorbing)
    if not absorbing:
        raise NoAbsorbingState("no absorbing state given")
    try:
        abs_idx = [pos[s] for s in absorbing]
    except KeyError as exc:
        raise NoAbsorbingState(f"unknown state {exc.args[0]!r}") from None
    if len(set(abs_idx)) == n:
        raise NoAbsorbingState("every state is absorbing")
    for i in abs_idx:
        P[i, :] = 0.0
        P[i, i] = 1.0
    rest = [i for i in range(n) if i not in set(abs_idx)]
    # backward search from the absorbing states
    reach = set(abs_idx)
    frontier = list(abs_idx)
    while frontier:
        j = frontier.pop()
        for i in np.flatnonzero(P[:, j] > 0):
            if i not in reach:
                reach.add(int(i))
                frontier.append(int(i))
    stuck = [states[i] for i in rest if i not in reach]
    if stuck:
        raise UnreachableAbsorption(f"no absorbing state reachable from {stuck[:5]!r}")
    order = tuple(abs_idx + rest)
    return AbsorbingChain(states, absorbing, order, P[np.ix_(order, order)])


def make_absorbing(net: Network, absorbing: Sequence) -> AbsorbingChain:
    """The walk on ``net`` with the given vertices turned into traps."""
    return absorbing_chain(transition_matrix(net), absorbing, net.vertices)


def fundamental_matrix(ch: AbsorbingChain) -> AbsorbingChainSolution:
    """N = (I - Q)^-1, t = N 1, B = N R."""
    Q = ch.Q
    A = np.eye(Q.shape[0]) - Q
    try:
        N = np.linalg.solve(A, np.eye(Q.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise SingularIminusQ(str(exc)) from None
    if not np.all(np.isfinite(N)) or np.linalg.cond(A) > 1e14:
        raise SingularIminusQ("I - Q is numerically singular")
    return AbsorbingChainSolution(ch, N, N.sum(axis=1), N @ ch.R)


def dirichlet_via_chain(problem: BoundaryProblem) -> HarmonicSolution:
    """Interior values f_D = B f_B."""
    net = problem.net
    ch = make_absorbing(net, problem.boundary)
    sol = fundamental_matrix(ch)
    fB = np.array([problem.values[x] for x in ch.absorbing])
    f = np.empty(net.n)
    f[[net.idx(x) for x in ch.absorbing]] = fB
    f[[net.idx(x) for x in ch.transient]] = sol.B @ fB
    res = check_harmonic(net, f, problem.interior)
    return HarmonicSolution(problem, f, res, "chain")


def power_matrix(P, n: int) -> np.ndarray:
    """P**n by repeated squaring."""
    if n < 0:
        raise ValueError("n must be non-negative")
    P = np.asarray(P, dtype=float)
    result = np.eye(P.shape[0])
    base = P.copy()
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result
