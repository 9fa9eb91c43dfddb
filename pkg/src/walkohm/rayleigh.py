"""Shorting, cutting and bridging edits, monotonicity checks, and the exact bridge update."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chains import fundamental_matrix, make_absorbing
from .electric import effective_resistance, escape_probability
from .errors import BridgeTouchesTerminal, NoInverse, UnknownEdge
from .network import Network, _check_conductance, merge_vertices


@dataclass(frozen=True)
class Short:
    vertices: frozenset
    label: object = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        if not self.vertices:
            raise ValueError("Short needs at least one vertex")


@dataclass(frozen=True)
class Cut:
    u: object
    v: object
    which: int = 0  # index among the parallel u-v edges


@dataclass(frozen=True)
class Bridge:
    r: object
    s: object
    eps: float

    def __post_init__(self):
        _check_conductance(self.eps, self.r, self.s)


@dataclass(frozen=True)
class ScaleEdge:
    u: object
    v: object
    factor: float  # multiplies the conductance
    which: int = 0

    def __post_init__(self):
        _check_conductance(self.factor, self.u, self.v)


NetworkEdit = Short | Cut | Bridge | ScaleEdge


def _pick_edge(net: Network, u, v, which: int) -> int:
    net.idx(u)
    net.idx(v)
    ids = net.edge_ids(u, v)
    if which >= len(ids):
        raise UnknownEdge(f"no edge #{which} between {u!r} and {v!r}")
    return ids[which]


def apply_edit(net: Network, e) -> Network:
    if isinstance(e, Short):
        return merge_vertices(net, e.vertices, e.label)[0]
    if isinstance(e, Cut):
        k = _pick_edge(net, e.u, e.v, e.which)
        return net.with_edges(net.edges[:k] + net.edges[k + 1:])
    if isinstance(e, Bridge):
        net.idx(e.r)
        net.idx(e.s)
        return net.with_edges(net.edges + ((e.r, e.s, e.eps),))
    if isinstance(e, ScaleEdge):
        k = _pick_edge(net, e.u, e.v, e.which)
        u, v, c = net.edges[k]
        return net.with_edges(net.edges[:k] + ((u, v, c * e.factor),) + net.edges[k + 1:])
    raise TypeError(f"not a network edit: {e!r}")


@dataclass
class MonotonicityResult:
    r_before: float
    r_after: float
    expected: str  # "increase" or "decrease"
    holds: bool

    def __bool__(self) -> bool:
        return self.holds


def _direction(e) -> str:
    if isinstance(e, Cut):
        return "increase"
    if isinstance(e, ScaleEdge):
        return "increase" if e.factor < 1 else "decrease"
    return "decrease"


def monotonicity_check(net: Network, a, b, e, slack: float = 1e-12) -> MonotonicityResult:
    """Effective resistance before and after ``e`` against the direction Rayleigh predicts.

    A cut that separates a from b gives ``r_after = inf``.  Shorting a and b
    together gives 0.
    """
    before = effective_resistance(net, a, b)
    after_net = apply_edit(net, e)
    a2, b2 = a, b
    if isinstance(e, Short):
        merged = e.label if e.label is not None else min(e.vertices, key=net.idx)
        a2 = merged if a in e.vertices else a
        b2 = merged if b in e.vertices else b
    after = 0.0 if a2 == b2 else effective_resistance(after_net, a2, b2)
    tol = slack * max(1.0, before if math.isfinite(before) else 1.0)
    direction = _direction(e)
    if direction == "increase":
        holds = after >= before - tol
    else:
        holds = after <= before + tol
    return MonotonicityResult(before, after, direction, bool(holds))


# -- exact updates ----------------------------------------------------------

def rank_one_inverse_update(N, h, k, tol: float = 1e-14) -> np.ndarray:
    """Inverse of A - h k given N = A^-1 (h a column, k a row)."""
    N = np.asarray(N, dtype=float)
    h = np.asarray(h, dtype=float).reshape(-1, 1)
    k = np.asarray(k, dtype=float).reshape(1, -1)
    denom = 1.0 - (k @ N @ h).item()
    if abs(denom) <= tol:
        raise NoInverse("k N h = 1, so A - h k is singular")
    return N + (N @ h) @ (k @ N) / denom


@dataclass
class BridgeUpdate:
    p_esc: float      # before the bridge
    p_esc_new: float  # after, from the update formula
    c: float
    delta: float


def bridge_update_exact(net: Network, a, b, r, s, eps: float) -> BridgeUpdate:
    """Escape probability after adding an r-s edge of conductance ``eps``.

    Uses only the fundamental matrix and absorption probabilities of the
    original walk with a and b absorbing.
    """
    if r in (a, b) or s in (a, b):
        raise BridgeTouchesTerminal("bridge endpoints must avoid a and b")
    if r == s:
        raise ValueError("bridge endpoints must differ")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    ch = make_absorbing(net, [a, b])
    sol = fundamental_matrix(ch)
    pos = {x: i for i, x in enumerate(ch.transient)}
    ir, is_ = pos[r], pos[s]
    N = sol.N
    Cr, Cs, Ca = net.C(r), net.C(s), net.C(a)
    c = 1.0 / float(1.0 + N[ir, ir] * eps / Cr - N[is_, ir] * eps / Cr
               + N[is_, is_] * eps / Cs - N[ir, is_] * eps / Cs)
    jb = ch.absorbing.index(b)
    Bsb, Brb = sol.B[is_, jb], sol.B[ir, jb]
    p = escape_probability(net, a, b)
    delta = float(eps * c / Ca * (Bsb - Brb) ** 2)
    return BridgeUpdate(p, p + delta, c, delta)


def bridged_fundamental_matrix(net: Network, a, b, r, s, eps: float) -> np.ndarray:
    """N for the bridged walk via a rank-one update of the lazy chain.

    The lazy chain puts the bridge weight ``eps`` on self-loops at r and s,
    so adding the bridge only moves mass within rows r and s: Q_eps equals
    Q_hat + h k with h = e_r eps/(C_r+eps) - e_s eps/(C_s+eps) and k = e_s - e_r.
    """
    lazy = net.with_edges(net.edges + ((r, r, eps), (s, s, eps)))
    ch = make_absorbing(lazy, [a, b])
    N_hat = fundamental_matrix(ch).N
    pos = {x: i for i, x in enumerate(ch.transient)}
    m = N_hat.shape[0]
    h = np.zeros(m)
    h[pos[r]] = eps / (net.C(r) + eps)
    h[pos[s]] = -eps / (net.C(s) + eps)
    k = np.zeros(m)
    k[pos[s]] = 1.0
    k[pos[r]] = -1.0
    # I - Q_eps = (I - Q_hat) - h k
    return rank_one_inverse_update(N_hat, h, k)


# -- edit scripts -------------------------------------------------------------

def parse_edit_script(text: str) -> list:
    """Lines ``short v1 v2 ...``, ``cut u v``, ``bridge r s eps``, ``scale u v factor``."""
    edits = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        try:
            if op == "short" and args:
                edits.append(Short(frozenset(args)))
            elif op == "cut" and len(args) == 2:
                edits.append(Cut(*args))
            elif op == "bridge" and len(args) == 3:
                edits.append(Bridge(args[0], args[1], float(args[2])))
            elif op == "scale" and len(args) == 3:
                edits.append(ScaleEdge(args[0], args[1], float(args[2])))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse edit {raw.strip()!r}") from None
    return edits


def read_edit_script(path) -> list:
    return parse_edit_script(Path(path).read_text(encoding="utf-8"))
