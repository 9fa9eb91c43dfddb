"""Vectorised random-walk simulation on a network.

Walks are simulated in blocks.  Block ``b`` of the walks started at vertex
index ``i`` draws from its own generator seeded by ``(seed, i, b)``, so the
result does not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .network import Network, transition_csr

BLOCK = 1024


def block_rng(seed: int, start: int, block: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, start, block)))


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("WALKOHM_THREADS", "1")))
    except ValueError:
        return 1


class Stepper:
    """Samples one step of the walk for many walkers at once."""

    def __init__(self, net: Network):
        P = transition_csr(net)
        P.sort_indices()
        self.n = net.n
        self.indptr = P.indptr
        self.indices = P.indices
        # row r occupies (r, r+1] of a single increasing array
        cum = np.empty_like(P.data)
        for r in range(self.n):
            lo, hi = P.indptr[r], P.indptr[r + 1]
            row = np.cumsum(P.data[lo:hi])
            row /= row[-1]
            row[-1] = 1.0
            cum[lo:hi] = r + row
        self.cum = cum

    def step(self, pos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        target = pos + rng.random(pos.shape[0])
        k = np.searchsorted(self.cum, target, side="right")
        k = np.minimum(k, self.indptr[pos + 1] - 1)
        return self.indices[k]


@dataclass
class BlockResult:
    final: np.ndarray
    visits: np.ndarray | None
    crossings: np.ndarray | None
    steps: np.ndarray


def _run_block(stepper: Stepper, start: int, count: int, stop: np.ndarray,
               rng: np.random.Generator, leave_first: bool, track_visits: bool,
               track_crossings: bool, max_steps: int) -> BlockResult:
    n = stepper.n
    pos = np.full(count, start, dtype=np.intp)
    steps = np.zeros(count, dtype=np.int64)
    visits = np.zeros(n) if track_visits else None
    cross = np.zeros(n * n) if track_crossings else None
    active = np.arange(count)
    forced = leave_first
    for _ in range(max_steps):
        if not forced:
            active = active[~stop[pos[active]]]
        forced = False
        if active.size == 0:
            break
        cur = pos[active]
        if track_visits:
            visits += np.bincount(cur, minlength=n)
        nxt = stepper.step(cur, rng)
        if track_crossings:
            cross += np.bincount(cur * n + nxt, minlength=n * n)
        pos[active] = nxt
        steps[active] += 1
    else:
        raise RuntimeError(f"walks did not stop within {max_steps} steps")
    return BlockResult(pos, visits, None if cross is None else cross.reshape(n, n), steps)


def simulate(net: Network, start, stop_set, walks: int, seed: int, *,
             leave_first: bool = False, track_visits: bool = False,
             track_crossings: bool = False, stream: int = 0, threads: int | None = None,
             max_steps: int = 10_000_000, stepper: Stepper | None = None) -> BlockResult:
    """Run ``walks`` walks from ``start`` until they sit in ``stop_set``.

    With ``leave_first`` the walker always takes its first step, which is how
    returns to the start are detected.  Visit counts include the time-0 visit.
    """
    stepper = stepper or Stepper(net)
    s = net.idx(start)
    stop = np.zeros(net.n, dtype=bool)
    stop[[net.idx(x) for x in stop_set]] = True
    nblocks = -(-walks // BLOCK)
    sizes = [min(BLOCK, walks - b * BLOCK) for b in range(nblocks)]

    def job(b):
        return _run_block(stepper, s, sizes[b], stop, block_rng(seed, s, b, stream),
                          leave_first, track_visits, track_crossings, max_steps)

    threads = threads or default_threads()
    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(job, range(nblocks)))
    else:
        parts = [job(b) for b in range(nblocks)]
    final = np.concatenate([p.final for p in parts])
    steps = np.concatenate([p.steps for p in parts])
    visits = sum(p.visits for p in parts) if track_visits else None
    cross = sum(p.crossings for p in parts) if track_crossings else None
    return BlockResult(final, visits, cross, steps)


def simulate_escape(net: Network, a, b_set, walks: int, seed: int, **kw) -> float:
    """Fraction of walks from ``a`` reaching ``b_set`` before returning to ``a``."""
    b_idx = {net.idx(x) for x in b_set}
    res = simulate(net, a, set(b_set) | {a}, walks, seed, leave_first=True, **kw)
    return float(np.isin(res.final, list(b_idx)).mean())
