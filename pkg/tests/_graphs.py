"""Random connected networks for property tests."""

import numpy as np

from walkohm import build_network


def random_network(rng: np.random.Generator, n_min: int = 3, n_max: int = 12, extra: float = 0.4):
    """Spanning tree plus random chords, conductances in [0.1, 10)."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.append((u, v, float(rng.uniform(0.1, 10))))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                edges.append((u, v, float(rng.uniform(0.1, 10))))
    return build_network(edges, vertices=range(n))


def rng_for(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=20240, spawn_key=key))
