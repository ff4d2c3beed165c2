"""Instance generators for the experiment families.

Both generators are deterministic under their seed.
"""

import numpy as np

from .dag import Dag


def gen_grid2d(k, sigma=1.0, seed=0):
    """k x k grid oriented toward one corner, with noisy rank observations.

    Vertex (i, j) has id i*k + j; edges go right and down. y is a uniformly
    sampled linear extension of the partial order (randomized Kahn's
    algorithm), i.e. a random order-respecting permutation of 1..n, plus
    N(0, sigma^2) noise per coordinate.
    """
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(k):
        for j in range(k):
            if i + 1 < k:
                edges.append((i * k + j, (i + 1) * k + j))
            if j + 1 < k:
                edges.append((i * k + j, i * k + j + 1))
    dag = Dag(k * k, edges)
    y = _random_linear_extension(dag, rng) + rng.normal(0.0, sigma, k * k)
    return dag, y


def _random_linear_extension(dag, rng):
    """Positions 1..n from Kahn's algorithm with uniform tie-breaking."""
    n = dag.n
    indeg = np.zeros(n, dtype=np.int64)
    np.add.at(indeg, dag.heads, 1)
    ready = list(np.nonzero(indeg == 0)[0])
    pos = np.empty(n)
    for step in range(n):
        pick = int(rng.integers(len(ready)))
        v = ready.pop(pick)
        pos[v] = step + 1.0
        lo, hi = dag.out_indptr[v], dag.out_indptr[v + 1]
        for w in dag.out_targets[lo:hi]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
    return pos


def gen_random_regular(n, degree=4, seed=0, max_tries=10000):
    """Random d-regular DAG: configuration model resampled until simple,
    then oriented by a uniform random vertex permutation (low to high)."""
    if (n * degree) % 2 != 0:
        raise ValueError("n * degree must be even")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        stubs = np.repeat(np.arange(n), degree)
        rng.shuffle(stubs)
        a, b = stubs[0::2], stubs[1::2]
        if np.any(a == b):
            continue
        canon = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
        if np.unique(canon, axis=0).shape[0] != canon.shape[0]:
            continue
        perm = rng.permutation(n)
        tails = np.where(perm[a] < perm[b], a, b)
        heads = np.where(perm[a] < perm[b], b, a)
        return Dag(n, (tails, heads))
    raise RuntimeError("could not sample a simple regular graph")
