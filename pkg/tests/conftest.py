"""Shared random-instance generators for the test suite."""

import numpy as np
import pytest

from isodag import validate_dag
from isodag.barrier import FeasiblePoint, IsoInstance, is_feasible
from isodag.ipm import good_start
from isodag.lipschitz import PartialLabeling


def random_dag(rng, n, m_target, length_pool=None):
    """Random DAG: orient uniformly sampled pairs along a hidden permutation.

    Parallel edges are possible; m can fall short of m_target on tiny n.
    """
    perm = rng.permutation(n)
    edges = []
    for _ in range(4 * m_target):
        if len(edges) == m_target:
            break
        a, b = int(rng.integers(n)), int(rng.integers(n))
        if perm[a] == perm[b]:
            continue
        if perm[a] > perm[b]:
            a, b = b, a
        length = 1.0 if length_pool is None else float(rng.choice(length_pool))
        edges.append((a, b, length))
    if not edges:
        edges = [(0, 1, 1.0 if length_pool is None else float(rng.choice(length_pool)))]
        n = max(n, 2)
    return validate_dag(edges, n)


def random_path(rng, n):
    return validate_dag([(i, i + 1) for i in range(n - 1)], n)


def random_labeling(rng, dag, frac=0.4, lo=0.0, hi=4.0):
    """Well-posed labeling: random terminals, repaired if a vertex is stranded."""
    from isodag.dag import dag_sssp
    vals = np.full(dag.n, np.nan)
    k = max(1, int(round(frac * dag.n)))
    chosen = rng.choice(dag.n, size=k, replace=False)
    vals[chosen] = lo + (hi - lo) * rng.random(k)
    for _ in range(dag.n):
        seeds = [(int(v), 0.0) for v in np.nonzero(~np.isnan(vals))[0]]
        fwd = dag_sssp(dag, seeds, "forward")
        bwd = dag_sssp(dag, seeds, "backward")
        lost = np.isinf(fwd) & np.isinf(bwd)
        if not lost.any():
            break
        v = int(np.nonzero(lost)[0][0])
        vals[v] = lo + (hi - lo) * rng.random()
    return PartialLabeling(vals)


def random_instance(rng, n_max=10, m_max=16, p=2.0, weighted=False):
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, min(m_max, 2 * n) + 1))
    dag = random_dag(rng, n, m)
    y = rng.random(dag.n)
    w = 1.0 + rng.random(dag.n) if weighted else None
    return IsoInstance(dag, y, w=w, p=p), y, w


def random_feasible_point(rng, inst, K):
    """Strictly feasible point: jitter good_start without crossing a wall."""
    base = good_start(inst, K)
    x = base.x + 0.25 / inst.n * (rng.random(inst.n) - 0.5)
    t = np.abs(x - inst.y) ** inst.p + 0.5 + rng.random(inst.n)
    pt = FeasiblePoint(x, t)
    ok, bad = is_feasible(inst, K, pt)
    assert ok, bad
    return pt


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
