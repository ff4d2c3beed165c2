"""DAG representation, validation, topological order, and shortest paths.

Vertices are 0..n-1. Parallel edges are allowed, self-loops are not. All
heavy passes run over CSR adjacency arrays via the numba kernels.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CycleError, NegativeLengthError, SelfLoopError


@dataclass(frozen=True)
class TopoOrder:
    order: np.ndarray  # order[k] = vertex in position k
    rank: np.ndarray   # rank[v] = position of v; rank[tail] < rank[head] on every edge


def _coerce_edges(edges):
    """Edge input as (tails, heads[, lengths]) arrays or an iterable of tuples."""
    if isinstance(edges, tuple) and len(edges) in (2, 3) and \
            all(isinstance(a, np.ndarray) for a in edges):
        tails = np.ascontiguousarray(edges[0], dtype=np.int64)
        heads = np.ascontiguousarray(edges[1], dtype=np.int64)
        lengths = (np.ascontiguousarray(edges[2], dtype=np.float64)
                   if len(edges) == 3 else np.ones(tails.shape[0]))
        return tails, heads, lengths
    edges = list(edges)
    m = len(edges)
    tails = np.empty(m, dtype=np.int64)
    heads = np.empty(m, dtype=np.int64)
    lengths = np.ones(m, dtype=np.float64)
    for k, e in enumerate(edges):
        if len(e) == 2:
            tails[k], heads[k] = e
        else:
            tails[k], heads[k], lengths[k] = e
    return tails, heads, lengths


def _build_csr(n, keys, values, eids):
    sort = np.lexsort((values, keys))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, keys + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, values[sort].astype(np.int64), eids[sort]


class Dag:
    """Immutable directed acyclic graph with nonnegative edge lengths.

    Cycles, self-loops, and negative/non-finite lengths are rejected at
    construction, so every live Dag is valid.
    """

    def __init__(self, n, edges):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        tails, heads, lengths = _coerce_edges(edges)
        m = tails.shape[0]
        if m:
            if tails.min() < 0 or heads.min() < 0 or tails.max() >= n or heads.max() >= n:
                raise ValueError("edge endpoint out of range")
            loops = np.nonzero(tails == heads)[0]
            if loops.size:
                raise SelfLoopError(f"self-loop at vertex {tails[loops[0]]}")
            bad = ~(np.isfinite(lengths) & (lengths >= 0.0))
            if bad.any():
                k = int(np.nonzero(bad)[0][0])
                raise NegativeLengthError(
                    f"edge {k} has invalid length {lengths[k]}"
                )
        self.n = n
        self.tails = tails
        self.heads = heads
        self.lengths = lengths
        eids = np.arange(m, dtype=np.int64)
        self.out_indptr, self.out_targets, self.out_eids = _build_csr(n, tails, heads, eids)
        self.in_indptr, self.in_sources, self.in_eids = _build_csr(n, heads, tails, eids)
        order, ok, u, v = _kernels.dfs_topo_order(n, self.out_indptr, self.out_targets)
        if not ok:
            raise CycleError(self._cycle_witness(int(v), int(u)))
        self._topo = TopoOrder(order=order, rank=np.argsort(order).astype(np.int64))

    @property
    def m(self):
        return self.tails.shape[0]

    def edge_list(self):
        return [
            (int(self.tails[k]), int(self.heads[k]), float(self.lengths[k]))
            for k in range(self.m)
        ]

    def out_edges(self, v):
        lo, hi = self.out_indptr[v], self.out_indptr[v + 1]
        return self.out_targets[lo:hi], self.out_eids[lo:hi]

    def _cycle_witness(self, start, end):
        # Path start -> ... -> end by DFS, closed by the back edge (end, start).
        parent = {start: None}
        stack = [start]
        while stack:
            u = stack.pop()
            if u == end:
                break
            lo, hi = self.out_indptr[u], self.out_indptr[u + 1]
            for w in self.out_targets[lo:hi]:
                w = int(w)
                if w not in parent:
                    parent[w] = u
                    stack.append(w)
        path = [end]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()  # start ... end
        witness = [(path[i], path[i + 1]) for i in range(len(path) - 1)]
        witness.append((end, start))
        return witness


def validate_dag(raw_edges, n):
    """Construct a Dag, raising CycleError/SelfLoopError/NegativeLengthError."""
    return Dag(n, raw_edges)


def topological_sort(dag):
    """Deterministic topological order (DFS, ties by ascending vertex id)."""
    return dag._topo


def reverse(dag):
    """The same graph with every edge flipped; lengths and edge order kept."""
    return Dag(dag.n, (dag.heads, dag.tails, dag.lengths))


def _relax(dag, init, direction, lengths=None):
    """Shared relaxation: returns (dist, parent) after one topological sweep."""
    dist = init
    parent = np.full(dag.n, -1, dtype=np.int64)
    lens = dag.lengths if lengths is None else lengths
    topo = dag._topo.order
    if direction == "forward":
        _kernels.relax_pass(topo, dag.out_indptr, dag.out_targets, dag.out_eids,
                            lens, dist, parent)
    elif direction == "backward":
        _kernels.relax_pass(topo[::-1].copy(), dag.in_indptr, dag.in_sources,
                            dag.in_eids, lens, dist, parent)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return dist, parent


def dag_sssp(dag, sources, direction="forward"):
    """Single-sweep shortest paths on the DAG.

    forward:  d(v) = min over sources (s, val) of val + dist(s -> v)
    backward: d(v) = min over sources (s, val) of val + dist(v -> s)
    Unreachable vertices get +inf.
    """
    dist = np.full(dag.n, np.inf)
    items = sources.items() if isinstance(sources, dict) else sources
    for s, val in items:
        if val < dist[s]:
            dist[s] = val
    dist, _ = _relax(dag, dist, direction)
    return dist
