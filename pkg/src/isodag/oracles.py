"""Brute-force reference implementations for desk-scale validation.

Nothing here is on a production path: the active-set oracle enumerates all
2^m edge subsets, the inf/lex oracles enumerate terminal pairs over full
distance tables, and the Hessian oracle inverts densely. They exist so every
solver can be checked against an independent computation.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .barrier import hessian_blocks
from .dag import _relax, dag_sssp
from .errors import NotAPath, NotPositiveDefinite, TooLarge
from .lipschitz import (
    PartialLabeling,
    TerminalPath,
    _alpha_mul,
    _as_labeling,
    _ratio_vec,
    _strip_tt_edges,
    _walk_parents,
    assign_zero_gradient,
    fix_path,
    grad_plus,
)


@dataclass
class OracleResult:
    optimum: float
    optimizer: np.ndarray
    method: str
    enumerated: int = 0


# ---------------------------------------------------------------------------
# l_p optimum by active-set enumeration
# ---------------------------------------------------------------------------

def _scalar_min_pow(ys, wps, p, lo, hi, tol=1e-12):
    """Ternary search for min_c sum wps |c - ys|^p (strictly convex, p > 1)."""
    def f(c):
        return float(np.sum(wps * np.abs(c - ys) ** p))
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    c = 0.5 * (lo + hi)
    return f(c), c


def _median_interval(ys, ws):
    """Weighted median interval [lo, hi] and the (flat) minimum of sum w|c-y|."""
    order = np.argsort(ys)
    ys = ys[order]
    ws = ws[order]
    total = ws.sum()
    cum = np.cumsum(ws)
    lo = ys[int(np.searchsorted(cum, total / 2.0 - 1e-15))]
    cum_r = np.cumsum(ws[::-1])[::-1]
    hi = ys[len(ys) - 1 - int(np.searchsorted(cum_r[::-1], total / 2.0 - 1e-15))]
    value = float(np.sum(ws * np.abs(lo - ys)))
    return value, min(lo, hi), max(lo, hi)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def active_set_oracle(dag, y, w=None, p=2.0):
    """Exact l_p optimum for m <= 16 by enumerating candidate active sets.

    Each edge subset is contracted; the separable per-group problems are
    solved by ternary search (p > 1) or weighted median intervals (p = 1),
    and candidates that violate a remaining edge are discarded. The true
    optimum's own active set always survives, so the feasible minimum is the
    optimum (to ~1e-9 from the scalar searches).
    """
    m, n = dag.m, dag.n
    if m > 16:
        raise TooLarge(f"active-set oracle needs m <= 16, got {m}")
    y = np.asarray(y, dtype=np.float64)
    w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64)
    wp = w ** p
    edges = list(zip(dag.tails.tolist(), dag.heads.tolist()))

    group_cache = {}

    def solve_group(mask):
        hit = group_cache.get(mask)
        if hit is not None:
            return hit
        ids = [v for v in range(n) if mask >> v & 1]
        ys, wps = y[ids], wp[ids]
        if p == 1.0:
            val, lo, hi = _median_interval(ys, wps)
        else:
            val, c = _scalar_min_pow(ys, wps, p, float(ys.min()), float(ys.max()))
            lo = hi = c
        group_cache[mask] = (val, lo, hi)
        return val, lo, hi

    seen = set()
    best_val, best_x = math.inf, None
    for subset in range(1 << m):
        uf = _UnionFind(n)
        for k in range(m):
            if subset >> k & 1:
                uf.union(*edges[k])
        roots = tuple(uf.find(v) for v in range(n))
        if roots in seen:
            continue
        seen.add(roots)
        masks = {}
        for v, r in enumerate(roots):
            masks[r] = masks.get(r, 0) | (1 << v)
        # contracted graph must stay acyclic; cyclic contractions are covered
        # by the larger subsets that merge the cycle
        gedges = {(roots[a], roots[b]) for a, b in edges if roots[a] != roots[b]}
        order = _toposort_groups(list(masks), gedges)
        if order is None:
            continue
        sol = {}
        feasible = True
        total = 0.0
        if p == 1.0:
            # group values are flat on the median interval: pick the smallest
            # isotonic selection, feasible iff it fits under every interval top
            for r in order:
                val, lo, hi = solve_group(masks[r])
                c = lo
                for (ga, gb) in gedges:
                    if gb == r and sol[ga] > c:
                        c = sol[ga]
                if c > hi + 1e-9:
                    feasible = False
                    break
                sol[r] = c
                total += val
        else:
            # strictly convex groups pin the candidate; no adjusting allowed
            for r in order:
                val, c, _ = solve_group(masks[r])
                sol[r] = c
                total += val
            feasible = all(sol[roots[a]] <= sol[roots[b]] + 1e-9 for a, b in edges)
        if not feasible:
            continue
        if total < best_val:
            best_val = total
            best_x = np.array([sol[roots[v]] for v in range(n)])
    return OracleResult(optimum=best_val, optimizer=best_x,
                        method="active-set", enumerated=1 << m)


def _toposort_groups(nodes, gedges):
    indeg = {u: 0 for u in nodes}
    succ = {u: [] for u in nodes}
    for a, b in gedges:
        indeg[b] += 1
        succ[a].append(b)
    stack = [u for u in nodes if indeg[u] == 0]
    order = []
    while stack:
        u = stack.pop()
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                stack.append(v)
    return order if len(order) == len(nodes) else None


def pava_oracle(y, w=None):
    """Exact l_2 isotonic regression on a linear order (pool adjacent violators).

    Index order is the path order; weights enter as w^2 pool weights.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise NotAPath("pava needs a nonempty 1-d sequence")
    w2 = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64) ** 2
    # blocks of (weight sum, weighted mean, count)
    blocks = []
    for yi, wi in zip(y, w2):
        blocks.append([wi, yi, 1])
        while len(blocks) > 1 and blocks[-2][1] > blocks[-1][1]:
            wb, mb, cb = blocks.pop()
            wa, ma, ca = blocks.pop()
            wt = wa + wb
            blocks.append([wt, (wa * ma + wb * mb) / wt, ca + cb])
    x = np.concatenate([np.full(c, mval) for _, mval, c in blocks])
    value = float(np.sum(w2 * (x - y) ** 2))
    return OracleResult(optimum=value, optimizer=x, method="pava")


# ---------------------------------------------------------------------------
# inf / lex references
# ---------------------------------------------------------------------------

def _terminal_distance_rows(dag, terminals):
    """dist(t, x) and dist(x, t) rows for every terminal t."""
    into = {}
    outof = {}
    for t in terminals:
        into[t] = dag_sssp(dag, [(t, 0.0)], "forward")
        outof[t] = dag_sssp(dag, [(t, 0.0)], "backward")
    return into, outof


def allpairs_inf_oracle(dag, v0):
    """alpha* and the closed-form Avg labeling from full distance tables."""
    if dag.n > 300:
        raise TooLarge("all-pairs oracle needs n <= 300")
    vals = _as_labeling(v0, dag.n)
    terminals = [int(v) for v in np.nonzero(~np.isnan(vals))[0]]
    into, outof = _terminal_distance_rows(dag, terminals)
    alpha = 0.0
    for s in terminals:
        drow = into[s]
        for t in terminals:
            if t == s:
                continue
            alpha = max(alpha, grad_plus(float(drow[t]), vals[s], vals[t]))
    vlow = np.full(dag.n, np.inf)
    vhigh = np.full(dag.n, -np.inf)
    for t in terminals:
        vlow = np.minimum(vlow, vals[t] + _alpha_mul(alpha, outof[t]))
        vhigh = np.maximum(vhigh, vals[t] - _alpha_mul(alpha, into[t]))
    out = np.where(np.isfinite(vlow) & np.isfinite(vhigh), 0.5 * (vlow + vhigh), np.nan)
    out[~np.isnan(vals)] = vals[~np.isnan(vals)]
    return OracleResult(optimum=alpha, optimizer=out, method="allpairs-inf",
                        enumerated=len(terminals) ** 2)


def pressure_oracle(dag, v0):
    """pressure(x): steepest terminal-path gradient through each vertex."""
    if dag.n > 300:
        raise TooLarge("pressure oracle needs n <= 300")
    vals = _as_labeling(v0, dag.n)
    terminals = [int(v) for v in np.nonzero(~np.isnan(vals))[0]]
    into, outof = _terminal_distance_rows(dag, terminals)
    press = np.zeros(dag.n)
    for s in terminals:
        d_in = into[s]          # dist(s, x)
        for t in terminals:
            d_out = outof[t]    # dist(x, t)
            press = np.maximum(press, _ratio_vec(vals[s] - vals[t], d_in + d_out))
    return press


def lex_reference(dag, v0):
    """comp_lex_min with the steepest path found by exhaustive enumeration.

    Deterministic (smallest (s, t) pair wins ties); sized for reduced
    instances of original n <= 15, i.e. at most ~64 vertices.
    """
    if dag.n > 64:
        raise TooLarge("lex reference needs n <= 64")
    lab = PartialLabeling(_as_labeling(v0, dag.n).copy())
    work = dag
    while not lab.is_complete:
        work = _strip_tt_edges(work, lab.terminal_mask)
        vals = lab.values
        terminals = [int(v) for v in np.nonzero(lab.terminal_mask)[0]]
        best = (0.0, None, None, None)
        for s in terminals:
            dist = np.full(work.n, np.inf)
            dist[s] = 0.0
            dist, parent = _relax(work, dist, "forward")
            for t in terminals:
                if t == s or not np.isfinite(dist[t]):
                    continue
                g = grad_plus(float(dist[t]), vals[s], vals[t])
                if g > best[0]:
                    best = (g, s, t, parent.copy())
        grad, s, t, parent = best
        if grad == 0.0:
            return assign_zero_gradient(work, lab)
        path = _walk_parents(parent, t, s)[::-1]
        lab = fix_path(work, lab, TerminalPath(tuple(path), math.nan, grad))
    return lab.values.copy()


# ---------------------------------------------------------------------------
# dense Hessian ground truth
# ---------------------------------------------------------------------------

def dense_hessian(inst, K, point):
    """Assemble the full 2n x 2n barrier Hessian, (x-block, t-block) order."""
    n = inst.n
    blocks = hessian_blocks(inst, K, point)
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n][np.diag_indices(n)] += blocks.R_hat
    for k in range(inst.dag.m):
        a, b = int(inst.dag.tails[k]), int(inst.dag.heads[k])
        wgt = blocks.R_edge[k]
        H[a, a] += wgt
        H[b, b] += wgt
        H[a, b] -= wgt
        H[b, a] -= wgt
    H[:n, n:][np.diag_indices(n)] = blocks.C
    H[n:, :n][np.diag_indices(n)] = blocks.C
    H[n:, n:][np.diag_indices(n)] = blocks.T
    slack = K - float(inst.wp @ point.t)
    H[n:, n:] += np.outer(inst.wp, inst.wp) / slack ** 2
    return H


def dense_hessian_inverse(inst, K, point):
    """Dense factorization inverse of the barrier Hessian (n <= 40)."""
    if inst.n > 40:
        raise TooLarge("dense Hessian oracle needs n <= 40")
    H = dense_hessian(inst, K, point)
    try:
        factor = scipy.linalg.cho_factor(H)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, np.eye(2 * inst.n))
