"""Numba kernels for the hot loops.

Everything here works on flat int64/float64 arrays so the jitted code stays
allocation-light. Wrappers in the public modules own validation and error
types; kernels communicate failure through integer status codes:

    0  ok
    1  infeasible point (a barrier slack is <= 0)
    2  Schur/T positivity lost (should be unreachable at feasible points)
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_NOT_PD = 2
STATUS_OVERFLOW = 3


# ---------------------------------------------------------------------------
# graph kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def dfs_topo_order(n, indptr, targets):
    """Reverse-postorder DFS over a CSR adjacency with ascending targets.

    Roots and children are explored in descending vertex id, which makes the
    reverse postorder break ties by ascending id. Returns (order, ok, u, v)
    where ok=False means a back edge u->v was found (a cycle exists).
    """
    color = np.zeros(n, dtype=np.int8)  # 0 white, 1 gray, 2 black
    # next child position to inspect; we walk each CSR slice back-to-front
    ptr = np.empty(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    post = np.empty(n, dtype=np.int64)
    npost = 0
    for root in range(n - 1, -1, -1):
        if color[root] != 0:
            continue
        top = 0
        stack[top] = root
        color[root] = 1
        ptr[root] = indptr[root + 1]
        while top >= 0:
            v = stack[top]
            if ptr[v] > indptr[v]:
                ptr[v] -= 1
                w = targets[ptr[v]]
                if color[w] == 0:
                    color[w] = 1
                    ptr[w] = indptr[w + 1]
                    top += 1
                    stack[top] = w
                elif color[w] == 1:
                    return post, False, v, w
            else:
                color[v] = 2
                post[npost] = v
                npost += 1
                top -= 1
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        order[i] = post[n - 1 - i]
    return order, True, -1, -1


@njit(cache=True)
def relax_pass(order, indptr, targets, eids, lengths, dist, parent):
    """One topological relaxation sweep: dist[j] = min(dist[j], dist[i]+len).

    Mutates dist/parent in place. Run on the out-CSR with a topological order
    for source-to-all distances, or on the in-CSR with the reversed order for
    all-to-target distances on the original graph.
    """
    for idx in range(order.shape[0]):
        i = order[idx]
        di = dist[i]
        if di == np.inf:
            continue
        for k in range(indptr[i], indptr[i + 1]):
            j = targets[k]
            nd = di + lengths[eids[k]]
            if nd < dist[j]:
                dist[j] = nd
                parent[j] = i


@njit(cache=True)
def zero_grad_sweep(order, indptr, targets, values, labeled, protect, take_max):
    """One propagation sweep of the zero-gradient completion.

    For each vertex i in `order` with labeled[i], pushes its value across the
    CSR edges (i -> j) onto unprotected j, keeping the max (forward stage) or
    the min (backward stage) of the incoming candidates.
    """
    for idx in range(order.shape[0]):
        i = order[idx]
        if not labeled[i]:
            continue
        vi = values[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = targets[k]
            if protect[j]:
                continue
            if not labeled[j]:
                values[j] = vi
                labeled[j] = True
            elif take_max and values[j] < vi:
                values[j] = vi
            elif (not take_max) and values[j] > vi:
                values[j] = vi


# ---------------------------------------------------------------------------
# barrier kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def barrier_value(x, t, y, wp, q, K, tails, heads):
    n = x.shape[0]
    val = 0.0
    slack_k = K
    for v in range(n):
        slack_k -= wp[v] * t[v]
    if slack_k <= 0.0:
        return STATUS_INFEASIBLE, 0.0
    for v in range(n):
        if t[v] <= 0.0:
            return STATUS_INFEASIBLE, 0.0
        e = x[v] - y[v]
        s = np.exp(q * np.log(t[v])) - e * e
        if s <= 0.0:
            return STATUS_INFEASIBLE, 0.0
        val += -np.log(s) - 2.0 * np.log(t[v])
    for k in range(tails.shape[0]):
        d = x[heads[k]] - x[tails[k]]
        if d <= 0.0:
            return STATUS_INFEASIBLE, 0.0
        val += -np.log(d)
    val += -np.log(slack_k)
    return STATUS_OK, val


@njit(cache=True)
def min_slack(x, t, y, wp, q, K, tails, heads):
    """Smallest slack among all barrier constraints (<= 0 means infeasible)."""
    n = x.shape[0]
    out = K
    for v in range(n):
        out -= wp[v] * t[v]
    for v in range(n):
        if t[v] < out:
            out = t[v]
        if t[v] > 0.0:
            e = x[v] - y[v]
            s = np.exp(q * np.log(t[v])) - e * e
            if s < out:
                out = s
    for k in range(tails.shape[0]):
        d = x[heads[k]] - x[tails[k]]
        if d < out:
            out = d
    return out


@njit(cache=True)
def barrier_grad(x, t, y, wp, q, K, tails, heads, gx, gt):
    n = x.shape[0]
    slack_k = K
    for v in range(n):
        slack_k -= wp[v] * t[v]
    if slack_k <= 0.0:
        return STATUS_INFEASIBLE
    for v in range(n):
        if t[v] <= 0.0:
            return STATUS_INFEASIBLE
        e = x[v] - y[v]
        tq = np.exp(q * np.log(t[v]))
        s = tq - e * e
        if s <= 0.0:
            return STATUS_INFEASIBLE
        gx[v] = 2.0 * e / s
        gt[v] = -q * tq / (t[v] * s) - 2.0 / t[v] + wp[v] / slack_k
    for k in range(tails.shape[0]):
        d = x[heads[k]] - x[tails[k]]
        if d <= 0.0:
            return STATUS_INFEASIBLE
        gx[tails[k]] += 1.0 / d
        gx[heads[k]] -= 1.0 / d
    return STATUS_OK


@njit(cache=True)
def _vertex_hessian(t, e, q):
    """T, Rh, C, W = Rh - C^2/T of one epigraph cell, cancellation-free.

    The textbook formulas for T and the Schur weight W subtract nearly equal
    O(1/s^2) quantities near the boundary; these are the algebraically equal
    positive-term rearrangements (substitute r^2 = t^q - s and expand).
    """
    lt = np.log(t)
    tq1 = np.exp((q - 1.0) * lt)
    s = t * tq1 - e * e
    if s <= 0.0:
        return -1.0, 0.0, 0.0, 0.0
    e2 = e * e
    ts2 = (t * s) * (t * s)
    # points this deep in a corner of the domain are representable but their
    # curvature is not; report overflow instead of dividing by a denormal 0
    if ts2 == 0.0 or s * s == 0.0 or (t * t) * s == 0.0:
        return np.inf, 0.0, 0.0, 0.0
    T = (q * q * e2 * e2 + q * (q + 1.0) * s * e2 + (q + 2.0) * s * s) / ts2
    C = -2.0 * q * tq1 * e / (s * s)
    det = (2.0 * q * (2.0 - q) * (tq1 / s) ** 2 / s
           + 2.0 * (q * q - q + 2.0) / (t * t * s)
           + (2.0 * q * q - 2.0 * q + 8.0) * e2 / ts2)
    W = det / T
    if not (np.isfinite(T) and np.isfinite(W) and np.isfinite(C)):
        return np.inf, 0.0, 0.0, 0.0
    return s, T, C, W


@njit(cache=True)
def hessian_diag_blocks(x, t, y, wp, q, K, tails, heads, T, C, Rh, Re, r_edge, W):
    """Fill the diagonal Hessian data of the unbounded barrier.

    T, C, Rh, W are per-vertex (hat-edge) arrays, W being the Schur weight
    Rh - C^2/T; Re and r_edge are per original edge (the 1/r^2 weights and
    the slacks r = x(head) - x(tail)).
    """
    n = x.shape[0]
    for v in range(n):
        if t[v] <= 0.0:
            return STATUS_INFEASIBLE
        e = x[v] - y[v]
        s, Tv, Cv, Wv = _vertex_hessian(t[v], e, q)
        if s <= 0.0:
            return STATUS_INFEASIBLE
        if s == np.inf:
            return STATUS_OVERFLOW
        T[v] = Tv
        C[v] = Cv
        W[v] = Wv
        Rh[v] = (2.0 * e / s) ** 2 + 2.0 / s
        if Tv <= 0.0 or Wv <= 0.0:
            return STATUS_NOT_PD
    for k in range(tails.shape[0]):
        d = x[heads[k]] - x[tails[k]]
        if d <= 0.0:
            return STATUS_INFEASIBLE
        r_edge[k] = d
        Re[k] = 1.0 / (d * d)
    return STATUS_OK


@njit(cache=True)
def _chol_solve(L, b):
    """Solve (L L^T) x = b for lower-triangular L, in place of nothing."""
    n = L.shape[0]
    ytmp = np.empty(n)
    for i in range(n):
        s = b[i]
        for j in range(i):
            s -= L[i, j] * ytmp[j]
        ytmp[i] = s / L[i, i]
    out = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = ytmp[i]
        for j in range(i + 1, n):
            s -= L[j, i] * out[j]
        out[i] = s / L[i, i]
    return out


@njit(cache=True)
def hess_apply_dense(x, t, y, wp, q, K, tails, heads, ax, at, bx, bt):
    """Apply the approximate inverse of the full barrier Hessian to (ax, at).

    Dense-Schur path: eliminates the t block against its diagonal, factors the
    n x n Schur complement by Cholesky, then applies the Sherman-Morrison
    correction for the rank-one value-constraint term. Exact up to roundoff.
    """
    n = x.shape[0]
    m = tails.shape[0]
    slack_k = K
    for v in range(n):
        slack_k -= wp[v] * t[v]
    if slack_k <= 0.0:
        return STATUS_INFEASIBLE
    T = np.empty(n)
    C = np.empty(n)
    Wh = np.empty(n)
    for v in range(n):
        if t[v] <= 0.0:
            return STATUS_INFEASIBLE
        e = x[v] - y[v]
        s, Tv, Cv, Wv = _vertex_hessian(t[v], e, q)
        if s <= 0.0:
            return STATUS_INFEASIBLE
        if s == np.inf:
            return STATUS_OVERFLOW
        T[v] = Tv
        C[v] = Cv
        Wh[v] = Wv
        if Tv <= 0.0 or Wv <= 0.0:
            return STATUS_NOT_PD
    S = np.zeros((n, n))
    for k in range(m):
        d = x[heads[k]] - x[tails[k]]
        if d <= 0.0:
            return STATUS_INFEASIBLE
        w = 1.0 / (d * d)
        a = tails[k]
        b = heads[k]
        S[a, a] += w
        S[b, b] += w
        S[a, b] -= w
        S[b, a] -= w
    for v in range(n):
        S[v, v] += Wh[v]
    L = np.linalg.cholesky(S)

    # M_odm a: eliminate t, solve the Schur system, back-substitute
    h = np.empty(n)
    for v in range(n):
        h[v] = ax[v] - (C[v] / T[v]) * at[v]
    zx = _chol_solve(L, h)
    zt = np.empty(n)
    for v in range(n):
        zt[v] = (at[v] - C[v] * zx[v]) / T[v]

    # M_odm u for the Sherman-Morrison correction; u = (0, wp / slack_k)
    ut = np.empty(n)
    for v in range(n):
        ut[v] = wp[v] / slack_k
        h[v] = -(C[v] / T[v]) * ut[v]
    wx = _chol_solve(L, h)
    wt = np.empty(n)
    for v in range(n):
        wt[v] = (ut[v] - C[v] * wx[v]) / T[v]

    num = 0.0
    den = 1.0
    for v in range(n):
        num += wx[v] * ax[v] + wt[v] * at[v]
        den += ut[v] * wt[v]
    coef = num / den
    for v in range(n):
        bx[v] = zx[v] - coef * wx[v]
        bt[v] = zt[v] - coef * wt[v]
    return STATUS_OK
