"""Inf- and lex-minimization on partially-labeled DAGs.

A partial labeling marks terminals with real values and everything else with
NaN. The algorithms find complete extensions minimizing the one-sided edge
gradient grad+ = max{(x(u)-x(v))/len, 0}: the inf-minimizer minimizes its
max, the lex-minimizer minimizes the sorted gradient vector lexicographically
(repeatedly fixing steepest terminal paths).

Ratio conventions are owned by grad_plus and friends: 0/0 = 0, x/inf = 0, and
positive/0 = +inf (a violated zero-length edge).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dag import Dag, _relax, topological_sort
from .errors import ContractViolation, LengthMismatch


@dataclass
class PartialLabeling:
    """Vertex values with NaN marking the unlabeled (non-terminal) vertices."""

    values: np.ndarray

    @classmethod
    def from_dict(cls, n, assignments):
        vals = np.full(n, np.nan)
        for v, val in assignments.items():
            vals[v] = val
        return cls(vals)

    @property
    def terminal_mask(self):
        return ~np.isnan(self.values)

    @property
    def is_complete(self):
        return bool(self.terminal_mask.all())

    def copy(self):
        return PartialLabeling(self.values.copy())


@dataclass
class TerminalPath:
    vertices: tuple     # consecutive pairs are edges; (x, x) means degenerate
    length: float
    gradient: float

    @property
    def is_degenerate(self):
        return len(self.vertices) == 2 and self.vertices[0] == self.vertices[1]


def _as_labeling(v0, n):
    if isinstance(v0, PartialLabeling):
        vals = v0.values
    else:
        vals = np.asarray(v0, dtype=np.float64)
    if vals.shape != (n,):
        raise ValueError("labeling has wrong length")
    return vals


def grad_plus(length, xu, xv):
    """One-sided gradient of the drop xu - xv over a length >= 0."""
    num = xu - xv
    if num <= 0.0:
        return 0.0
    if length == 0.0:
        return math.inf
    if math.isinf(length):
        return 0.0
    return num / length


def _ratio_vec(num, den):
    """Vectorized grad_plus over nonnegative denominators."""
    num = np.maximum(np.asarray(num, dtype=np.float64), 0.0)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    pos = num > 0
    ok = pos & (den > 0) & np.isfinite(den)
    np.divide(num, den, out=out, where=ok)
    out[pos & (den == 0)] = np.inf
    return out


def _alpha_mul(alpha, d):
    """alpha * d honoring 0*inf = 0 and inf*0 = 0."""
    d = np.asarray(d, dtype=np.float64)
    if alpha == 0.0:
        return np.zeros_like(d)
    if math.isinf(alpha):
        return np.where(d == 0.0, 0.0, np.inf)
    return alpha * d


def validate_well_posed(dag, v0):
    """Every vertex must reach or be reached by a terminal; >= 1 terminal."""
    vals = _as_labeling(v0, dag.n)
    term = ~np.isnan(vals)
    if not term.any():
        raise ValueError("labeling has no terminals")
    seeds = [(int(v), 0.0) for v in np.nonzero(term)[0]]
    from .dag import dag_sssp
    fwd = dag_sssp(dag, seeds, "forward")
    bwd = dag_sssp(dag, seeds, "backward")
    lost = np.isinf(fwd) & np.isinf(bwd)
    if lost.any():
        raise ValueError(f"instance not well-posed: vertex {int(np.nonzero(lost)[0][0])} "
                         "has no path to or from a terminal")


def mod_dijkstra(dag, v0, alpha, direction="into"):
    """Complete labeling v and parent array by one topological sweep.

    into:  v(x) = min over terminals t with a path t->x of v0(t) + alpha*dist(t,x)
    outof: v(x) = min over terminals t reachable from x of v0(t) + alpha*dist(x,t)
    Unreachable vertices get +inf. parent(x) is the relaxing neighbor with
    v(x) = v(parent(x)) + alpha*len(edge).
    """
    vals = _as_labeling(v0, dag.n)
    if not (alpha >= 0.0 and math.isfinite(alpha)):
        raise ValueError("alpha must be finite and >= 0")
    dist = np.where(np.isnan(vals), np.inf, vals)
    scaled = alpha * dag.lengths
    dist, parent = _relax(dag, dist,
                          "forward" if direction == "into" else "backward",
                          lengths=scaled)
    return dist, parent


def comp_vlow(dag, v0, alpha):
    """vLow[alpha](x) = min over terminals t reachable from x of v0(t) + alpha*dist(x,t)."""
    return mod_dijkstra(dag, v0, alpha, direction="outof")


def comp_vhigh(dag, v0, alpha):
    """vHigh[alpha](x) = max over terminals t reaching x of v0(t) - alpha*dist(t,x).

    Computed by negating the labels and running the forward sweep.
    """
    vals = _as_labeling(v0, dag.n)
    temp, parent = mod_dijkstra(dag, PartialLabeling(-vals), alpha, direction="into")
    return -temp, parent


def _high_pressure_mask(dag, v0, alpha):
    vlow, _ = comp_vlow(dag, v0, alpha)
    vhigh, _ = comp_vhigh(dag, v0, alpha)
    return vhigh > vlow


def _induced_subgraph(dag, keep):
    ids = np.nonzero(keep)[0]
    remap = -np.ones(dag.n, dtype=np.int64)
    remap[ids] = np.arange(ids.size)
    emask = keep[dag.tails] & keep[dag.heads]
    edges = (remap[dag.tails[emask]], remap[dag.heads[emask]], dag.lengths[emask])
    return Dag(ids.size, edges), ids


def comp_high_press_graph(dag, v0, alpha):
    """Vertex-induced subgraph on {x : pressure(x) > alpha}.

    Returns (sub_dag, vertex_ids) with vertex_ids mapping compact ids back to
    the input graph.
    """
    return _induced_subgraph(dag, _high_pressure_mask(dag, v0, alpha))


def star_steepest_path(left_values, left_dists, right_values, right_dists, rng):
    """Steepest pair over a star: maximize (v(l) - v(r)) / (d(l) + d(r)).

    Random-pivot filtering: sample one pivot per side, scan each pivot's best
    partner, and keep only terminals whose pressure exceeds the incumbent;
    both sides halve in expectation. Returns (left_index, right_index,
    gradient) into the input arrays.
    """
    vl = np.asarray(left_values, dtype=np.float64)
    dl = np.asarray(left_dists, dtype=np.float64)
    vr = np.asarray(right_values, dtype=np.float64)
    dr = np.asarray(right_dists, dtype=np.float64)
    if vl.size == 0 or vr.size == 0:
        raise ValueError("both sides must be non-empty")
    li = np.arange(vl.size)
    ri = np.arange(vr.size)
    while True:
        t1 = li[rng.integers(li.size)]
        t2 = ri[rng.integers(ri.size)]
        r3 = _ratio_vec(vl[t1] - vr[ri], dl[t1] + dr[ri])
        k3 = int(np.argmax(r3))
        r4 = _ratio_vec(vl[li] - vr[t2], dl[li] + dr[t2])
        k4 = int(np.argmax(r4))
        if r3[k3] >= r4[k4]:
            alpha, best = float(r3[k3]), (int(t1), int(ri[k3]))
        else:
            alpha, best = float(r4[k4]), (int(li[k4]), int(t2))
        if math.isinf(alpha):
            return best[0], best[1], alpha
        low = np.min(vr[ri] + _alpha_mul(alpha, dr[ri]))
        keep_l = vl[li] - _alpha_mul(alpha, dl[li]) > low
        high = np.max(vl[li] - _alpha_mul(alpha, dl[li]))
        keep_r = vr[ri] + _alpha_mul(alpha, dr[ri]) < high
        # the pivots cannot beat alpha by construction; drop them explicitly
        # so rounding in the filter inequalities can never stall the loop
        keep_l &= li != t1
        keep_r &= ri != t2
        if not keep_l.any() or not keep_r.any():
            return best[0], best[1], alpha
        li = li[keep_l]
        ri = ri[keep_r]


def _walk_parents(parent, start, stop):
    path = [int(start)]
    while path[-1] != stop:
        path.append(int(parent[path[-1]]))
    return path


def vertex_steepest_path(dag, v0, x, rng=None):
    """A terminal path through x whose gradient equals pressure(x)."""
    rng = np.random.default_rng(0) if rng is None else rng
    vals = _as_labeling(v0, dag.n)
    term = ~np.isnan(vals)
    x = int(x)

    dist_to = np.full(dag.n, np.inf)
    dist_to[x] = 0.0
    dist_to, par_to = _relax(dag, dist_to, "backward")     # dist(v, x)
    dist_from = np.full(dag.n, np.inf)
    dist_from[x] = 0.0
    dist_from, par_from = _relax(dag, dist_from, "forward")  # dist(x, v)

    left = np.nonzero(term & np.isfinite(dist_to))[0]
    right = np.nonzero(term & np.isfinite(dist_from))[0]
    if left.size == 0 or right.size == 0:
        return TerminalPath((x, x), 0.0, 0.0)

    if term[x]:
        r_out = _ratio_vec(vals[x] - vals[right], dist_from[right])
        r_in = _ratio_vec(vals[left] - vals[x], dist_to[left])
        k_out = int(np.argmax(r_out))
        k_in = int(np.argmax(r_in))
        if max(r_out[k_out], r_in[k_in]) <= 0.0:
            return TerminalPath((x, x), 0.0, 0.0)
        if r_out[k_out] >= r_in[k_in]:
            t2 = int(right[k_out])
            path = _walk_parents(par_from, t2, x)[::-1]
            return TerminalPath(tuple(path), float(dist_from[t2]), float(r_out[k_out]))
        t1 = int(left[k_in])
        path = _walk_parents(par_to, t1, x)
        return TerminalPath(tuple(path), float(dist_to[t1]), float(r_in[k_in]))

    k1, k2, grad = star_steepest_path(
        vals[left], dist_to[left], vals[right], dist_from[right], rng)
    if grad <= 0.0:
        return TerminalPath((x, x), 0.0, 0.0)
    t1, t2 = int(left[k1]), int(right[k2])
    up = _walk_parents(par_to, t1, x)          # t1 ... x
    down = _walk_parents(par_from, t2, x)[::-1]  # x ... t2
    return TerminalPath(tuple(up + down[1:]),
                        float(dist_to[t1] + dist_from[t2]), grad)


def steepest_path(dag, v0, rng=None):
    """A free terminal path of maximum gradient, in expected O(m).

    Callers must strip terminal-terminal edges first. Randomized: the
    steepest path through a uniform edge and a uniform vertex gives a
    pressure threshold that halves the graph in expectation; recurse on the
    high-pressure subgraph.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    vals = _as_labeling(v0, dag.n)
    term = ~np.isnan(vals)
    if dag.m == 0:
        t = int(np.nonzero(term)[0][0])
        return TerminalPath((t, t), 0.0, 0.0)
    k = int(rng.integers(dag.m))
    pivots = [int(dag.tails[k]), int(dag.heads[k]), int(rng.integers(dag.n))]
    best = None
    for x in pivots:
        p = vertex_steepest_path(dag, v0, x, rng)
        if best is None or p.gradient > best.gradient:
            best = p
    if math.isinf(best.gradient):
        return best
    keep = _high_pressure_mask(dag, v0, best.gradient)
    # the sampled pivots have pressure <= the threshold by construction;
    # clearing them keeps the recursion shrinking under inexact arithmetic
    keep[pivots] = False
    sub, ids = _induced_subgraph(dag, keep)
    if sub.m == 0:
        return best
    inner = steepest_path(sub, PartialLabeling(vals[ids]), rng)
    if inner.gradient <= best.gradient:
        return best
    return TerminalPath(tuple(int(ids[v]) for v in inner.vertices),
                        inner.length, inner.gradient)


def _min_edge_length(dag, a, b):
    targets, eids = dag.out_edges(a)
    lens = dag.lengths[eids[targets == b]]
    if lens.size == 0:
        raise ValueError(f"({a},{b}) is not an edge")
    return float(lens.min())


def fix_path(dag, v0, path):
    """Pin the interior of a steepest fixable path by linear interpolation.

    Each interior non-terminal x gets v(start) - grad * len(path[start:x]);
    afterwards every edge along the path carries gradient exactly grad.
    """
    if not (0.0 < path.gradient < math.inf):
        raise ValueError("fix_path needs a path with finite positive gradient")
    vals = _as_labeling(v0, dag.n).copy()
    term = ~np.isnan(vals)
    start = path.vertices[0]
    cum = 0.0
    for i in range(1, len(path.vertices) - 1):
        a, b = path.vertices[i - 1], path.vertices[i]
        cum += _min_edge_length(dag, a, b)
        if not term[b]:
            vals[b] = vals[start] - path.gradient * cum
    return PartialLabeling(vals)


def assign_zero_gradient(dag, v0):
    """Complete a labeling whose steepest fixable path has gradient 0.

    Forward stage: everything reachable from a terminal takes the max label
    among terminals reaching it. Backward stage: the rest take the min label
    among (now labeled) vertices they reach. No positive gradient may appear
    outside original terminal-terminal edges; that is re-checked and a
    violation means the precondition was false.
    """
    vals = _as_labeling(v0, dag.n).copy()
    term0 = ~np.isnan(vals)
    labeled = term0.copy()
    topo = topological_sort(dag).order
    _kernels.zero_grad_sweep(topo, dag.out_indptr, dag.out_targets,
                             vals, labeled, term0, True)
    protect = labeled.copy()
    _kernels.zero_grad_sweep(topo[::-1].copy(), dag.in_indptr, dag.in_sources,
                             vals, labeled, protect, False)
    if not labeled.all():
        raise ValueError("instance not well-posed")
    free = ~(term0[dag.tails] & term0[dag.heads])
    bad = free & (vals[dag.tails] > vals[dag.heads])
    if bad.any():
        k = int(np.nonzero(bad)[0][0])
        raise ContractViolation(
            f"positive gradient created on edge ({dag.tails[k]},{dag.heads[k]}); "
            "steepest fixable gradient was not 0")
    return vals


def _strip_tt_edges(dag, term):
    keep = ~(term[dag.tails] & term[dag.heads])
    if keep.all():
        return dag
    return Dag(dag.n, (dag.tails[keep], dag.heads[keep], dag.lengths[keep]))


def comp_inf_min(dag, v0, variant="avg", rng=None):
    """Complete labeling minimizing the maximum grad+ (the inf-minimizer).

    variant selects among the inf-minimizers: "avg" = (vLow+vHigh)/2 (the
    center of the solution set), "min" = vLow, "max" = vHigh. Vertices where
    the chosen side is infinite are completed by assign_zero_gradient.
    Expected O(m).
    """
    if variant not in ("avg", "min", "max"):
        raise ValueError(f"unknown variant {variant!r}")
    rng = np.random.default_rng(0) if rng is None else rng
    vals = _as_labeling(v0, dag.n)
    validate_well_posed(dag, vals)
    term = ~np.isnan(vals)
    tt = term[dag.tails] & term[dag.heads]
    alpha = 0.0
    if tt.any():
        g = _ratio_vec(vals[dag.tails[tt]] - vals[dag.heads[tt]], dag.lengths[tt])
        alpha = float(g.max())
    stripped = _strip_tt_edges(dag, term)
    if not term.all():
        p = steepest_path(stripped, PartialLabeling(vals), rng)
        alpha = max(alpha, p.gradient)
    if math.isinf(alpha):
        raise ValueError("optimal gradient is infinite (violated zero-length "
                         "terminal-terminal path)")
    if term.all():
        return vals.copy()
    vlow, _ = comp_vlow(stripped, PartialLabeling(vals), alpha)
    vhigh, _ = comp_vhigh(stripped, PartialLabeling(vals), alpha)
    out = np.full(dag.n, np.nan)
    out[term] = vals[term]
    rest = ~term
    if variant == "avg":
        ok = rest & np.isfinite(vlow) & np.isfinite(vhigh)
        out[ok] = 0.5 * (vlow[ok] + vhigh[ok])
    elif variant == "min":
        ok = rest & np.isfinite(vlow)
        out[ok] = vlow[ok]
    else:
        ok = rest & np.isfinite(vhigh)
        out[ok] = vhigh[ok]
    if np.isnan(out).any():
        out = assign_zero_gradient(stripped, PartialLabeling(out))
    return out


def lex_less(r, s):
    """Lexicographic order on absolute values sorted in decreasing order.

    Total: lex_less(r, s) and lex_less(s, r) can both hold with r != s.
    """
    r = np.asarray(r, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if r.shape != s.shape:
        raise LengthMismatch(f"{r.shape} vs {s.shape}")
    a = np.sort(np.abs(r))[::-1]
    b = np.sort(np.abs(s))[::-1]
    diff = np.nonzero(a != b)[0]
    if diff.size == 0:
        return True
    return bool(a[diff[0]] < b[diff[0]])


def comp_lex_min(dag, v0, rng=None):
    """Complete labeling whose grad+ vector is lex-minimal (expected O(mn)).

    Repeatedly fixes steepest fixable paths until the steepest gradient is 0,
    then completes with assign_zero_gradient.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    lab = PartialLabeling(_as_labeling(v0, dag.n).copy())
    validate_well_posed(dag, lab.values)
    work = dag
    while not lab.is_complete:
        work = _strip_tt_edges(work, lab.terminal_mask)
        p = steepest_path(work, lab, rng)
        if p.gradient == 0.0:
            return assign_zero_gradient(work, lab)
        lab = fix_path(work, lab, p)
    return lab.values.copy()
