"""Self-concordant barrier for the bounded isotonic domain.

The domain couples three constraint families on (x, t):

  * epigraph cells  t(v)^{2/p} - (x(v)-y(v))^2 > 0,  t(v) > 0
  * order cone      x(b) - x(a) > 0 on every edge
  * value cap       <w^p, t> < K

The barrier is the sum of -log of all slacks plus the extra -2 log t(v)
needed to make the epigraph term self-concordant.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractViolation, InfeasibleError, NonpositiveWeight


class IsoInstance:
    """A weighted l_p fitting instance over a Dag.

    Observations are affinely mapped into [0,1] and weights divided by their
    minimum so that min(w) = 1; the multiplier that restores objective values
    to original units is kept in ``obj_scale``. Use ``unscale_x`` to map a
    fitted vector back.
    """

    def __init__(self, dag, y, w=None, p=2.0):
        if dag.n < 1:
            raise ValueError("instance needs at least one vertex")
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (dag.n,) or not np.all(np.isfinite(y)):
            raise ValueError("y must be a finite vector of length n")
        if w is None:
            w = np.ones(dag.n)
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (dag.n,) or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise NonpositiveWeight("weights must be finite and > 0")
        p = float(p)
        if not p >= 1.0:
            raise ValueError("p must be >= 1")
        self.dag = dag
        self.p = p
        self.y_offset = float(y.min()) if dag.n else 0.0
        self.y_scale = float(y.max() - y.min()) if dag.n else 1.0
        if self.y_scale == 0.0:
            self.y_scale = 1.0
        self.y = (y - self.y_offset) / self.y_scale
        wmin = float(w.min())
        self.w = w / wmin
        self.wp = self.w ** p
        self.obj_scale = (wmin ** p) * (self.y_scale ** p)
        # §-level growth assumptions behind the stated iteration bounds; they
        # do not affect correctness, so out-of-range instances only warn.
        if self.wp.max() > np.exp(dag.n):
            warnings.warn("max normalized weight^p exceeds exp(n)", stacklevel=2)
        if p > np.exp(dag.n):
            warnings.warn("p exceeds exp(n)", stacklevel=2)

    @property
    def n(self):
        return self.dag.n

    @property
    def q(self):
        return 2.0 / self.p

    def unscale_x(self, x):
        return self.y_offset + self.y_scale * np.asarray(x)

    def objective(self, x_scaled):
        """Normalized-units objective ||x - y||_{w,p}^p at a scaled x."""
        return float(np.sum(self.wp * np.abs(x_scaled - self.y) ** self.p))


@dataclass
class FeasiblePoint:
    x: np.ndarray
    t: np.ndarray

    def copy(self):
        return FeasiblePoint(self.x.copy(), self.t.copy())


@dataclass
class HessianBlocks:
    """Diagonal Hessian data of the unbounded barrier at a point.

    Hat-edge arrays (one per vertex, in vertex order): T, C, R_hat, the
    residuals r_hat = x - y, and the Schur weights W_hat = R_hat - C^2/T
    (evaluated in a cancellation-free form). Original-edge arrays (in edge
    order): R_edge = 1/slack^2 and r_edge = x(head) - x(tail). The
    concatenations ``R`` and ``r`` are ordered hat edges first.
    """

    T: np.ndarray
    C: np.ndarray
    R_hat: np.ndarray
    R_edge: np.ndarray
    r_hat: np.ndarray
    r_edge: np.ndarray
    W_hat: np.ndarray

    @property
    def R(self):
        return np.concatenate([self.R_hat, self.R_edge])

    @property
    def r(self):
        return np.concatenate([self.r_hat, self.r_edge])

    def schur_weights(self):
        """Edge weights of the Schur complement Laplacian minor.

        Per-vertex part W_hat (must be > 0: Schur positivity) plus the
        per-edge part R_edge.
        """
        if np.any(self.W_hat <= 0) or np.any(self.T <= 0):
            raise ContractViolation("Schur positivity lost at a feasible point")
        return self.W_hat, self.R_edge


def _as_xt(inst, point):
    x = np.ascontiguousarray(point.x, dtype=np.float64)
    t = np.ascontiguousarray(point.t, dtype=np.float64)
    if x.shape != (inst.n,) or t.shape != (inst.n,):
        raise ValueError("point has wrong dimensions")
    return x, t


def barrier_value(inst, K, point):
    x, t = _as_xt(inst, point)
    status, val = _kernels.barrier_value(
        x, t, inst.y, inst.wp, inst.q, float(K), inst.dag.tails, inst.dag.heads)
    if status != _kernels.STATUS_OK:
        raise InfeasibleError("barrier evaluated outside the domain")
    return val


def barrier_gradient(inst, K, point):
    """Exact gradient, returned as the length-2n vector (x-block, t-block)."""
    x, t = _as_xt(inst, point)
    gx = np.empty(inst.n)
    gt = np.empty(inst.n)
    status = _kernels.barrier_grad(
        x, t, inst.y, inst.wp, inst.q, float(K), inst.dag.tails, inst.dag.heads, gx, gt)
    if status != _kernels.STATUS_OK:
        raise InfeasibleError("gradient requested outside the domain")
    return np.concatenate([gx, gt])


def hessian_blocks(inst, K, point):
    x, t = _as_xt(inst, point)
    n, m = inst.n, inst.dag.m
    T = np.empty(n)
    C = np.empty(n)
    Rh = np.empty(n)
    Re = np.empty(m)
    r_edge = np.empty(m)
    W = np.empty(n)
    status = _kernels.hessian_diag_blocks(
        x, t, inst.y, inst.wp, inst.q, float(K), inst.dag.tails, inst.dag.heads,
        T, C, Rh, Re, r_edge, W)
    if status == _kernels.STATUS_INFEASIBLE:
        raise InfeasibleError("Hessian requested outside the domain")
    if status == _kernels.STATUS_NOT_PD:
        raise ContractViolation("Schur positivity lost at a feasible point")
    if status == _kernels.STATUS_OVERFLOW:
        raise InfeasibleError("Hessian not representable this close to the boundary")
    if not K - float(inst.wp @ t) > 0.0:
        raise InfeasibleError("value constraint violated")
    return HessianBlocks(T=T, C=C, R_hat=Rh, R_edge=Re, r_hat=x - inst.y,
                         r_edge=r_edge, W_hat=W)


def complexity_parameter(inst):
    """Barrier complexity theta = 4n + m + 1.

    4 per epigraph cell, 1 per edge log, 1 for the value cap; additive under
    barrier composition.
    """
    return 4.0 * inst.n + inst.dag.m + 1.0


def is_feasible(inst, K, point):
    """Strict membership test; returns (ok, list of violated constraints)."""
    x, t = _as_xt(inst, point)
    bad = []
    d = x[inst.dag.heads] - x[inst.dag.tails]
    for k in np.nonzero(~(d > 0))[0]:
        bad.append(f"edge ({inst.dag.tails[k]},{inst.dag.heads[k]}): slack {d[k]} <= 0")
    for v in np.nonzero(~(t > 0))[0]:
        bad.append(f"vertex {v}: t = {t[v]} <= 0")
    with np.errstate(invalid="ignore"):
        s = np.where(t > 0, t ** inst.q, -np.inf) - (x - inst.y) ** 2
    for v in np.nonzero(~(s > 0))[0]:
        if t[v] > 0:
            bad.append(f"vertex {v}: epigraph slack {s[v]} <= 0")
    if not float(inst.wp @ t) < K:
        bad.append(f"value: <w^p,t> = {float(inst.wp @ t)} >= K = {K}")
    return (not bad), bad
