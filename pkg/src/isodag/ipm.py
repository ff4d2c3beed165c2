"""Primal path-following interior point method with approximate Newton steps.

Two phases: phase 1 walks the iterate from the starting point toward the
analytic center by damping the starting gradient (parameter rho shrinking
geometrically); phase 2 follows the central path of the linear objective
(parameter eta growing geometrically). Every step is a single approximate
Newton step x <- x - M z where M is within [9/10, 11/10] of the true inverse
Hessian, which is enough to keep the (true) Newton decrement below 1/9.

The certified bound on suboptimality is (6/5) theta / eta, valid whenever the
measured decrement is at most 1/9; both solvers finish with a few extra
centering steps so that the certificate applies.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .barrier import FeasiblePoint, IsoInstance, complexity_parameter
from .dag import topological_sort
from .errors import (
    ContractViolation,
    InfeasibleError,
    InfeasibilityPanic,
    PreconditionError,
    SolverFailure,
)

# measured-decrement gate certifying the true decrement is <= 1/9 under a
# [9/10, 11/10] operator
DECREMENT_CERT = (1.0 / 9.0) * math.sqrt(0.9)
# assertion limits for the short-step invariants, widened by the estimation
# factor sqrt(11/10)
PRE_STEP_LIMIT = (1.0 / 6.0) * math.sqrt(1.1) + 1e-9
POST_STEP_LIMIT = (1.0 / 9.0) * math.sqrt(1.1) + 1e-9

# dense numba path below, sparse splu path above: the crossover sits near
# one hundred vertices for the sparse graphs this package targets
_FAST_N = 96


@dataclass(frozen=True)
class IpmConfig:
    theta: float
    sym_lower: float
    value_upper: float
    epsilon: float
    failure_prob: float
    objective: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.sym_lower <= 1.0):
            raise ValueError("symmetry lower bound must be in (0, 1]")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must be in (0, 1)")
        if not self.theta >= 1.0:
            raise ValueError("theta must be >= 1")
        if not np.isfinite(self.value_upper):
            raise ValueError("K must be finite")


@dataclass
class IpmTrace:
    """Per-iteration records plus the exit state of a run.

    phases: 1 = centering phase, 2 = path following, 3 = final polish.
    params holds rho (phase 1) or eta (phases 2-3).
    """

    phases: list = field(default_factory=list)
    params: list = field(default_factory=list)
    decrements: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    post_decrements: list = field(default_factory=list)
    t1: int = 0
    t2: int = 0
    polish: int = 0
    final_eta: float = math.nan
    final_decrement: float = math.nan
    max_pre_decrement: float = 0.0
    max_post_decrement: float = 0.0

    @property
    def total_iterations(self):
        return self.t1 + self.t2 + self.polish


@dataclass
class SolveReport:
    x: np.ndarray
    objective: float
    norm: str
    gap_bound: float = None
    alpha_star: float = None
    iterations: dict = None
    wall_time_s: float = 0.0
    mode: str = None
    trace: IpmTrace = None

    def to_json_dict(self):
        out = {
            "schema_version": 1,
            "norm": self.norm,
            "x": [float(v) for v in np.asarray(self.x)],
            "objective": float(self.objective),
            "wall_time_s": float(self.wall_time_s),
        }
        if self.gap_bound is not None:
            out["gap_bound"] = float(self.gap_bound)
        if self.alpha_star is not None:
            out["alpha_star"] = float(self.alpha_star)
        if self.iterations is not None:
            out["iterations"] = self.iterations
        if self.mode is not None:
            out["mode"] = self.mode
        return out


# ---------------------------------------------------------------------------
# barrier bundles: gradient / hessian-inverse application over flat vectors
# ---------------------------------------------------------------------------

class _IsotonicBundleBase:
    """Shared gradient/value evaluation over the flat (x, t) vector."""

    def __init__(self, inst, K):
        self.inst = inst
        self.K = float(K)
        self.n = inst.n
        self._tails = inst.dag.tails
        self._heads = inst.dag.heads

    def value(self, xt):
        status, val = _kernels.barrier_value(
            xt[:self.n], xt[self.n:], self.inst.y, self.inst.wp, self.inst.q,
            self.K, self._tails, self._heads)
        if status != _kernels.STATUS_OK:
            raise InfeasibleError("point outside the domain")
        return val

    def gradient(self, xt):
        g = np.empty(2 * self.n)
        status = _kernels.barrier_grad(
            xt[:self.n], xt[self.n:], self.inst.y, self.inst.wp, self.inst.q,
            self.K, self._tails, self._heads, g[:self.n], g[self.n:])
        if status != _kernels.STATUS_OK:
            raise InfeasibleError("point outside the domain")
        return g

    def min_slack(self, xt):
        return _kernels.min_slack(
            xt[:self.n], xt[self.n:], self.inst.y, self.inst.wp, self.inst.q,
            self.K, self._tails, self._heads)


class _DenseBundle(_IsotonicBundleBase):
    """Dense-Schur numba path; exact inverse application. For small n."""

    def hessian_solve(self, xt, a):
        b = np.empty(2 * self.n)
        try:
            status = _kernels.hess_apply_dense(
                xt[:self.n], xt[self.n:], self.inst.y, self.inst.wp, self.inst.q,
                self.K, self._tails, self._heads,
                a[:self.n], a[self.n:], b[:self.n], b[self.n:])
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"dense Cholesky failed: {exc}") from exc
        if status == _kernels.STATUS_INFEASIBLE:
            raise InfeasibleError("point outside the domain")
        if status == _kernels.STATUS_NOT_PD:
            raise ContractViolation("Schur positivity lost")
        if status == _kernels.STATUS_OVERFLOW:
            raise SolverFailure("Hessian overflow next to the domain boundary")
        return b


class _SparseBundle(_IsotonicBundleBase):
    """Sparse-Schur path (exact splu factorization). For large n."""

    def hessian_solve(self, xt, a):
        inst, n = self.inst, self.n
        x, t = xt[:n], xt[n:]
        T = np.empty(n)
        C = np.empty(n)
        Rh = np.empty(n)
        Re = np.empty(inst.dag.m)
        r_edge = np.empty(inst.dag.m)
        w_hat = np.empty(n)
        status = _kernels.hessian_diag_blocks(
            x, t, inst.y, inst.wp, inst.q, self.K, self._tails, self._heads,
            T, C, Rh, Re, r_edge, w_hat)
        if status == _kernels.STATUS_INFEASIBLE:
            raise InfeasibleError("point outside the domain")
        if status == _kernels.STATUS_NOT_PD:
            raise ContractViolation("Schur positivity lost")
        if status == _kernels.STATUS_OVERFLOW:
            raise SolverFailure("Hessian overflow next to the domain boundary")
        slack = self.K - float(inst.wp @ t)
        if slack <= 0:
            raise InfeasibleError("value constraint violated")
        ta, he = self._tails, self._heads
        idx = np.arange(n, dtype=np.int64)
        rows = np.concatenate([ta, he, ta, he, idx])
        cols = np.concatenate([ta, he, he, ta, idx])
        vals = np.concatenate([Re, Re, -Re, -Re, w_hat])
        S = scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
        lu = scipy.sparse.linalg.splu(S)
        d = C / T

        def m_odm(vx, vt):
            xs = lu.solve(vx - d * vt)
            return xs, (vt - C * xs) / T

        zx, zt = m_odm(a[:n], a[n:])
        ut = inst.wp / slack
        wx, wt = m_odm(np.zeros(n), ut)
        coef = (wx @ a[:n] + wt @ a[n:]) / (1.0 + ut @ wt)
        return np.concatenate([zx - coef * wx, zt - coef * wt])


def make_bundle(inst, K):
    if inst.n <= _FAST_N:
        return _DenseBundle(inst, K)
    return _SparseBundle(inst, K)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def good_start(inst, K=None):
    """Feasible starting point with symmetry >= 1/(18 n^2 p wmax^p).

    x0 walks the topological order in steps of 1/n; t0 sits one unit above
    each epigraph surface.
    """
    n = inst.n
    rank = topological_sort(inst.dag).rank
    x0 = (rank + 1.0) / n
    t0 = np.abs(x0 - inst.y) ** inst.p + 1.0
    return FeasiblePoint(x=x0, t=t0)


def gap_bound(eta, theta, decrement=None):
    """Certified bound (6/5) theta / eta on <c,x> - opt.

    Valid when the measured Newton decrement at (x, eta) is at most 1/9; pass
    it to enforce the precondition.
    """
    if decrement is not None and decrement > 1.0 / 9.0 + 1e-12:
        raise PreconditionError(
            f"gap bound needs decrement <= 1/9, measured {decrement}")
    return 1.2 * theta / eta


def _grad(bundle, x, at_start=False):
    try:
        return bundle.gradient(x)
    except InfeasibleError:
        if at_start:
            raise
        raise InfeasibilityPanic("iterate left the domain") from None


def approx_ipm(config, bundle, x0, verify=False, keep_trace=False):
    """Short-step path following; returns (x_apx, IpmTrace).

    The iterate satisfies (<c,x> - opt) / (K - opt) <= epsilon on exit.
    ``verify`` re-measures the Newton decrement after every step and asserts
    the pre <= 1/6 and post <= 1/9 invariants (widened for estimation error);
    it roughly doubles the work.
    """
    theta = config.theta
    c = config.objective
    step_scale = 1.0 / (20.0 * math.sqrt(theta))
    t1 = math.ceil(20.0 * math.sqrt(theta)
                   * math.log(30.0 * theta * (1.0 + 1.0 / config.sym_lower)))
    t2 = math.ceil(20.0 * math.sqrt(theta) * math.log(66.0 * theta / config.epsilon))
    trace = IpmTrace(t1=t1, t2=t2)

    x = np.array(x0, dtype=np.float64)
    g0 = bundle.gradient(x)  # raises InfeasibleError for a bad start

    def record(phase, param, dec, step):
        if keep_trace:
            trace.phases.append(phase)
            trace.params.append(param)
            trace.decrements.append(dec)
            trace.step_norms.append(float(np.linalg.norm(step)))

    def take_step(phase, param, z):
        step = bundle.hessian_solve(x, z)
        dec = math.sqrt(max(float(z @ step), 0.0))
        if verify and dec > PRE_STEP_LIMIT:
            raise ContractViolation(f"pre-step decrement {dec} above 1/6 limit")
        trace.max_pre_decrement = max(trace.max_pre_decrement, dec)
        record(phase, param, dec, step)
        return x - step, dec

    def post_check(z_of):
        g = _grad(bundle, x)
        z = z_of(g)
        step = bundle.hessian_solve(x, z)
        dec = math.sqrt(max(float(z @ step), 0.0))
        if dec > POST_STEP_LIMIT:
            raise ContractViolation(f"post-step decrement {dec} above 1/9 limit")
        trace.max_post_decrement = max(trace.max_post_decrement, dec)
        if keep_trace:
            trace.post_decrements.append(dec)

    # phase 1: pull toward the analytic center along the damped start gradient
    rho = 1.0
    for _ in range(t1):
        rho *= 1.0 - step_scale
        g = _grad(bundle, x)
        x, _ = take_step(1, rho, -rho * g0 + g)
        if verify:
            post_check(lambda g_: -rho * g0 + g_)
    if rho > 1.0 / (30.0 * theta * (1.0 + 1.0 / config.sym_lower)) * (1.0 + 1e-9):
        raise ContractViolation("phase-1 exit bound on rho violated")

    # phase 2 bridge: pick the initial eta from the objective's local norm
    mc = bundle.hessian_solve(x, c)
    alpha = math.sqrt(max(float(c @ mc), 0.0))
    if alpha == 0.0:
        raise SolverFailure("objective vanishes in the local norm")
    eta = 1.0 / (50.0 * alpha)
    g = _grad(bundle, x)
    x, _ = take_step(2, eta, eta * c + g)
    if verify:
        post_check(lambda g_: eta * c + g_)

    # phase 2: follow the central path
    for _ in range(t2):
        eta *= 1.0 + step_scale
        g = _grad(bundle, x)
        x, _ = take_step(2, eta, eta * c + g)
        if verify:
            post_check(lambda g_: eta * c + g_)

    # keep walking until the certificate target 1.2 theta/eta <= eps*K holds;
    # T2 is derived from a chain of estimates with a few percent of slack, so
    # a short tail of extra path steps may be needed
    target_eta = 1.2 * theta / (config.epsilon * config.value_upper)
    extra = 0
    while eta < target_eta and extra < t2:
        eta *= 1.0 + step_scale
        g = _grad(bundle, x)
        x, _ = take_step(2, eta, eta * c + g)
        if verify:
            post_check(lambda g_: eta * c + g_)
        extra += 1
    trace.t2 += extra

    # final polish: center at the last eta until the gap certificate applies
    dec = math.inf
    for k in range(64):
        g = _grad(bundle, x)
        z = eta * c + g
        step = bundle.hessian_solve(x, z)
        dec = math.sqrt(max(float(z @ step), 0.0))
        if dec <= DECREMENT_CERT:
            break
        damp = 1.0 if dec <= 0.25 else 1.0 / (1.0 + dec)
        record(3, eta, dec, step)
        x = x - damp * step
        trace.polish += 1
    else:
        raise SolverFailure("final centering did not certify the gap bound")

    trace.final_eta = eta
    trace.final_decrement = dec
    if gap_bound(eta, theta, decrement=dec) > config.epsilon * config.value_upper * (1.0 + 1e-9):
        raise ContractViolation("final gap bound exceeds epsilon * K")
    return x, trace


def _ipm_parameters(inst, delta):
    """K, s, epsilon, c for the isotonic instantiation (normalized units)."""
    n = inst.n
    wmaxp = float(inst.wp.max())
    K = 3.0 * n * wmaxp
    s = 1.0 / (18.0 * n * n * inst.p * wmaxp)
    delta_scaled = delta / inst.obj_scale
    if not delta_scaled > 0:
        raise ValueError("delta must be positive")
    eps = min(delta_scaled / K, 0.5)
    c = np.concatenate([np.zeros(n), inst.wp])
    return K, s, eps, c, delta_scaled


def _coerce_instance(inst, y, w, p):
    if isinstance(inst, IsoInstance):
        return inst
    return IsoInstance(inst, y, w=w, p=p)


def _report_from_solution(inst, xt, gb_norm, iterations, t_start, mode, trace, keep_trace):
    xs = xt[:inst.n]
    return SolveReport(
        x=inst.unscale_x(xs),
        objective=inst.objective(xs) * inst.obj_scale,
        norm=f"{inst.p:g}",
        gap_bound=gb_norm * inst.obj_scale,
        iterations=iterations,
        wall_time_s=time.perf_counter() - t_start,
        mode=mode,
        trace=trace if keep_trace else None,
    )


def isotonic_ipm(inst, delta, y=None, w=None, p=2.0, verify=False, keep_trace=False):
    """Short-step l_p isotonic regression: objective within delta of optimal.

    ``inst`` is an IsoInstance, or a Dag combined with y/w/p. delta is in the
    caller's units; it is rescaled internally together with y and w. Returns
    a SolveReport whose gap_bound certifies objective <= optimum + delta.
    """
    t_start = time.perf_counter()
    inst = _coerce_instance(inst, y, w, p)
    K, s, eps, c, _ = _ipm_parameters(inst, delta)
    config = IpmConfig(theta=complexity_parameter(inst), sym_lower=s,
                       value_upper=K, epsilon=eps, failure_prob=1.0 / inst.n ** 3,
                       objective=c)
    bundle = make_bundle(inst, K)
    start = good_start(inst, K)
    x0 = np.concatenate([start.x, start.t])
    xt, trace = approx_ipm(config, bundle, x0, verify=verify, keep_trace=keep_trace)
    gb = gap_bound(trace.final_eta, config.theta, decrement=trace.final_decrement)
    iterations = {"t1": trace.t1, "t2": trace.t2, "polish": trace.polish,
                  "total": trace.total_iterations}
    return _report_from_solution(inst, xt, gb, iterations, t_start, "short", trace, keep_trace)


def long_step_ipm(inst, delta=None, y=None, w=None, p=2.0, rel_target=None,
                  eta_factor=10.0, keep_trace=False, max_outer=400, max_inner=500):
    """Adaptive long-step variant; same contract, certified by the same bound.

    Centers the barrier, then repeatedly multiplies eta by ``eta_factor`` and
    recenters with damped/backtracking Newton steps until (6/5) theta / eta
    is below delta (and/or below rel_target times the current objective, the
    bench harness's stopping rule). Iteration counts are heuristic;
    correctness rests only on the emitted gap certificate. Falls back to the
    short-step method if the bound stalls for 50 outer rounds.
    """
    t_start = time.perf_counter()
    inst = _coerce_instance(inst, y, w, p)
    theta = complexity_parameter(inst)
    if delta is None and rel_target is None:
        raise ValueError("need delta and/or rel_target")
    K, s, eps, c, delta_scaled = _ipm_parameters(
        inst, delta if delta is not None else inst.obj_scale)
    if delta is None:
        delta_scaled = None
    bundle = make_bundle(inst, K)
    start = good_start(inst, K)
    x = np.concatenate([start.x, start.t])
    trace = IpmTrace()

    def center(x, eta, phase):
        """Damped Newton until the certificate gate holds.

        Self-concordance makes the damped step 1/(1 + lambda) decrease the
        eta-penalized barrier by a fixed amount without any function-value
        test (an Armijo test on eta*<c,x> + barrier stalls once eta is large:
        the decrease drowns in the float resolution of the objective term).
        Backtracking only guards feasibility, with a slack floor below which
        the Hessian's squared-slack products stop being representable.
        """
        for it in range(max_inner):
            g = _grad(bundle, x)
            z = eta * c + g if eta > 0 else g
            step = bundle.hessian_solve(x, z)
            dec = math.sqrt(max(float(z @ step), 0.0))
            if keep_trace:
                trace.phases.append(phase)
                trace.params.append(eta)
                trace.decrements.append(dec)
                trace.step_norms.append(float(np.linalg.norm(step)))
            if dec <= DECREMENT_CERT:
                return x, dec, it
            stepsize = 1.0 if dec <= 0.25 else 1.0 / (1.0 + 1.1 * dec)
            while stepsize > 1e-14:
                xn = x - stepsize * step
                if bundle.min_slack(xn) >= 1e-60:
                    x = xn
                    break
                stepsize *= 0.5
            else:
                raise SolverFailure("line search failed to make progress")
        raise SolverFailure("long-step centering exceeded the iteration cap")

    try:
        x, dec, _ = center(x, 0.0, 1)
        mc = bundle.hessian_solve(x, c)
        alpha = math.sqrt(max(float(c @ mc), 0.0))
        if alpha == 0.0:
            raise SolverFailure("objective vanishes in the local norm")
        eta = 1.0 / (50.0 * alpha)
        outer = 0
        stalls = 0
        best = math.inf
        while True:
            x, dec, _ = center(x, eta, 2)
            gb = gap_bound(eta, theta, decrement=dec)
            if delta_scaled is not None and gb <= delta_scaled:
                break
            # the absolute floor terminates on (nearly) isotonic inputs whose
            # optimum is 0: there gb and the objective shrink together and a
            # purely relative target would never be met
            if rel_target is not None and \
                    gb <= rel_target * inst.objective(x[:inst.n]) + 1e-9 * K:
                break
            stalls = stalls + 1 if gb >= best else 0
            best = min(best, gb)
            if stalls >= 50:
                raise SolverFailure("gap bound stalled")
            outer += 1
            if outer > max_outer:
                raise SolverFailure("long-step outer iteration cap exceeded")
            eta *= eta_factor
    except SolverFailure:
        if delta is None:
            raise
        report = isotonic_ipm(inst, delta, verify=False, keep_trace=keep_trace)
        report.mode = "short-fallback"
        return report

    trace.final_eta = eta
    trace.final_decrement = dec
    iterations = {"outer": outer, "total": outer, "polish": 0}
    return _report_from_solution(inst, x, gb, iterations, t_start, "long", trace, keep_trace)
