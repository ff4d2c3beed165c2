import numpy as np
import pytest
import scipy.sparse

from isodag import validate_dag
from isodag.barrier import FeasiblePoint, IsoInstance
from isodag.errors import SolverFailure
from isodag.ipm import good_start
from isodag.oracles import dense_hessian, dense_hessian_inverse
from isodag.solvers import (
    LinearOperator,
    block_solve,
    check_sdd,
    hessian_operator,
    hessian_solve,
    rank_one_more,
    schur_complement,
    sdd_solve,
)

from conftest import random_feasible_point, random_instance


def _random_laplacian_minor(rng, n):
    """SDD PD matrix: graph Laplacian plus a positive diagonal."""
    m = 2 * n
    a = rng.integers(0, n, m)
    b = rng.integers(0, n, m)
    w = 0.1 + rng.random(m)
    L = np.zeros((n, n))
    for i, j, wij in zip(a, b, w):
        if i == j:
            continue
        L[i, i] += wij
        L[j, j] += wij
        L[i, j] -= wij
        L[j, i] -= wij
    L[np.diag_indices(n)] += 0.05 + rng.random(n)
    return L


def test_sdd_identity():
    M = sdd_solve(np.eye(3), tau=0.01)
    v = np.array([1.0, -2.0, 0.5])
    assert np.allclose(M(v), v, atol=1e-12)


def test_sdd_2x2_example():
    S = np.array([[2.0, -1.0], [-1.0, 2.0]])
    M = sdd_solve(S, tau=0.01)
    assert np.allclose(M(np.array([1.0, 0.0])), [2 / 3, 1 / 3], atol=0.01)


def test_sdd_rejects_non_dominant():
    with pytest.raises(ValueError):
        sdd_solve(np.array([[1.0, 2.0], [2.0, 1.0]]), tau=0.1)
    assert not check_sdd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert check_sdd(np.array([[2.0, -1.0], [-1.0, 2.0]]))


@pytest.mark.parametrize("method", ["dense", "sparse", "pcg"])
def test_sdd_spectral_contract(rng, method):
    tau = 1 / 50
    for _ in range(20):
        n = int(rng.integers(5, 31))
        S = _random_laplacian_minor(rng, n)
        M = sdd_solve(scipy.sparse.csr_matrix(S), tau=tau, method=method)
        Sinv = np.linalg.inv(S)
        for _ in range(100):
            v = rng.standard_normal(n)
            ratio = (v @ M(v)) / (v @ (Sinv @ v))
            assert 1 - tau <= ratio <= 1 + tau


def test_sdd_pcg_requires_positive_tau():
    with pytest.raises(ValueError):
        sdd_solve(np.eye(2), tau=0.0, method="pcg")


def test_operator_symmetry_and_determinism(rng):
    inst, _, _ = random_instance(rng, n_max=8)
    K = 3.0 * inst.n * inst.wp.max()
    pt = random_feasible_point(rng, inst, K)
    op = hessian_operator(inst, K, pt, mu=1e-6)
    for _ in range(50):
        a = rng.standard_normal(2 * inst.n)
        b = rng.standard_normal(2 * inst.n)
        lhs, rhs = a @ op(b), b @ op(a)
        norm = np.linalg.norm(a) * np.linalg.norm(b) * max(np.abs(op(b)).max(), 1.0)
        assert abs(lhs - rhs) <= 1e-9 * norm
    a = rng.standard_normal(2 * inst.n)
    assert np.array_equal(op(a), op(a))  # bitwise identical


def _dense_h_odm(inst, K, pt):
    n = inst.n
    H = dense_hessian(inst, K, pt)
    slack = K - float(inst.wp @ pt.t)
    H[n:, n:] -= np.outer(inst.wp, inst.wp) / slack ** 2
    return H


def test_block_solve_single_vertex(rng):
    inst = IsoInstance(validate_dag([], 1), [0.3], p=2.0)
    K = 3.0
    pt = random_feasible_point(rng, inst, K)
    op = block_solve(inst, K, pt, tau=0.0)
    Hinv = np.linalg.inv(_dense_h_odm(inst, K, pt))
    for _ in range(20):
        a = rng.standard_normal(2)
        assert np.allclose(op(a), Hinv @ a, atol=1e-10)


def test_block_solve_chain_rayleigh(rng):
    tau = 1 / 50
    inst = IsoInstance(validate_dag([(0, 1), (1, 2)], 3), [0.2, 0.9, 0.4], p=2.0)
    K = 9.0
    pt = random_feasible_point(rng, inst, K)
    op = block_solve(inst, K, pt, tau=tau)
    Hinv = np.linalg.inv(_dense_h_odm(inst, K, pt))
    for _ in range(100):
        v = rng.standard_normal(6)
        ratio = (v @ op(v)) / (v @ (Hinv @ v))
        assert 1 - tau <= ratio <= 1 + tau


def test_block_solve_exact_limit(rng):
    for _ in range(5):
        inst, _, _ = random_instance(rng, n_max=10)
        K = 3.0 * inst.n * inst.wp.max()
        pt = random_feasible_point(rng, inst, K)
        op = block_solve(inst, K, pt, tau=0.0)
        Hinv = np.linalg.inv(_dense_h_odm(inst, K, pt))
        a = rng.standard_normal(2 * inst.n)
        assert np.max(np.abs(op(a) - Hinv @ a)) < 1e-10 * max(1.0, np.abs(Hinv @ a).max())


def test_schur_complement_is_sdd(rng):
    for _ in range(10):
        inst, _, _ = random_instance(rng, n_max=12, p=float(rng.choice([1.0, 2.0, 8.0])))
        K = 3.0 * inst.n * inst.wp.max()
        pt = random_feasible_point(rng, inst, K)
        S, _ = schur_complement(inst, pt, K)
        assert check_sdd(S)


def test_rank_one_more_no_update():
    M = LinearOperator(3, lambda a: 2.0 * a)
    a = np.array([1.0, 2.0, 3.0])
    assert np.allclose(rank_one_more(M, np.zeros(3), a), 2.0 * a)


def test_rank_one_more_identity():
    M = LinearOperator(3, lambda a: a.copy())
    e1 = np.array([1.0, 0.0, 0.0])
    assert np.allclose(rank_one_more(M, e1, e1), [0.5, 0.0, 0.0])


def test_rank_one_more_random_pd(rng):
    for _ in range(10):
        n = 5
        A = rng.standard_normal((n, n))
        X = A @ A.T + n * np.eye(n)
        Xinv = np.linalg.inv(X)
        M = LinearOperator(n, lambda a, Xinv=Xinv: Xinv @ a)
        u = rng.standard_normal(n)
        a = rng.standard_normal(n)
        want = np.linalg.solve(X + np.outer(u, u), a)
        assert np.allclose(rank_one_more(M, u, a), want, atol=1e-9)


def test_hessian_operator_rayleigh(rng):
    for maker in (
        lambda: IsoInstance(validate_dag([], 1), [0.4], p=2.0),
        lambda: IsoInstance(validate_dag([(0, 1), (1, 2), (2, 3)], 4),
                            [0.1, 0.7, 0.3, 0.9], p=2.0),
    ):
        inst = maker()
        K = 3.0 * inst.n * inst.wp.max()
        pt = random_feasible_point(rng, inst, K)
        op = hessian_operator(inst, K, pt, mu=1e-6)
        Hinv = dense_hessian_inverse(inst, K, pt)
        for _ in range(100):
            v = rng.standard_normal(2 * inst.n)
            ratio = (v @ op(v)) / (v @ (Hinv @ v))
            assert 0.9 <= ratio <= 1.1


def test_hessian_solve_one_shot(rng):
    inst, _, _ = random_instance(rng, n_max=6)
    K = 3.0 * inst.n * inst.wp.max()
    pt = random_feasible_point(rng, inst, K)
    a = rng.standard_normal(2 * inst.n)
    got = hessian_solve(inst, K, pt, 1e-6, a)
    assert np.allclose(got, dense_hessian_inverse(inst, K, pt) @ a, rtol=1e-8, atol=1e-10)


def test_fast_bundle_matches_public_solver(rng):
    from isodag.ipm import _DenseBundle, _SparseBundle
    for _ in range(5):
        inst, _, _ = random_instance(rng, n_max=10, p=float(rng.choice([1.0, 1.5, 2.0, 8.0])))
        K = 3.0 * inst.n * inst.wp.max()
        pt = random_feasible_point(rng, inst, K)
        xt = np.concatenate([pt.x, pt.t])
        a = rng.standard_normal(2 * inst.n)
        want = hessian_solve(inst, K, pt, 1e-6, a)
        for bundle in (_DenseBundle(inst, K), _SparseBundle(inst, K)):
            got = bundle.hessian_solve(xt, a)
            assert np.allclose(got, want, rtol=1e-9, atol=1e-11)


def test_pcg_path_solves():
    S = np.array([[2.0, -1.0], [-1.0, 2.0]])
    op = sdd_solve(scipy.sparse.csr_matrix(S), tau=1 / 50, method="pcg")
    assert np.allclose(op(np.array([1.0, 0.0])), [2 / 3, 1 / 3], atol=1e-6)


def test_singular_matrix_raises_solver_failure():
    # a full graph Laplacian is SDD but singular: the factorization must fail
    # loudly instead of returning garbage
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    with pytest.raises(SolverFailure):
        sdd_solve(L, tau=0.0, method="dense")
