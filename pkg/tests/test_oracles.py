import numpy as np
import pytest

from isodag import validate_dag
from isodag.barrier import IsoInstance
from isodag.errors import NotPositiveDefinite, TooLarge
from isodag.ipm import good_start
from isodag.lipschitz import PartialLabeling
from isodag.oracles import (
    active_set_oracle,
    allpairs_inf_oracle,
    dense_hessian,
    dense_hessian_inverse,
    lex_reference,
    pava_oracle,
    pressure_oracle,
)

from conftest import random_dag, random_labeling, random_path


def test_active_set_chain_p2():
    dag = validate_dag([(0, 1)], 2)
    res = active_set_oracle(dag, [1.0, 0.0], p=2.0)
    assert res.optimum == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(res.optimizer, [0.5, 0.5], atol=1e-6)
    assert res.enumerated == 2


def test_active_set_isotonic_is_zero(rng):
    dag = validate_dag([(0, 1), (1, 2)], 3)
    res = active_set_oracle(dag, [0.1, 0.5, 0.9], p=2.0)
    assert res.optimum == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(res.optimizer, [0.1, 0.5, 0.9], atol=1e-9)


def test_active_set_p1_value():
    dag = validate_dag([(0, 1)], 2)
    res = active_set_oracle(dag, [1.0, 0.0], p=1.0)
    assert res.optimum == pytest.approx(1.0, abs=1e-12)
    x = res.optimizer
    assert x[0] == x[1] and 0.0 <= x[0] <= 1.0


def test_active_set_too_large():
    dag = validate_dag([(i, i + 1) for i in range(17)], 18)
    with pytest.raises(TooLarge):
        active_set_oracle(dag, np.zeros(18), p=2.0)


def test_pava_examples():
    assert np.allclose(pava_oracle([1.0, 0.0]).optimizer, [0.5, 0.5])
    assert pava_oracle([1.0, 0.0]).optimum == pytest.approx(0.5)
    assert np.allclose(pava_oracle([3.0, 1.0, 2.0]).optimizer, [2.0, 2.0, 2.0])
    y = [0.0, 1.0, 2.5]
    assert np.allclose(pava_oracle(y).optimizer, y)


def test_pava_cross_validates_active_set(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        dag = random_path(rng, n)
        y = rng.random(n) * 3
        w = 1.0 + rng.random(n)
        a = active_set_oracle(dag, y, w, p=2.0)
        b = pava_oracle(y, w)
        assert a.optimum == pytest.approx(b.optimum, rel=1e-7, abs=1e-9)


def test_allpairs_chain():
    dag = validate_dag([(0, 1, 1.0), (1, 2, 1.0)], 3)
    v0 = PartialLabeling.from_dict(3, {0: 2.0, 2: 0.0})
    res = allpairs_inf_oracle(dag, v0)
    assert res.optimum == pytest.approx(1.0)
    assert np.allclose(res.optimizer, [2.0, 1.0, 0.0])


def test_allpairs_disconnected_terminals():
    dag = validate_dag([(0, 1), (2, 3)], 4)
    v0 = PartialLabeling.from_dict(4, {0: 9.0, 3: 1.0})
    assert allpairs_inf_oracle(dag, v0).optimum == 0.0


def test_allpairs_shift_and_scale_invariance(rng):
    dag = random_dag(rng, 12, 20, length_pool=[0.5, 1.0, 2.0])
    v0 = random_labeling(rng, dag)
    base = allpairs_inf_oracle(dag, v0).optimum
    shifted = PartialLabeling(v0.values + 5.0)
    assert allpairs_inf_oracle(dag, shifted).optimum == pytest.approx(base, rel=1e-12)
    scaled = PartialLabeling(v0.values * 3.0)
    assert allpairs_inf_oracle(dag, scaled).optimum == pytest.approx(3.0 * base, rel=1e-12)


def test_pressure_oracle_matches_allpairs_max(rng):
    dag = random_dag(rng, 10, 18, length_pool=[0.5, 1.0])
    v0 = random_labeling(rng, dag)
    press = pressure_oracle(dag, v0)
    assert press.max() == pytest.approx(allpairs_inf_oracle(dag, v0).optimum, rel=1e-12)


def test_lex_reference_all_terminal():
    dag = validate_dag([(0, 1)], 2)
    lab = PartialLabeling(np.array([0.7, 0.2]))
    assert lex_reference(dag, lab).tolist() == [0.7, 0.2]


def test_lex_reference_chain_interpolation():
    dag = validate_dag([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], 4)
    v0 = PartialLabeling.from_dict(4, {0: 3.0, 3: 0.0})
    assert np.allclose(lex_reference(dag, v0), [3.0, 2.0, 1.0, 0.0])


def test_lex_reference_too_large():
    dag = validate_dag([(i, i + 1) for i in range(70)], 71)
    with pytest.raises(TooLarge):
        lex_reference(dag, PartialLabeling.from_dict(71, {0: 1.0}))


def test_dense_hessian_inverse_2x2_closed_form():
    inst = IsoInstance(validate_dag([], 1), [0.0], p=2.0)
    from isodag.barrier import FeasiblePoint
    pt = FeasiblePoint(np.array([0.2]), np.array([1.5]))
    K = 3.0
    H = dense_hessian(inst, K, pt)
    # closed form for f = -log(t - x^2) - 2 log t - log(K - t)
    s = 1.5 - 0.04
    hxx = 2 / s + 4 * 0.04 / s ** 2
    hxt = -2 * 0.2 / s ** 2
    htt = 1 / s ** 2 + 2 / 1.5 ** 2 + 1 / (K - 1.5) ** 2
    assert np.allclose(H, [[hxx, hxt], [hxt, htt]], rtol=1e-12)
    got = dense_hessian_inverse(inst, K, pt)
    assert np.allclose(got @ H, np.eye(2), atol=1e-9)


def test_dense_hessian_inverse_identity(rng):
    from conftest import random_instance, random_feasible_point
    inst, _, _ = random_instance(rng, n_max=8)
    K = 3.0 * inst.n * inst.wp.max()
    pt = random_feasible_point(rng, inst, K)
    H = dense_hessian(inst, K, pt)
    Hinv = dense_hessian_inverse(inst, K, pt)
    assert np.max(np.abs(H @ Hinv - np.eye(2 * inst.n))) < 1e-9


def test_dense_hessian_inverse_guards():
    inst = IsoInstance(random_path(np.random.default_rng(0), 41), np.zeros(41), p=2.0)
    from isodag.barrier import FeasiblePoint
    with pytest.raises(TooLarge):
        dense_hessian_inverse(inst, 100.0, FeasiblePoint(np.zeros(41), np.ones(41)))
