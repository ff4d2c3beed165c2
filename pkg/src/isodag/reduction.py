"""Reductions from weighted l_inf and Strict Isotonic Regression to
inf-/lex-minimization on an augmented partially-labeled DAG.

Each vertex u gains a left twin u_L -> u and a right twin u -> u_R, both of
length 1/w(u) and labeled y(u); original edges keep length 0 so any finite-
gradient labeling is exactly isotonic on them. Gradients on the twin edges
are then precisely the weighted errors w(u)|x(u) - y(u)|.
"""

from dataclasses import dataclass

import numpy as np

from .dag import Dag
from .errors import NonpositiveWeight
from .lipschitz import PartialLabeling, comp_inf_min, comp_lex_min


@dataclass
class AugmentedInstance:
    gprime: Dag                # 3n vertices: V = 0..n-1, V_L = n..2n-1, V_R = 2n..3n-1
    yprime: PartialLabeling    # labeled on V_L and V_R only
    back_map: np.ndarray       # original vertex -> augmented vertex (identity)


def build_augmented(dag, y, w=None):
    """The 3n-vertex, (m+2n)-edge reduction instance."""
    n = dag.n
    y = np.asarray(y, dtype=np.float64)
    if w is None:
        w = np.ones(n)
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise NonpositiveWeight("weights must be finite and > 0")
    ids = np.arange(n, dtype=np.int64)
    tails = np.concatenate([dag.tails, n + ids, ids])
    heads = np.concatenate([dag.heads, ids, 2 * n + ids])
    lengths = np.concatenate([np.zeros(dag.m), 1.0 / w, 1.0 / w])
    gprime = Dag(3 * n, (tails, heads, lengths))
    vprime = np.full(3 * n, np.nan)
    vprime[n:2 * n] = y
    vprime[2 * n:] = y
    return AugmentedInstance(gprime=gprime, yprime=PartialLabeling(vprime), back_map=ids)


def isotonic_inf(dag, y, w=None, variant="avg", rng=None):
    """Weighted l_inf isotonic regression in expected O(m).

    The output is exactly isotonic (zero-length edges force it) and its
    weighted error max w|x-y| is the optimum. variant picks the Avg, Min, or
    Max solution.
    """
    aug = build_augmented(dag, y, w)
    labels = comp_inf_min(aug.gprime, aug.yprime, variant=variant, rng=rng)
    return labels[aug.back_map]


def isotonic_strict(dag, y, w=None, rng=None):
    """Strict isotonic regression (the p -> inf limit) in expected O(mn).

    The weighted error vector w(x - y) is lex-minimal among isotonic vectors;
    in particular x is also an l_inf minimizer.
    """
    aug = build_augmented(dag, y, w)
    labels = comp_lex_min(aug.gprime, aug.yprime, rng=rng)
    return labels[aug.back_map]
