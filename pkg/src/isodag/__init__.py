"""Isotonic regression over DAG partial orders in all weighted l_p norms.

Solvers:
  * isotonic_ipm / long_step_ipm -- interior point fits for p in [1, inf)
  * isotonic_inf                 -- exact weighted l_inf fit, expected O(m)
  * isotonic_strict              -- strict (lexicographic) fit, expected O(mn)
"""

from .dag import Dag, TopoOrder, dag_sssp, reverse, topological_sort, validate_dag
from .barrier import (
    FeasiblePoint,
    HessianBlocks,
    IsoInstance,
    barrier_gradient,
    barrier_value,
    complexity_parameter,
    hessian_blocks,
    is_feasible,
)
from .solvers import LinearOperator, block_solve, hessian_operator, hessian_solve, rank_one_more, sdd_solve
from .ipm import IpmConfig, IpmTrace, SolveReport, approx_ipm, gap_bound, good_start, isotonic_ipm, long_step_ipm
from .lipschitz import (
    PartialLabeling,
    TerminalPath,
    assign_zero_gradient,
    comp_high_press_graph,
    comp_inf_min,
    comp_lex_min,
    comp_vhigh,
    comp_vlow,
    fix_path,
    grad_plus,
    lex_less,
    mod_dijkstra,
    star_steepest_path,
    steepest_path,
    vertex_steepest_path,
)
from .reduction import AugmentedInstance, build_augmented, isotonic_inf, isotonic_strict

__version__ = "0.1.0"
