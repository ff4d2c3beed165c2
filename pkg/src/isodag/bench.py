"""Benchmark harness: generated instances, timings, CSV rows.

Data rows:    family,n,m,sigma,trial,mode,seconds,objective,relerr,status
Summary rows: family,n,sigma,mode,mean_seconds,std_seconds,mean_relerr,max_relerr,ok
(the summary block follows a '# summary' marker line).

relerr is the certified ratio gap_bound / objective for p-norm runs and empty
for the exact l_inf / strict solvers.
"""

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .generators import _random_linear_extension, gen_grid2d, gen_random_regular
from .ipm import isotonic_ipm, long_step_ipm
from .reduction import isotonic_inf, isotonic_strict

DATA_HEADER = ["family", "n", "m", "sigma", "trial", "mode",
               "seconds", "objective", "relerr", "status"]
SUMMARY_HEADER = ["family", "n", "sigma", "mode", "mean_seconds", "std_seconds",
                  "mean_relerr", "max_relerr", "ok"]


@dataclass
class BenchSpec:
    family: str                   # "grid2d" (sizes are side lengths) | "random-regular"
    sizes: list
    sigma: float = 1.0
    trials: int = 3
    seed: int = 0
    norm: str = "2"               # a float string, "inf", or "strict"
    mode: str = "long"            # "short" | "long" for p-norm runs
    degree: int = 4
    rel_target: float = 0.005     # certified relative error target (p-norm)
    delta: float = None           # absolute target; overrides rel_target if set
    variant: str = "avg"
    lengths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in ("grid2d", "random-regular"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.trials < 1 or any(s <= 0 for s in self.sizes):
            raise ValueError("sizes must be positive and trials >= 1")


def _make_instance(spec, size, trial):
    seed = spec.seed + 7919 * trial + 104729 * size
    if spec.family == "grid2d":
        dag, y = gen_grid2d(size, spec.sigma, seed)
    else:
        dag = gen_random_regular(size, spec.degree, seed)
        rng = np.random.default_rng(seed + 1)
        y = _random_linear_extension(dag, rng) + rng.normal(0.0, spec.sigma, dag.n)
    return dag, y


def run_trial(spec, size, trial):
    dag, y = _make_instance(spec, size, trial)
    t0 = time.perf_counter()
    if spec.norm == "inf":
        x = isotonic_inf(dag, y, variant=spec.variant,
                         rng=np.random.default_rng(spec.seed + trial))
        objective = float(np.max(np.abs(x - y)))
        relerr = ""
    elif spec.norm == "strict":
        x = isotonic_strict(dag, y, rng=np.random.default_rng(spec.seed + trial))
        objective = float(np.max(np.abs(x - y)))
        relerr = ""
    else:
        p = float(spec.norm)
        if spec.mode == "long":
            rep = long_step_ipm(dag, delta=spec.delta, y=y, p=p,
                                rel_target=spec.rel_target)
        else:
            rep = isotonic_ipm(dag, spec.delta if spec.delta is not None else 1e-6,
                               y=y, p=p)
        objective = rep.objective
        relerr = rep.gap_bound / rep.objective if rep.objective > 0 else 0.0
    seconds = time.perf_counter() - t0
    return dag, seconds, objective, relerr


def run_bench(spec, out_path=None):
    """Run all (size, trial) cells; returns (data_rows, summary_rows).

    Failures are recorded per-trial with a status message and the sweep
    continues.
    """
    rows = []
    for size in spec.sizes:
        for trial in range(spec.trials):
            n_label = size * size if spec.family == "grid2d" else size
            try:
                dag, seconds, objective, relerr = run_trial(spec, size, trial)
                rows.append([spec.family, dag.n, dag.m, spec.sigma, trial, spec.mode,
                             f"{seconds:.6f}", f"{objective:.10g}",
                             f"{relerr:.3e}" if relerr != "" else "", "ok"])
            except Exception as exc:  # per-trial isolation
                rows.append([spec.family, n_label, "", spec.sigma, trial, spec.mode,
                             "", "", "", f"error:{type(exc).__name__}"])
    summary = _summarize(rows)
    if out_path is not None:
        write_csv(out_path, rows, summary)
    return rows, summary


def _summarize(rows):
    groups = {}
    for r in rows:
        key = (r[0], r[1], r[3], r[5])
        groups.setdefault(key, []).append(r)
    out = []
    for (family, n, sigma, mode), rs in groups.items():
        ok = [r for r in rs if r[-1] == "ok"]
        secs = np.array([float(r[6]) for r in ok]) if ok else np.array([math.nan])
        rel = np.array([float(r[8]) for r in ok if r[8] != ""])
        out.append([family, n, sigma, mode,
                    f"{secs.mean():.6f}", f"{secs.std():.6f}",
                    f"{rel.mean():.3e}" if rel.size else "",
                    f"{rel.max():.3e}" if rel.size else "",
                    f"{len(ok)}/{len(rs)}"])
    return out


def write_csv(path, rows, summary):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATA_HEADER)
        writer.writerows(rows)
        fh.write("# summary\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(summary)
