"""Guided look-ahead DPLL solver.

Each node runs unit propagation and pure-literal elimination, pre-selects
the top ``preselect_fraction`` of free variables by ``w(x) * occurrences in
clauses of length <= 3``, looks ahead on both polarities of every
candidate (failed literals are forced to the opposite value), and branches
on the argmax of ``w(x) * mix(n+, n-)``, where ``n+``/``n-`` count the new
binary clauses each polarity creates.  The ``p(x)`` branch is explored
first.
"""

from __future__ import annotations

import time
from typing import Optional

from ..cnf import CnfFormula
from ._backend import lookahead_kernel
from .common import (
    SAT,
    UNSAT,
    LookaheadConfig,
    Parameterization,
    SolveReport,
    SolverConfig,
    code_lit,
    encode_clauses,
    normalized_weights,
)


def mix(n_pos: int, n_neg: int, kind: str = "product") -> int:
    if kind == "product":
        return n_pos * n_neg * 1024 + n_pos + n_neg
    return n_pos + n_neg


def solve(f: CnfFormula, params: Parameterization, cfg: Optional[SolverConfig] = None,
          lcfg: Optional[LookaheadConfig] = None, backend: str = "auto") -> SolveReport:
    cfg = cfg or SolverConfig()
    lcfg = lcfg or LookaheadConfig()
    params.check_size(f)
    kernel, name = lookahead_kernel(backend)
    t0 = time.perf_counter()
    status, dec, confl, props, model, trace, failed = kernel(
        f.num_vars,
        encode_clauses(f),
        normalized_weights(params).tolist(),
        params.polarities.tolist(),
        lcfg.preselect_fraction,
        lcfg.mix == "product",
        cfg.budget,
        cfg.record_trace,
    )
    elapsed = time.perf_counter() - t0
    return SolveReport(
        verdict={1: SAT, 0: UNSAT, -1: None}[status],
        decisions=dec,
        conflicts=confl,
        propagations=props,
        model=model,
        budget_exhausted=status == -1,
        elapsed=elapsed,
        trace=[code_lit(c) for c in trace] if trace is not None else None,
        failed_literals=(
            [(tuple(code_lit(c) for c in prefix), code_lit(lit)) for prefix, lit in failed]
            if failed is not None else None
        ),
        backend=name,
    )


def solve_baseline(f: CnfFormula, cfg: Optional[SolverConfig] = None,
                   lcfg: Optional[LookaheadConfig] = None, backend: str = "auto") -> SolveReport:
    return solve(f, Parameterization.uniform(f.num_vars), cfg, lcfg, backend)
