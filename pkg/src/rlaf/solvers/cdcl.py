"""Guided CDCL solver: weighted EVSIDS branching plus external initial phases."""

from __future__ import annotations

import time
from typing import Optional

from ..cnf import CnfFormula
from ._backend import cdcl_kernel
from .common import (
    SAT,
    UNSAT,
    Parameterization,
    SolveReport,
    SolverConfig,
    code_lit,
    encode_clauses,
    normalized_weights,
)


def solve(f: CnfFormula, params: Parameterization, cfg: Optional[SolverConfig] = None,
          backend: str = "auto") -> SolveReport:
    """Solve ``f`` branching on argmax of weight-scaled activity.

    Activities are bumped by ``w(x) * inc`` on every learned-clause variable,
    so the activity of ``x`` already carries the factor ``w(x)``.  Polarity
    ``p(x)`` seeds the saved phase; phase saving may overwrite it later.
    """
    cfg = cfg or SolverConfig()
    params.check_size(f)
    kernel, name = cdcl_kernel(backend)
    t0 = time.perf_counter()
    status, dec, confl, props, model, trace, learned = kernel(
        f.num_vars,
        encode_clauses(f),
        normalized_weights(params).tolist(),
        params.polarities.tolist(),
        cfg.activity_decay,
        cfg.bump_increment,
        cfg.rescale_threshold,
        cfg.restart_unit,
        cfg.budget,
        cfg.record_trace,
        cfg.record_learned,
    )
    elapsed = time.perf_counter() - t0
    verdict = {1: SAT, 0: UNSAT, -1: None}[status]
    return SolveReport(
        verdict=verdict,
        decisions=dec,
        conflicts=confl,
        propagations=props,
        model=model,
        budget_exhausted=status == -1,
        elapsed=elapsed,
        trace=[code_lit(c) for c in trace] if trace is not None else None,
        learned=[[code_lit(c) for c in cl] for cl in learned] if learned is not None else None,
        backend=name,
    )


def solve_baseline(f: CnfFormula, cfg: Optional[SolverConfig] = None, backend: str = "auto") -> SolveReport:
    """Unguided run: unit weights, default polarity."""
    return solve(f, Parameterization.uniform(f.num_vars), cfg, backend)
