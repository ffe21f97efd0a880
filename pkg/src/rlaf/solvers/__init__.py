"""Weight/polarity-guided SAT solvers.

``cdcl``       conflict-driven clause learning with weighted EVSIDS
``lookahead``  DPLL with weighted pre-selection and look-ahead scoring
"""

from . import cdcl, lookahead
from ._backend import HAVE_EXT
from .common import (
    DEFAULT_POLARITY,
    SAT,
    UNSAT,
    ConfigError,
    LookaheadConfig,
    Parameterization,
    SolveReport,
    SolverConfig,
)

SOLVERS = ("cdcl", "lookahead")


def get_solver(name: str):
    """Return ``solve(f, params, cfg)`` for a solver name."""
    if name == "cdcl":
        return cdcl.solve
    if name == "lookahead":
        return lookahead.solve
    raise ValueError(f"unknown solver {name!r}; expected one of {SOLVERS}")


def run(name: str, f, params=None, cfg=None, backend: str = "auto") -> SolveReport:
    if params is None:
        params = Parameterization.uniform(f.num_vars)
    return get_solver(name)(f, params, cfg, backend=backend)


__all__ = [
    "cdcl", "lookahead", "HAVE_EXT", "DEFAULT_POLARITY", "SAT", "UNSAT", "ConfigError",
    "LookaheadConfig", "Parameterization", "SolveReport", "SolverConfig", "SOLVERS",
    "get_solver", "run",
]
