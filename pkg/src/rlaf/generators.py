"""Seeded instance generators (random 3-SAT, 3-colouring) and backbone labelling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cnf import CnfFormula

FAMILIES = ("random3sat", "threecol")

# critical-density fit for random 3-SAT: m = 4.258 n + 58.26 n^(-2/3)
_3SAT_SLOPE = 4.258
_3SAT_CORR = 58.26
COL_MEAN_DEGREE = 4.67


@dataclass(frozen=True)
class GenSpec:
    family: str
    size_n: int
    seed: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def filename(self) -> str:
        return f"{self.family}_n{self.size_n}_seed{self.seed}.cnf"

    def generate(self) -> CnfFormula:
        if self.family == "random3sat":
            return gen_3sat(self.size_n, self.seed)
        return gen_3col(self.size_n, self.seed)


def num_3sat_clauses(n: int) -> int:
    # floor, not ceil: matches the published dataset sizes (853 at n=200, ...)
    return math.floor(_3SAT_SLOPE * n + _3SAT_CORR * n ** (-2.0 / 3.0))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def gen_3sat(n: int, seed: int) -> CnfFormula:
    """Uniform random 3-SAT at the critical clause density."""
    if n < 3:
        raise ValueError("3-SAT needs n >= 3")
    rng = _rng(seed)
    m = num_3sat_clauses(n)
    clauses = []
    for _ in range(m):
        vs = rng.choice(n, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3)
        clauses.append([int(v) if s else -int(v) for v, s in zip(vs, signs)])
    return CnfFormula(n, clauses)


def sample_er_graph(n: int, seed: int, mean_degree: float = COL_MEAN_DEGREE) -> list[tuple[int, int]]:
    """Erdos-Renyi G(n, p) with p = mean_degree / (n - 1). Vertices are 0-based."""
    rng = _rng(seed)
    p = mean_degree / (n - 1)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return [(int(u), int(v)) for u, v in zip(iu[keep], ju[keep])]


def color_var(v: int, c: int) -> int:
    """DIMACS variable for 'vertex v has colour c' (0-based v, c in 0..2)."""
    return 3 * v + c + 1


def encode_3col(n: int, edges: Sequence[tuple[int, int]]) -> CnfFormula:
    clauses = []
    for v in range(n):
        x = [color_var(v, c) for c in range(3)]
        clauses.append(x)
        clauses.append([-x[0], -x[1]])
        clauses.append([-x[0], -x[2]])
        clauses.append([-x[1], -x[2]])
    for u, v in edges:
        for c in range(3):
            clauses.append([-color_var(u, c), -color_var(v, c)])
    return CnfFormula(3 * n, clauses)


def gen_3col(n: int, seed: int) -> CnfFormula:
    """3-colourability of a random graph with expected degree 4.67."""
    if n < 4:
        raise ValueError("3-COL needs n >= 4")
    return encode_3col(n, sample_er_graph(n, seed))


class BackboneUndefined(ValueError):
    pass


def backbone(f: CnfFormula, solve: Callable[[CnfFormula], "object"]) -> set[int]:
    """Literals true in every model of ``f``.

    ``solve`` is any complete solver returning an object with ``verdict``
    and ``model`` (``model[v-1]`` is the value of variable v).  One extra
    solver call per literal of the first model found.
    """
    first = solve(f)
    if first.verdict != "SAT":
        raise BackboneUndefined("backbone undefined: formula is unsatisfiable")
    model = first.model
    out = set()
    for v in range(1, f.num_vars + 1):
        lit = v if model[v - 1] else -v
        if solve(f.with_clauses([[-lit]])).verdict == "UNSAT":
            out.add(lit)
    return out
