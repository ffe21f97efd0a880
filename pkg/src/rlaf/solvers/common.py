"""Types shared by both guided solvers."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..cnf import CnfFormula

SAT = "SAT"
UNSAT = "UNSAT"

# unguided solvers assign True first; keeps the zero-init policy mode
# (rho = 0 -> polarity 1) identical to the baseline run
DEFAULT_POLARITY = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Parameterization:
    """Per-variable branching weight (> 0) and preferred polarity (0/1)."""

    weights: np.ndarray
    polarities: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        p = np.asarray(self.polarities).reshape(-1).astype(np.int8)
        if w.shape != p.shape:
            raise ConfigError(f"weights ({w.size}) and polarities ({p.size}) differ in length")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ConfigError("weights must be finite and strictly positive")
        if np.any((p != 0) & (p != 1)):
            raise ConfigError("polarities must be 0 or 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "polarities", p)

    @classmethod
    def uniform(cls, num_vars: int, weight: float = 1.0, polarity: int = DEFAULT_POLARITY):
        return cls(np.full(num_vars, weight), np.full(num_vars, polarity))

    def __len__(self) -> int:
        return self.weights.size

    def scaled(self, c: float) -> "Parameterization":
        return Parameterization(self.weights * c, self.polarities)

    def check_size(self, f: CnfFormula) -> None:
        if len(self) != f.num_vars:
            raise ConfigError(f"parameterization has {len(self)} entries, formula has {f.num_vars} variables")

    def to_text(self) -> str:
        return "".join(
            f"{v} {w!r} {int(p)}\n"
            for v, (w, p) in enumerate(zip(self.weights.tolist(), self.polarities.tolist()), start=1)
        )

    @classmethod
    def from_text(cls, text: str, num_vars: Optional[int] = None) -> "Parameterization":
        """Parse ``<var> <weight> <polarity>`` lines; blank and ``#``/``c`` lines are skipped."""
        rows = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line[0] in "#c":
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: expected '<var> <weight> <polarity>'")
            try:
                v, w, p = int(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"line {lineno}: unparsable entry {line!r}") from None
            if v < 1 or v in rows:
                raise ConfigError(f"line {lineno}: bad or repeated variable {v}")
            if not math.isfinite(w) or w <= 0:
                raise ConfigError(f"line {lineno}: weight must be positive, got {w}")
            if p not in (0, 1):
                raise ConfigError(f"line {lineno}: polarity must be 0 or 1")
            rows[v] = (w, p)
        n = num_vars if num_vars is not None else max(rows, default=0)
        if sorted(rows) != list(range(1, n + 1)):
            raise ConfigError(f"parameterization must list every variable 1..{n} exactly once")
        return cls(np.array([rows[v][0] for v in range(1, n + 1)]),
                   np.array([rows[v][1] for v in range(1, n + 1)]))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path, num_vars: Optional[int] = None) -> "Parameterization":
        with open(path) as fh:
            return cls.from_text(fh.read(), num_vars)


@dataclass
class SolverConfig:
    activity_decay: float = 0.95
    bump_increment: float = 1.0
    rescale_threshold: float = 1e100
    restart_unit: int = 1024        # Luby unit, in conflicts; 0 disables restarts
    budget: int = 0                 # max decisions, 0 = unlimited
    seed: int = 0                   # unused: no randomized decisions
    record_trace: bool = False
    record_learned: bool = False

    def __post_init__(self):
        if not 0.0 < self.activity_decay < 1.0:
            raise ConfigError("activity_decay must lie in (0, 1)")
        if not self.bump_increment > 0:
            raise ConfigError("bump_increment must be positive")
        if not self.rescale_threshold > 1:
            raise ConfigError("rescale_threshold must exceed 1")
        if self.restart_unit < 0 or self.budget < 0:
            raise ConfigError("restart_unit and budget must be non-negative")


@dataclass
class LookaheadConfig:
    preselect_fraction: float = 0.1
    mix: str = "product"            # "product" | "sum"

    def __post_init__(self):
        if not 0.0 < self.preselect_fraction <= 1.0:
            raise ConfigError("preselect_fraction must lie in (0, 1]")
        if self.mix not in ("product", "sum"):
            raise ConfigError(f"unknown mix {self.mix!r}")


@dataclass
class SolveReport:
    verdict: Optional[str]
    decisions: int
    conflicts: int
    propagations: int
    model: Optional[list[int]] = None
    budget_exhausted: bool = False
    elapsed: float = 0.0
    trace: Optional[list[int]] = None
    learned: Optional[list[list[int]]] = None
    failed_literals: Optional[list[tuple[tuple[int, ...], int]]] = None
    backend: str = ""

    @property
    def cost(self) -> int:
        return self.decisions

    def to_json(self) -> str:
        return json.dumps(self.summary())

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
            "budget_exhausted": self.budget_exhausted,
            "elapsed": self.elapsed,
        }


def normalized_weights(params: Parameterization) -> np.ndarray:
    """Divide by the largest weight.

    The branching argmax is invariant under positive scaling; dividing by
    the max keeps activities in a fixed range and maps any constant weight
    vector to exactly 1.0, so uniform guidance replays the baseline bit for
    bit.
    """
    w = params.weights
    return w / w.max() if w.size else w


def lit_code(lit: int) -> int:
    """DIMACS literal -> dense code 2*(v-1) + negated."""
    return 2 * (abs(lit) - 1) + (lit < 0)


def code_lit(code: int) -> int:
    v = (code >> 1) + 1
    return -v if code & 1 else v


def encode_clauses(f: CnfFormula) -> list[list[int]]:
    return [[lit_code(l) for l in c] for c in f.clauses]
