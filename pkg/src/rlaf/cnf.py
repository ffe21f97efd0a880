"""CNF formulas, DIMACS I/O and assignment evaluation."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class DimacsError(ValueError):
    """Malformed DIMACS input."""


class Verdict(str, enum.Enum):
    SATISFIED = "satisfied"
    FALSIFIED = "falsified"
    UNDETERMINED = "undetermined"


def normalize_clause(clause: Iterable[int]) -> tuple[int, ...]:
    """Drop repeated literals, keep first-occurrence order. Tautologies stay."""
    seen = set()
    out = []
    for lit in clause:
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = field(default=())

    def __init__(self, num_vars: int, clauses: Iterable[Iterable[int]] = ()):
        if num_vars < 0:
            raise ValueError(f"num_vars must be non-negative, got {num_vars}")
        norm = []
        for k, clause in enumerate(clauses):
            c = normalize_clause(int(lit) for lit in clause)
            if not c:
                raise ValueError(f"clause {k} is empty")
            for lit in c:
                if lit == 0 or abs(lit) > num_vars:
                    raise ValueError(f"literal out of range: {lit} (num_vars={num_vars})")
            norm.append(c)
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "clauses", tuple(norm))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def occurring_vars(self) -> set[int]:
        return {abs(lit) for c in self.clauses for lit in c}

    def with_clauses(self, extra: Iterable[Iterable[int]]) -> "CnfFormula":
        return CnfFormula(self.num_vars, list(self.clauses) + [list(c) for c in extra])

    def to_dimacs(self) -> str:
        return write_dimacs(self).decode()


def parse_dimacs(text: bytes | str) -> CnfFormula:
    """Parse DIMACS CNF. Errors name the offending line."""
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="strict")
    header = None
    num_vars = num_clauses = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    done = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            header = lineno
            continue
        if line.startswith("%"):
            # legacy footer used by some random-3SAT corpora: "%\n0\n"
            done = True
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause data before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from None
            if done:
                if lit != 0:
                    raise DimacsError(f"line {lineno}: data after '%' footer")
                continue
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise DimacsError(f"line {lineno}: literal out of range: {lit}")
                current.append(lit)

    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        # tolerate a missing final terminator
        clauses.append(current)
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"clause count mismatch: header says {num_clauses}, found {len(clauses)}"
        )
    return CnfFormula(num_vars, clauses)


def write_dimacs(f: CnfFormula) -> bytes:
    buf = io.StringIO()
    buf.write(f"p cnf {f.num_vars} {f.num_clauses}\n")
    for c in f.clauses:
        buf.write(" ".join(map(str, c)))
        buf.write(" 0\n")
    return buf.getvalue().encode("ascii")


def read_dimacs(path) -> CnfFormula:
    with open(path, "rb") as fh:
        return parse_dimacs(fh.read())


def save_dimacs(f: CnfFormula, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_dimacs(f))


def evaluate(f: CnfFormula, assignment: Mapping[int, int] | Sequence[int]) -> Verdict:
    """Three-valued evaluation under a (possibly partial) assignment.

    ``assignment`` maps variable -> 0/1.  A sequence is read as a total
    assignment indexed from variable 1.
    """
    if not isinstance(assignment, Mapping):
        assignment = {v: int(b) for v, b in enumerate(assignment, start=1)}
    for v in assignment:
        if not 1 <= v <= f.num_vars:
            raise ValueError(f"assignment references variable {v} outside 1..{f.num_vars}")

    undetermined = False
    for c in f.clauses:
        sat = False
        open_lit = False
        for lit in c:
            val = assignment.get(abs(lit))
            if val is None:
                open_lit = True
            elif (val == 1) == (lit > 0):
                sat = True
                break
        if not sat:
            if not open_lit:
                return Verdict.FALSIFIED
            undetermined = True
    return Verdict.UNDETERMINED if undetermined else Verdict.SATISFIED
