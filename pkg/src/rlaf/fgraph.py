"""Literal-clause graph of a CNF formula.

Vertex layout: literals first, ``x_v -> 2*(v-1)`` and ``not x_v -> 2*(v-1)+1``
(so the opposite literal of ``l`` is ``l ^ 1``), then clauses in input order
at ``2n + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .cnf import CnfFormula


@dataclass(frozen=True, eq=False)
class FormulaGraph:
    num_vars: int
    num_clauses: int
    clause_offsets: np.ndarray   # (m+1,) CSR offsets into clause_lits
    clause_lits: np.ndarray      # literal vertex ids per clause
    lit_offsets: np.ndarray      # (2n+1,) CSR offsets into lit_clauses
    lit_clauses: np.ndarray      # clause ids per literal

    @property
    def num_literals(self) -> int:
        return 2 * self.num_vars

    @property
    def num_vertices(self) -> int:
        return 2 * self.num_vars + self.num_clauses

    @property
    def pair(self) -> np.ndarray:
        return np.arange(self.num_literals) ^ 1

    def clause_neighbors(self, j: int) -> np.ndarray:
        return self.clause_lits[self.clause_offsets[j]:self.clause_offsets[j + 1]]

    def literal_neighbors(self, l: int) -> np.ndarray:
        return self.lit_clauses[self.lit_offsets[l]:self.lit_offsets[l + 1]]

    @cached_property
    def clause_degree(self) -> np.ndarray:
        return np.diff(self.clause_offsets)

    @cached_property
    def literal_degree(self) -> np.ndarray:
        # clause edges plus the pairing edge
        return np.diff(self.lit_offsets) + 1

    @cached_property
    def degree(self) -> np.ndarray:
        return np.concatenate([self.literal_degree, self.clause_degree])

    @property
    def num_pair_edges(self) -> int:
        return self.num_vars

    @cached_property
    def clause_mean(self) -> sp.csr_matrix:
        """(m, 2n) row-stochastic matrix: mean over each clause's literals."""
        deg = self.clause_degree
        data = np.repeat(1.0 / np.maximum(deg, 1), deg)
        return sp.csr_matrix((data, self.clause_lits, self.clause_offsets),
                             shape=(self.num_clauses, self.num_literals))

    @cached_property
    def literal_mean(self) -> sp.csr_matrix:
        """(2n, m) mean over the clauses containing each literal (zero row if none)."""
        occ = np.diff(self.lit_offsets)
        data = np.repeat(1.0 / np.maximum(occ, 1), occ)
        return sp.csr_matrix((data, self.lit_clauses, self.lit_offsets),
                             shape=(self.num_literals, self.num_clauses))

    @cached_property
    def clause_mean_T(self) -> sp.csr_matrix:
        return self.clause_mean.T.tocsr()

    @cached_property
    def literal_mean_T(self) -> sp.csr_matrix:
        return self.literal_mean.T.tocsr()


def literal_vertex(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (lit < 0)


def build(f: CnfFormula) -> FormulaGraph:
    n, m = f.num_vars, f.num_clauses
    lengths = np.fromiter((len(c) for c in f.clauses), dtype=np.int64, count=m)
    clause_offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(lengths, out=clause_offsets[1:])
    clause_lits = np.fromiter((literal_vertex(l) for c in f.clauses for l in c),
                              dtype=np.int64, count=int(clause_offsets[-1]))
    clause_ids = np.repeat(np.arange(m, dtype=np.int64), lengths)
    # stable sort keeps clause order within each literal's list
    order = np.argsort(clause_lits, kind="stable")
    lit_clauses = clause_ids[order]
    counts = np.bincount(clause_lits, minlength=2 * n)
    lit_offsets = np.zeros(2 * n + 1, dtype=np.int64)
    np.cumsum(counts, out=lit_offsets[1:])
    return FormulaGraph(n, m, clause_offsets, clause_lits, lit_offsets, lit_clauses)


def union(graphs: Sequence[FormulaGraph]) -> FormulaGraph:
    """Disjoint union; variable and clause blocks stay in input order."""
    lit_shift = clause_shift = 0
    co, cl, lo, lc = [np.zeros(1, dtype=np.int64)], [], [np.zeros(1, dtype=np.int64)], []
    nnz = 0
    for g in graphs:
        co.append(g.clause_offsets[1:] + nnz)
        cl.append(g.clause_lits + lit_shift)
        lo.append(g.lit_offsets[1:] + nnz)
        lc.append(g.lit_clauses + clause_shift)
        nnz += int(g.clause_offsets[-1])
        lit_shift += g.num_literals
        clause_shift += g.num_clauses
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int64)
    return FormulaGraph(lit_shift // 2, clause_shift, cat(co), cat(cl), cat(lo), cat(lc))
