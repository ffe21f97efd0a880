"""Supervised backbone-prediction baseline.

The same network is trained as a literal classifier: the logit of literal
``l`` is the first output of ``Dec([h(l), h(~l)])``.  Predicted backbone
probabilities turn into guidance through

    w(x) = 1 + alpha * (p(x) + p(~x)) / 2,    p(x) = 0 iff p(~x) > p(x).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fgraph, neural
from .cnf import CnfFormula
from .generators import backbone
from .policy import log_sigmoid, sigmoid
from .solvers import Parameterization, SolverConfig, get_solver

log = logging.getLogger(__name__)

ALPHA_GRID = tuple(10.0 ** e for e in range(-4, 5))


@dataclass
class LabeledInstance:
    formula: CnfFormula
    labels: np.ndarray          # (2n,) in literal-vertex order, 1 = literal in the backbone
    name: str = ""

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if y.size != 2 * self.formula.num_vars:
            raise ValueError(f"expected {2 * self.formula.num_vars} literal labels, got {y.size}")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 or 1")
        if np.any(y[0::2] + y[1::2] > 1):
            raise ValueError("a variable and its negation cannot both be backbone literals")
        self.labels = y


def labels_from_backbone(f: CnfFormula, lits: Sequence[int]) -> np.ndarray:
    y = np.zeros(2 * f.num_vars)
    for lit in lits:
        y[fgraph.literal_vertex(lit)] = 1.0
    return y


def label_instance(f: CnfFormula, solver: str = "cdcl", name: str = "") -> Optional[LabeledInstance]:
    """Backbone labels by repeated solving; None for an unsatisfiable formula."""
    solve = get_solver(solver)
    if solve(f, Parameterization.uniform(f.num_vars)).verdict != "SAT":
        return None
    bb = backbone(f, lambda g: solve(g, Parameterization.uniform(g.num_vars)))
    return LabeledInstance(f, labels_from_backbone(f, bb), name)


def write_labels(path, records: Sequence[tuple[str, Sequence[int]]]) -> None:
    """JSON lines ``{"instance": path, "backbone": [lits]}``."""
    with open(path, "w") as fh:
        for inst, lits in records:
            fh.write(json.dumps({"instance": str(inst), "backbone": [int(l) for l in lits]}) + "\n")


def read_labels(path) -> list[tuple[str, list[int]]]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append((rec["instance"], list(rec["backbone"])))
    return out


# ---------------------------------------------------------------- model

def literal_logits(params: neural.NetParams, g: fgraph.FormulaGraph, keep_cache: bool = True):
    """(2n,) logits and a cache for ``literal_logits_backward``."""
    h, cache = neural.encode(params, g, keep_cache)
    x = np.concatenate([h, h[g.pair]], axis=1)
    out, dec_cache = neural._mlp_forward(params, "dec", x)
    return out[:, 0], (cache, dec_cache)


def literal_logits_backward(params, g, caches, dlogits) -> neural.NetParams:
    cache, dec_cache = caches
    d = params.d
    grad = params.zeros_like()
    dout = np.zeros((g.num_literals, 2))
    dout[:, 0] = dlogits
    dx = neural._mlp_backward(params, grad, "dec", dec_cache, dout)
    dh = dx[:, :d] + dx[g.pair, d:]
    neural.encode_backward(params, g, cache, dh, grad)
    return grad


def bce(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy on logits."""
    return float(-np.mean(labels * log_sigmoid(logits) + (1 - labels) * log_sigmoid(-logits)))


def predict_backbone(params: neural.NetParams, f: CnfFormula) -> np.ndarray:
    z, _ = literal_logits(params, fgraph.build(f), keep_cache=False)
    return sigmoid(z)


def train_supervised(instances: Sequence[LabeledInstance], d: int = 64, L: int = 4, epochs: int = 50,
                     lr: float = 1e-4, weight_decay: float = 0.1, batch_size: int = 50, seed: int = 0,
                     params: Optional[neural.NetParams] = None, history: Optional[list] = None
                     ) -> neural.NetParams:
    """Minimize mean literal cross-entropy with Adam; returns the trained parameters.

    ``history``, when given, receives the mean training loss before each epoch
    and once more at the end.
    """
    if not instances:
        raise ValueError("empty training set")
    params = params or neural.NetParams.init(d, L, seed=seed)
    state = neural.AdamState.zeros(params.flat.size)
    hyper = neural.OptimHyper(lr=lr, weight_decay=weight_decay)
    graphs = [fgraph.build(x.formula) for x in instances]
    rng = np.random.default_rng(seed)
    for epoch in range(epochs):
        order = rng.permutation(len(instances))
        losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            g = fgraph.union([graphs[i] for i in idx])
            y = np.concatenate([instances[i].labels for i in idx])
            z, caches = literal_logits(params, g)
            losses.append(bce(z, y) * y.size)
            grad = literal_logits_backward(params, g, caches, (sigmoid(z) - y) / y.size)
            neural.optimizer_step(params, grad, state, hyper)
        if history is not None:
            history.append(sum(losses) / sum(x.labels.size for x in instances))
        log.debug("epoch %d loss %.5f", epoch, sum(losses) / sum(x.labels.size for x in instances))
    if history is not None:
        history.append(dataset_loss(params, instances, graphs))
    return params


def dataset_loss(params, instances, graphs=None) -> float:
    total = count = 0.0
    for k, x in enumerate(instances):
        g = graphs[k] if graphs is not None else fgraph.build(x.formula)
        z, _ = literal_logits(params, g, keep_cache=False)
        total += bce(z, x.labels) * x.labels.size
        count += x.labels.size
    return total / count


# -------------------------------------------------------------- guidance

def guide_from_backbone(probs, alpha: float) -> Parameterization:
    """Per-literal probabilities (literal-vertex order) -> weights and polarities."""
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError("alpha must be a finite non-negative number")
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    if p.size % 2 or np.any((p < 0) | (p > 1)):
        raise ValueError("expected an even number of probabilities in [0, 1]")
    pos, neg = p[0::2], p[1::2]
    w = 1.0 + alpha * 0.5 * (pos + neg)
    return Parameterization(w, (neg <= pos).astype(np.int8))


def tune_alpha(params: neural.NetParams, instances: Sequence[CnfFormula], solver: str = "cdcl",
               grid: Sequence[float] = ALPHA_GRID, budget: int = 0):
    """Grid value with the lowest mean decisions (first one on ties) and the full table."""
    if not grid:
        raise ValueError("empty alpha grid")
    solve = get_solver(solver)
    probs = [predict_backbone(params, f) for f in instances]
    table = []
    for alpha in grid:
        costs = [solve(f, guide_from_backbone(p, alpha), SolverConfig(budget=budget)).decisions
                 for f, p in zip(instances, probs)]
        table.append((float(alpha), float(np.mean(costs)) if costs else 0.0))
    best = min(range(len(table)), key=lambda k: table[k][1])
    return table[best][0], table
