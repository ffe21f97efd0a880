"""Solver-in-the-loop GRPO training of the guidance policy.

One iteration: freeze the current network, sample M parameterizations for
each of N formulas, run the solver on all N*M pairs (worker pool), turn
decision counts into group-normalized advantages, then take S optimizer
steps on mini-batches of formulas maximizing the clipped surrogate minus a
KL penalty towards the frozen policy.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fgraph, neural, policy
from .cnf import CnfFormula, read_dimacs
from .policy import PolicyDist
from .solvers import Parameterization, SolverConfig, get_solver
from .solvers.common import SAT, UNSAT

log = logging.getLogger(__name__)


# ------------------------------------------------------------------ objective

def advantages(rewards: Sequence[float]) -> np.ndarray:
    """(r - mean) / std within one group, population std; zero when std == 0."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.size < 2:
        raise ValueError("advantages need a group of at least two rewards")
    std = r.std()
    if std == 0.0:
        return np.zeros_like(r)
    return (r - r.mean()) / std


def ppo_loss(new_logprobs, old_logprobs, adv, eps: float):
    """Clipped surrogate, averaged over the group.

    Returns (objective, d objective / d new_logprobs, clipped mask).  The
    gradient is zero for samples where the clipped branch is the minimum.
    """
    new = np.asarray(new_logprobs, dtype=np.float64)
    old = np.asarray(old_logprobs, dtype=np.float64)
    a = np.asarray(adv, dtype=np.float64)
    if not (new.shape == old.shape == a.shape):
        raise ValueError("ppo_loss inputs must have equal lengths")
    if not (np.all(np.isfinite(new)) and np.all(np.isfinite(old)) and np.all(np.isfinite(a))):
        raise ValueError("ppo_loss inputs must be finite")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    ratio = np.exp(new - old)
    unclipped = ratio * a
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * a
    obj = np.minimum(unclipped, clipped)
    # d(r*A)/d new = r*A; the clipped branch is constant outside the interval
    takes_clip = clipped < unclipped
    grad = np.where(takes_clip, 0.0, unclipped) / new.size
    return float(obj.mean()), grad, (ratio < 1.0 - eps) | (ratio > 1.0 + eps)


# --------------------------------------------------------------------- config

@dataclass
class TrainConfig:
    K: int = 150
    N: int = 32
    M: int = 16
    S: int = 10
    batch_size: int = 32
    clip_eps: float = 0.2
    kl_weight: float = 0.1
    lr: float = 3e-3
    warmup_iters: int = 5
    sigma_w: float = 0.1
    solver: str = "cdcl"
    budget: int = 0
    seed: int = 0
    d: int = 64
    L: int = 4
    workers: int = 1
    val_every: int = 10
    ckpt_every: int = 10
    kl_direction: str = "new_old"
    optimizer: str = "adam"
    weight_decay: float = 0.0
    train_dir: str = ""
    val_dir: str = ""
    out_dir: str = "run"

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be at least 2 (advantages need a group)")
        if not 1 <= self.batch_size <= self.N:
            raise ValueError("batch_size must lie in 1..N")
        if not 0.0 < self.clip_eps < 1.0:
            raise ValueError("clip_eps must lie in (0, 1)")
        if self.kl_weight < 0 or self.lr <= 0 or self.sigma_w <= 0:
            raise ValueError("kl_weight >= 0, lr > 0 and sigma_w > 0 required")
        if self.K < 0 or self.S < 0:
            raise ValueError("K and S must be non-negative")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            t = types[key]
            kw[key] = int(value) if t in ("int", int) else float(value) if t in ("float", float) else value
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "TrainConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())


# -------------------------------------------------------------- rollout pool

_CORPUS: list[CnfFormula] = []


def _init_worker(corpus):
    global _CORPUS
    _CORPUS = corpus
    # each worker is single-threaded; keep BLAS from oversubscribing
    os.environ.setdefault("OMP_NUM_THREADS", "1")


def _rollout(task):
    idx, weights, polarities, solver, budget = task
    f = _CORPUS[idx]
    rep = get_solver(solver)(f, Parameterization(weights, polarities), SolverConfig(budget=budget))
    return rep.decisions, rep.verdict, rep.budget_exhausted, rep.elapsed


class RolloutPool:
    """Runs solver calls; results come back in task order whatever the worker count."""

    def __init__(self, corpus: Sequence[CnfFormula], workers: int = 1):
        self.workers = max(1, int(workers))
        self.corpus = list(corpus)
        self._pool = None
        if self.workers > 1:
            ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
            self._pool = ctx.Pool(self.workers, initializer=_init_worker, initargs=(self.corpus,))

    def map(self, tasks):
        if self._pool is None:
            _init_worker(self.corpus)
            return [_rollout(t) for t in tasks]
        chunk = max(1, len(tasks) // (4 * self.workers))
        return self._pool.map(_rollout, tasks, chunksize=chunk)

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def default_workers() -> int:
    return int(os.environ.get("RLAF_WORKERS", "1"))


# -------------------------------------------------------------------- helpers

class PolicyDiverged(FloatingPointError):
    pass


# exp(mu) leaves the float64 range around |mu| = 709
MAX_ABS_MU = 700.0


def policy_for(params: neural.NetParams, graph: fgraph.FormulaGraph, sigma: float) -> PolicyDist:
    y, _ = neural.forward(params, graph, keep_cache=False)
    if not np.all(np.isfinite(y)) or np.any(np.abs(y[:, 0]) > MAX_ABS_MU):
        raise PolicyDiverged("network output out of range (training diverged; lower lr)")
    return PolicyDist.from_output(y, sigma)


def _rng(*key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


def warmup_lr(cfg: TrainConfig, k: int) -> float:
    """Linear ramp 0 -> lr across iterations 1..warmup_iters, then constant."""
    if cfg.warmup_iters <= 0:
        return cfg.lr
    return cfg.lr * min(1.0, k / cfg.warmup_iters)


@dataclass
class RolloutBatch:
    """Everything frozen at the start of an iteration for one formula."""

    index: int
    graph: fgraph.FormulaGraph
    old: PolicyDist
    weights: np.ndarray        # (M, n)
    polarities: np.ndarray     # (M, n)
    costs: np.ndarray          # (M,)
    advantages: np.ndarray     # (M,)
    old_logprobs: np.ndarray   # (M,)
    exhausted: int = 0
    skip: bool = False


# -------------------------------------------------------------------- trainer

class Trainer:
    def __init__(self, cfg: TrainConfig, train: Sequence[CnfFormula],
                 val: Sequence[CnfFormula] = (), params: Optional[neural.NetParams] = None,
                 pool: Optional[RolloutPool] = None):
        if len(train) < cfg.N:
            raise ValueError(f"training corpus has {len(train)} formulas, N={cfg.N}")
        self.cfg = cfg
        self.train = list(train)
        self.val = list(val)
        self.graphs = [fgraph.build(f) for f in self.train]
        self.val_graphs = [fgraph.build(f) for f in self.val]
        self.params = params or neural.NetParams.init(cfg.d, cfg.L, seed=cfg.seed)
        self.adam = neural.AdamState.zeros(self.params.flat.size)
        self.hyper = neural.OptimHyper(lr=cfg.lr, kind=cfg.optimizer, weight_decay=cfg.weight_decay)
        self.k = 0
        self.best_val = math.inf
        self.best_k = -1
        self.pool = pool or RolloutPool(self.train, cfg.workers)
        self._own_pool = pool is None

    def close(self):
        if self._own_pool:
            self.pool.close()

    # -- rollouts
    def collect(self, k: int, indices: Sequence[int]) -> list[RolloutBatch]:
        cfg = self.cfg
        batches, tasks = [], []
        for i, idx in enumerate(indices):
            g = self.graphs[idx]
            old = policy_for(self.params, g, cfg.sigma_w)
            ws, ps = [], []
            for j in range(cfg.M):
                w, p = policy.sample_arrays(old, 1, _rng(cfg.seed, k, i, j, 1))
                ws.append(w[0])
                ps.append(p[0])
            ws, ps = np.array(ws), np.array(ps)
            for j in range(cfg.M):
                tasks.append((idx, ws[j], ps[j], cfg.solver, cfg.budget))
            batches.append(RolloutBatch(idx, g, old, ws, ps, None, None,
                                        policy.log_prob(old, (ws, ps))))
        results = self.pool.map(tasks)
        for i, b in enumerate(batches):
            res = results[i * cfg.M:(i + 1) * cfg.M]
            costs = np.array([float(cfg.budget if ex else dec) for dec, _, ex, _ in res])
            b.exhausted = sum(ex for _, _, ex, _ in res)
            if b.exhausted:
                log.info("k=%d formula %d: %d/%d rollouts hit the decision budget",
                         k, b.index, b.exhausted, cfg.M)
            b.costs = costs
            if b.exhausted == cfg.M:
                log.warning("k=%d formula %d: every rollout exhausted the budget; skipped", k, b.index)
                b.skip = True
                b.advantages = np.zeros(cfg.M)
            else:
                b.advantages = advantages(-costs)
        return batches

    # -- objective on a mini-batch
    def objective_and_grad(self, batch: Sequence[RolloutBatch]):
        """Mean over formulas of L_ppo - beta*KL and its gradient (ascent direction)."""
        cfg = self.cfg
        g = fgraph.union([b.graph for b in batch])
        y, cache = neural.forward(self.params, g)
        dy = np.zeros_like(y)
        total = kl_sum = 0.0
        clipped = 0
        off = 0
        for b in batch:
            n = b.graph.num_vars
            new = PolicyDist.from_output(y[off:off + n], cfg.sigma_w)
            lp_new = policy.log_prob(new, (b.weights, b.polarities))
            obj, g_lp, clip_mask = ppo_loss(lp_new, b.old_logprobs, b.advantages, cfg.clip_eps)
            d_mu, d_rho = policy.log_prob_grad(new, b.weights, b.polarities)
            kl_val = policy.kl(new, b.old, cfg.kl_direction)
            k_mu, k_rho = policy.kl_grad(new, b.old, cfg.kl_direction)
            dy[off:off + n, 0] = g_lp @ d_mu - cfg.kl_weight * k_mu
            dy[off:off + n, 1] = g_lp @ d_rho - cfg.kl_weight * k_rho
            total += obj - cfg.kl_weight * kl_val
            kl_sum += kl_val
            clipped += int(clip_mask.sum())
            off += n
        dy /= len(batch)
        grad = neural.backward(self.params, g, cache, dy)
        return (total / len(batch), grad, kl_sum / len(batch),
                clipped / (len(batch) * cfg.M))

    # -- one GRPO iteration
    def train_iteration(self) -> dict:
        cfg = self.cfg
        k = self.k + 1
        t0 = time.perf_counter()
        indices = _rng(cfg.seed, k, 0).choice(len(self.train), size=cfg.N, replace=False)
        batches = self.collect(k, indices)
        t_roll = time.perf_counter() - t0

        live = [b for b in batches if not b.skip]
        lr = warmup_lr(cfg, k)
        objs, kls, clips, gnorms = [], [], [], []
        t1 = time.perf_counter()
        for s in range(cfg.S if live else 0):
            pick = _rng(cfg.seed, k, 2, s).choice(len(live), size=min(cfg.batch_size, len(live)),
                                                  replace=False)
            obj, grad, kl_val, clip_frac = self.objective_and_grad([live[i] for i in pick])
            gnorms.append(float(np.linalg.norm(grad.flat)))
            neural.optimizer_step(self.params, -grad.flat, self.adam, self.hyper, lr=lr)
            objs.append(obj)
            kls.append(kl_val)
            clips.append(clip_frac)
        t_opt = time.perf_counter() - t1
        self.k = k

        costs = np.concatenate([b.costs for b in batches])
        adv = np.concatenate([b.advantages for b in batches])
        metrics = {
            "k": k,
            "mean_cost": float(costs.mean()),
            "mean_abs_adv": float(np.abs(adv).mean()),
            "objective": objs[-1] if objs else None,
            "kl": kls[-1] if kls else 0.0,
            "clip_frac": float(np.mean(clips)) if clips else 0.0,
            "clip_frac_first": clips[0] if clips else 0.0,
            "grad_norm": float(np.mean(gnorms)) if gnorms else 0.0,
            "lr": lr,
            "exhausted": int(sum(b.exhausted for b in batches)),
            "skipped": int(sum(b.skip for b in batches)),
        }
        self.last_timing = {"k": k, "rollout_time": t_roll, "opt_time": t_opt}
        return metrics

    def validate(self) -> Optional[float]:
        if not self.val:
            return None
        res = evaluate(self.params, self.val, self.cfg.solver, sigma=self.cfg.sigma_w,
                       budget=self.cfg.budget, graphs=self.val_graphs, pool=None)
        return res["aggregate"]["mean_decisions"]

    # -- driver with checkpoints and metrics log
    def run(self, out_dir, resume: bool = True, iterations: Optional[int] = None) -> list[dict]:
        cfg = self.cfg
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ckpt = out / "checkpoint.npz"
        metrics_path = out / "metrics.jsonl"
        timing_path = out / "timings.jsonl"
        if resume and ckpt.exists():
            self.load(ckpt)
            _truncate_log(metrics_path, self.k)
            _truncate_log(timing_path, self.k)
            log.info("resumed at iteration %d", self.k)
        elif metrics_path.exists():
            metrics_path.unlink()
            if timing_path.exists():
                timing_path.unlink()
        history = []
        if self.k == 0:
            val = self.validate()
            rec = {"k": 0, "val_cost": val}
            if val is not None:
                self.best_val, self.best_k = val, 0
                self.save(out / "best.npz")
            _append(metrics_path, rec)
            history.append(rec)
            self.save(ckpt)
        end = cfg.K if iterations is None else min(cfg.K, self.k + iterations)
        while self.k < end:
            m = self.train_iteration()
            if cfg.val_every and (self.k % cfg.val_every == 0 or self.k == cfg.K):
                t = time.perf_counter()
                m["val_cost"] = self.validate()
                self.last_timing["val_time"] = time.perf_counter() - t
                if m["val_cost"] is not None and m["val_cost"] < self.best_val:
                    self.best_val, self.best_k = m["val_cost"], self.k
                    self.save(out / "best.npz")
            _append(metrics_path, m)
            _append(timing_path, self.last_timing)
            history.append(m)
            if cfg.ckpt_every and self.k % cfg.ckpt_every == 0:
                self.save(ckpt)
        self.save(ckpt)
        return history

    def save(self, path):
        neural.save_checkpoint(path, self.params, self.adam, self.k,
                               extra={"best_val": self.best_val, "best_k": self.best_k,
                                      "sigma_w": self.cfg.sigma_w})

    def load(self, path):
        params, adam, k, extra = neural.load_checkpoint(path)
        if (params.d, params.L) != (self.cfg.d, self.cfg.L):
            raise ValueError("checkpoint architecture does not match the config")
        self.params, self.adam, self.k = params, adam, k
        self.best_val = float(extra.get("best_val", math.inf))
        self.best_k = int(extra.get("best_k", -1))


def _append(path, rec):
    with open(path, "a") as fh:
        fh.write(json.dumps(rec) + "\n")


def _truncate_log(path, k):
    if not Path(path).exists():
        return
    keep = [l for l in Path(path).read_text().splitlines() if l and json.loads(l)["k"] <= k]
    Path(path).write_text("".join(l + "\n" for l in keep))


def load_corpus(directory) -> list[CnfFormula]:
    paths = sorted(Path(directory).glob("*.cnf"))
    if not paths:
        raise FileNotFoundError(f"no .cnf files in {directory}")
    return [read_dimacs(p) for p in paths]


# ----------------------------------------------------------------- evaluation

def evaluate(params: Optional[neural.NetParams], instances: Sequence[CnfFormula], solver: str = "cdcl",
             sigma: float = 0.1, baseline: bool = False, budget: int = 0,
             graphs=None, pool: Optional[RolloutPool] = None) -> dict:
    """Run every instance with the policy mode (or unit weights when ``baseline``)."""
    rows = []
    tasks = []
    for idx, f in enumerate(instances):
        if baseline or params is None:
            p = Parameterization.uniform(f.num_vars)
            net_time = 0.0
        else:
            t = time.perf_counter()
            g = graphs[idx] if graphs is not None else fgraph.build(f)
            p = policy.mode(policy_for(params, g, sigma))
            net_time = time.perf_counter() - t
        tasks.append((idx, p.weights, p.polarities, net_time))
    if pool is None:
        pool = RolloutPool(instances, 1)
    timed = pool.map([(i, w, p, solver, budget) for i, w, p, _ in tasks])
    for (idx, _, _, net_time), (dec, ver, ex, st) in zip(tasks, timed):
        rows.append({"instance": idx, "verdict": ver if not ex else "UNKNOWN", "decisions": dec,
                     "solver_time": st, "net_time": net_time, "total_time": st + net_time})
    return {"rows": rows, "aggregate": aggregate(rows)}


def aggregate(rows: Sequence[dict]) -> dict:
    def agg(rs):
        if not rs:
            return {"count": 0}
        return {
            "count": len(rs),
            "mean_decisions": float(np.mean([r["decisions"] for r in rs])),
            "mean_solver_time": float(np.mean([r["solver_time"] for r in rs])),
            "mean_net_time": float(np.mean([r["net_time"] for r in rs])),
            "mean_total_time": float(np.mean([r["total_time"] for r in rs])),
        }

    out = agg(rows)
    out["by_verdict"] = {v: agg([r for r in rows if r["verdict"] == v]) for v in (SAT, UNSAT, "UNKNOWN")
                         if any(r["verdict"] == v for r in rows)}
    return out


# ------------------------------------------------------- weight correlation

def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    # exact constancy check; std() of a constant array can round to a few ulps
    if a.size < 2 or np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


def correlate_dists(dists_a: Sequence[PolicyDist], dists_b: Sequence[PolicyDist], sample_size: int,
                    seed: int = 0, log_scale: bool = False):
    """Pearson r of E[w(x)] under two policies over randomly sampled variables.

    Returns (r, pairs) where pairs is a list of (instance, variable, Ea, Eb);
    r is NaN when either series is constant.
    """
    keys, ea, eb = [], [], []
    for i, (a, b) in enumerate(zip(dists_a, dists_b)):
        if len(a) != len(b):
            raise ValueError(f"instance {i}: policies disagree on the variable count")
        keys.extend((i, v + 1) for v in range(len(a)))
        ea.append(policy.expected_weight(a))
        eb.append(policy.expected_weight(b))
    ea = np.concatenate(ea) if ea else np.zeros(0)
    eb = np.concatenate(eb) if eb else np.zeros(0)
    if sample_size > ea.size:
        raise ValueError(f"sample_size {sample_size} exceeds the {ea.size} available variables")
    pick = np.sort(_rng(seed, 7).choice(ea.size, size=sample_size, replace=False))
    xa, xb = ea[pick], eb[pick]
    r = pearson(np.log(xa), np.log(xb)) if log_scale else pearson(xa, xb)
    pairs = [(keys[p][0], keys[p][1], float(xa[t]), float(xb[t])) for t, p in enumerate(pick)]
    return r, pairs


def weight_correlation(params_a: neural.NetParams, params_b: neural.NetParams,
                       instances: Sequence[CnfFormula], sample_size: int, sigma: float = 0.1,
                       seed: int = 0, log_scale: bool = False):
    graphs = [fgraph.build(f) for f in instances]
    da = [policy_for(params_a, g, sigma) for g in graphs]
    db = [policy_for(params_b, g, sigma) for g in graphs]
    return correlate_dists(da, db, sample_size, seed, log_scale)
