"""Command-line entry point: ``rlaf {gen,solve,train,eval,analyze-weights,...}``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, grpo, neural, supervised
from .cnf import DimacsError, read_dimacs, save_dimacs
from .generators import GenSpec
from .solvers import SOLVERS, ConfigError, Parameterization, SolverConfig, get_solver

log = logging.getLogger("rlaf")

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 10, 20, 0, 1
FAMILY_ALIASES = {"3sat": "random3sat", "random3sat": "random3sat", "3col": "threecol", "threecol": "threecol"}


class CliError(Exception):
    pass


# --------------------------------------------------------------- manifest

def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def instances_digest(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).name.encode())
        h.update(file_digest(p).encode())
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, seed, instances=()) -> None:
    """One ``manifest.json`` per output directory; rewritten on reruns."""
    manifest = {
        "command": command,
        "config": {k: (str(v) if isinstance(v, Path) else v) for k, v in config.items()},
        "seed": seed,
        "instances": len(instances),
        "instances_digest": instances_digest(instances),
        "version": __version__,
        "started": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    Path(out_dir, "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _cnf_paths(directory) -> list[Path]:
    paths = sorted(Path(directory).glob("*.cnf"))
    if not paths:
        raise CliError(f"no .cnf files in {directory}")
    return paths


def _arg_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# --------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    family = FAMILY_ALIASES.get(args.family)
    if family is None:
        raise CliError(f"unknown family {args.family!r}")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create {out}: {e}") from None
    if args.balance and args.count % 2:
        raise CliError("--balance needs an even --count")
    solve = get_solver(args.solver)
    rows, want = [], {"SAT": args.count // 2, "UNSAT": args.count // 2}
    seed = args.seed
    while len(rows) < args.count:
        spec = GenSpec(family, args.n, seed)
        seed += 1
        f = spec.generate()
        verdict = None
        if args.balance:
            verdict = solve(f, Parameterization.uniform(f.num_vars)).verdict
            if want[verdict] == 0:
                continue
            want[verdict] -= 1
        path = out / spec.filename
        save_dimacs(f, path)
        rows.append({"path": path.name, "verdict": verdict, "n": f.num_vars, "m": f.num_clauses})
        if args.balance and seed - args.seed > 100 * args.count:
            raise CliError("balancing did not converge; is the family heavily skewed?")
    with open(out / "index.jsonl", "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")
    write_manifest(out, "gen", _arg_dict(args), args.seed, [out / r["path"] for r in rows])
    print(json.dumps({"written": len(rows), "out": str(out)}))
    return 0


def cmd_solve(args) -> int:
    try:
        f = read_dimacs(args.instance)
    except (OSError, DimacsError) as e:
        raise CliError(str(e)) from None
    try:
        params = (Parameterization.load(args.params, f.num_vars) if args.params
                  else Parameterization.uniform(f.num_vars))
        params.check_size(f)
    except (OSError, ConfigError) as e:
        raise CliError(f"bad params file: {e}") from None
    rep = get_solver(args.solver)(f, params, SolverConfig(budget=args.budget))
    out = rep.summary()
    if args.model and rep.model is not None:
        out["model"] = [v if b else -v for v, b in enumerate(rep.model, start=1)]
    print(json.dumps(out))
    return {"SAT": EXIT_SAT, "UNSAT": EXIT_UNSAT}.get(rep.verdict, EXIT_UNKNOWN)


def _train_config(args) -> grpo.TrainConfig:
    try:
        cfg = grpo.TrainConfig.load(args.config)
    except (OSError, ValueError) as e:
        raise CliError(f"bad config: {e}") from None
    overrides = {k: v for k, v in (("workers", args.workers), ("seed", args.seed), ("out_dir", args.out))
                 if v is not None}
    return grpo.TrainConfig(**{**vars(cfg), **overrides})


def cmd_train(args) -> int:
    cfg = _train_config(args)
    base = Path(args.config).parent
    resolve = lambda p: p if Path(p).is_absolute() else base / p
    if not cfg.train_dir:
        raise CliError("config needs train_dir")
    train_paths = _cnf_paths(resolve(cfg.train_dir))
    val_paths = _cnf_paths(resolve(cfg.val_dir)) if cfg.val_dir else []
    if len(train_paths) < cfg.N:
        raise CliError(f"train_dir has {len(train_paths)} instances but N={cfg.N}")
    out = Path(cfg.out_dir if args.out else resolve(cfg.out_dir))
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "train", vars(cfg), cfg.seed, train_paths + val_paths)
    (out / "config.txt").write_text(cfg.to_text())
    trainer = grpo.Trainer(cfg, [read_dimacs(p) for p in train_paths], [read_dimacs(p) for p in val_paths])
    try:
        trainer.run(out, resume=not args.fresh, iterations=args.iterations)
    finally:
        trainer.close()
    print(json.dumps({"iteration": trainer.k, "best_val": None if trainer.best_k < 0 else trainer.best_val,
                      "best_k": trainer.best_k, "out": str(out)}))
    return 0


def _load_params(path):
    try:
        params, _, _, extra = neural.load_checkpoint(path)
    except (OSError, KeyError, ValueError) as e:
        raise CliError(f"cannot load checkpoint {path}: {e}") from None
    sigma = float(extra["sigma_w"]) if "sigma_w" in extra else 0.1
    return params, sigma


def cmd_eval(args) -> int:
    paths = _cnf_paths(args.instances)
    instances = [read_dimacs(p) for p in paths]
    baseline = args.checkpoint == "baseline"
    params, sigma = (None, 0.1) if baseline else _load_params(args.checkpoint)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pool = grpo.RolloutPool(instances, args.workers)
    try:
        res = grpo.evaluate(params, instances, args.solver, sigma=sigma, baseline=baseline,
                            budget=args.budget, pool=pool)
    finally:
        pool.close()
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "verdict", "decisions", "solver_time", "net_time", "total_time"])
        for row in res["rows"]:
            w.writerow([paths[row["instance"]].name, row["verdict"], row["decisions"],
                        f"{row['solver_time']:.6f}", f"{row['net_time']:.6f}", f"{row['total_time']:.6f}"])
    (out / "aggregate.json").write_text(json.dumps(res["aggregate"], indent=2) + "\n")
    write_manifest(out, "eval", _arg_dict(args), None, paths)
    print(json.dumps(res["aggregate"]))
    return 0


def read_results(path) -> dict:
    with open(path, newline="") as fh:
        return {r["instance"]: r for r in csv.DictReader(fh)}


def cmd_compare(args) -> int:
    """Per-instance ratios of a guided run over a baseline run (< 1 means faster)."""
    base, guided = read_results(args.baseline), read_results(args.guided)
    common = sorted(set(base) & set(guided))
    if not common:
        raise CliError("the two result files share no instances")
    ratios = {}
    for metric in ("decisions", "total_time"):
        r = [float(guided[k][metric]) / float(base[k][metric]) for k in common if float(base[k][metric]) > 0]
        ratios[metric] = {"mean_ratio": float(np.mean(r)) if r else None,
                          "mean_base": float(np.mean([float(base[k][metric]) for k in common])),
                          "mean_guided": float(np.mean([float(guided[k][metric]) for k in common]))}
    print(json.dumps({"instances": len(common), **ratios}))
    return 0


def cmd_analyze_weights(args) -> int:
    pa, sa = _load_params(args.ckpt_a)
    pb, sb = _load_params(args.ckpt_b)
    if sa != sb:
        raise CliError("checkpoints were trained with different sigma_w")
    paths = _cnf_paths(args.instances)
    instances = [read_dimacs(p) for p in paths]
    try:
        r, pairs = grpo.weight_correlation(pa, pb, instances, args.sample_size, sigma=sa, seed=args.seed)
    except ValueError as e:
        raise CliError(str(e)) from None
    labels = {}
    if args.labels:
        for inst, lits in supervised.read_labels(args.labels):
            labels[Path(inst).name] = {abs(l) for l in lits}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scatter.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "variable", "ew_a", "ew_b"] + (["backbone"] if labels else []))
        for i, v, ea, eb in pairs:
            row = [paths[i].name, v, repr(ea), repr(eb)]
            if labels:
                row.append(int(v in labels.get(paths[i].name, ())))
            w.writerow(row)
    degenerate = bool(np.isnan(r))
    summary = {"r": None if degenerate else r, "degenerate": degenerate, "sample_size": args.sample_size}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    write_manifest(out, "analyze-weights", _arg_dict(args), args.seed, paths)
    print(json.dumps(summary))
    return 0


def cmd_label(args) -> int:
    paths = _cnf_paths(args.instances)
    records = []
    for p in paths:
        x = supervised.label_instance(read_dimacs(p), args.solver)
        if x is not None:
            lits = [(v + 1) * (1 if b == 0 else -1) for v in range(x.formula.num_vars)
                    for b in (0, 1) if x.labels[2 * v + b]]
            records.append((str(p.resolve()), lits))
    supervised.write_labels(args.out, records)
    print(json.dumps({"labeled": len(records), "skipped_unsat": len(paths) - len(records)}))
    return 0


def _labeled(path) -> list[supervised.LabeledInstance]:
    out = []
    for inst, lits in supervised.read_labels(path):
        f = read_dimacs(inst)
        out.append(supervised.LabeledInstance(f, supervised.labels_from_backbone(f, lits), inst))
    return out


def cmd_train_supervised(args) -> int:
    data = _labeled(args.labels)
    if not data:
        raise CliError("label file is empty")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    history = []
    params = supervised.train_supervised(data, d=args.d, L=args.L, epochs=args.epochs, lr=args.lr,
                                         weight_decay=args.weight_decay, batch_size=args.batch_size,
                                         seed=args.seed, history=history)
    neural.save_checkpoint(out / "checkpoint.npz", params, iteration=args.epochs)
    with open(out / "metrics.jsonl", "w") as fh:
        for epoch, loss in enumerate(history):
            fh.write(json.dumps({"epoch": epoch, "loss": loss}) + "\n")
    write_manifest(out, "train-supervised", _arg_dict(args), args.seed, [x.name for x in data])
    print(json.dumps({"final_loss": history[-1]}))
    return 0


def cmd_tune_alpha(args) -> int:
    params, _ = _load_params(args.checkpoint)
    instances = [read_dimacs(p) for p in _cnf_paths(args.instances)]
    grid = [float(a) for a in args.grid.split(",")] if args.grid else supervised.ALPHA_GRID
    best, table = supervised.tune_alpha(params, instances, args.solver, grid, budget=args.budget)
    print(json.dumps({"alpha": best, "table": table}))
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    default_workers = grpo.default_workers()
    ap = argparse.ArgumentParser(prog="rlaf", description="Guided SAT solving with learned branching weights.")
    ap.add_argument("--version", action="version", version=f"rlaf {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def solver_opts(p, budget=True):
        p.add_argument("--solver", choices=SOLVERS, default="cdcl")
        if budget:
            p.add_argument("--budget", type=int, default=0, help="max decisions per run, 0 = unlimited")

    p = sub.add_parser("gen", help="generate a seeded instance corpus")
    p.add_argument("family", help="3sat or 3col")
    p.add_argument("-n", type=int, required=True, help="variables (3sat) or graph vertices (3col)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--balance", action="store_true", help="keep equal SAT and UNSAT counts")
    solver_opts(p, budget=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one DIMACS file, report JSON")
    p.add_argument("instance")
    p.add_argument("--params", help="'<var> <weight> <polarity>' file; default: unguided")
    p.add_argument("--model", action="store_true", help="include the model in the report")
    solver_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="GRPO training from a key = value config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override out_dir")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None, help="stop after this many more iterations")
    p.add_argument("--fresh", action="store_true", help="ignore an existing checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint (mode policy) or 'baseline'")
    p.add_argument("checkpoint")
    p.add_argument("instances")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=default_workers)
    solver_opts(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="guided/baseline ratios from two eval CSVs")
    p.add_argument("baseline")
    p.add_argument("guided")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze-weights", help="Pearson r of expected weights under two checkpoints")
    p.add_argument("ckpt_a")
    p.add_argument("ckpt_b")
    p.add_argument("instances")
    p.add_argument("--sample-size", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", help="backbone label file to join")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze_weights)

    p = sub.add_parser("label", help="backbone labels (JSON lines) for the SAT instances of a directory")
    p.add_argument("instances")
    p.add_argument("--out", required=True)
    solver_opts(p, budget=False)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train-supervised", help="backbone classifier baseline")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_supervised)

    p = sub.add_parser("tune-alpha", help="pick the backbone weight scale on validation instances")
    p.add_argument("checkpoint")
    p.add_argument("instances")
    p.add_argument("--grid", help="comma-separated values; default 1e-4..1e4")
    solver_opts(p)
    p.set_defaults(func=cmd_tune_alpha)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, DimacsError, ConfigError, grpo.PolicyDiverged) as e:
        print(f"rlaf {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
