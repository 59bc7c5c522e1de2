"""Command-line entry point: ``threshgraph {simulate,run,case-study,score}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .experiment import (
    ConfigError,
    DataError,
    TuningConfig,
    load_config,
    make_spec,
    read_edge_source,
    replicate_seed,
    run_case_study,
    run_experiment,
    summarize,
    write_results,
)
from .metrics import confusion, f1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="threshgraph",
        description="Hard-thresholded graph selection under latent confounding.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default="results"):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")

    p = sub.add_parser("simulate", help="write the ground-truth GraphSpec JSON")
    common(p)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--knob-value", type=float, default=None,
                   help="value for the config's sweep knob (default: first value)")

    p = sub.add_parser("run", help="run a simulation experiment")
    common(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--full", action="store_true",
                   help="use full-scale sweep values and replicate counts")

    p = sub.add_parser("case-study", help="fit methods to an external data matrix")
    p.add_argument("--config", default=None, help="case_study config (JSON)")
    p.add_argument("--data", default=None, help="CSV data matrix (rows = observations)")
    p.add_argument("--labels", default=None, help="node labels, one per line")
    p.add_argument("--out", default="case_study")
    p.add_argument("--methods", default="glasso,tglasso,lvglasso")
    p.add_argument("--tuning", choices=("ebic", "cv"), default="ebic")
    p.add_argument("--lam", type=float, default=None, help="fit all methods at this lambda")
    p.add_argument("--covariance", action="store_true",
                   help="use the covariance instead of the correlation matrix")

    p = sub.add_parser("score", help="score an edge list against the truth")
    p.add_argument("--edges", required=True, help="graph export JSON")
    p.add_argument("--truth", required=True, help="graph export or GraphSpec JSON")
    p.add_argument("--out", default=None, help="write the scores here (JSON)")
    return ap


def _with_seed(cfg, seed: Optional[int]):
    return cfg if seed is None else dataclasses.replace(cfg, base_seed=seed)


def cmd_simulate(args) -> int:
    cfg = _with_seed(load_config(args.config), args.seed)
    if cfg.design == "case_study":
        raise ConfigError("case_study configs have no simulated ground truth")
    graph, latent = cfg.graph, cfg.latent
    if cfg.sweep is not None and cfg.sweep.knob != "n":
        value = args.knob_value if args.knob_value is not None else cfg.sweep.values[0]
        knob = cfg.sweep.knob
        cast = int if knob in ("p_o", "k", "p_h") else float
        if hasattr(graph, knob):
            graph = dataclasses.replace(graph, **{knob: cast(value)})
        else:
            latent = dataclasses.replace(latent, **{knob: cast(value)})
    seed = replicate_seed(cfg.base_seed, args.replicate)
    spec = make_spec(graph, latent, seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"spec_seed{seed}.json")
    with open(path, "w") as fh:
        fh.write(spec.to_json())
        fh.write("\n")
    print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _with_seed(load_config(args.config), args.seed)
    if cfg.design == "case_study":
        cs = cfg.case_study
        summary = run_case_study(cs.data, cs.labels, cfg.methods, cfg.tuning, args.out,
                                 correlation=cs.correlation)
        print(json.dumps(summary, indent=2, sort_keys=True))
        return EXIT_OK
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    records = run_experiment(cfg, threads=args.threads, full=args.full)
    for path in write_results(records, cfg, args.out, args.format):
        print(path)
    for (method, kv, n), v in summarize(records).items():
        tag = f"{cfg.sweep.knob}={kv} " if kv is not None else ""
        print(f"  {method:9s} {tag}n={n}  mean F1 {v:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_case_study(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if cfg.case_study is None:
            raise ConfigError("config has no case_study section")
        data = args.data or cfg.case_study.data
        labels = args.labels or cfg.case_study.labels
        methods, tuning, corr = cfg.methods, cfg.tuning, cfg.case_study.correlation
    else:
        if not args.data:
            raise ConfigError("case-study needs --data or --config")
        data, labels = args.data, args.labels
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
        tuning = TuningConfig(mode=args.tuning, fixed_lambda=args.lam)
        corr = not args.covariance
    summary = run_case_study(data, labels, methods, tuning, args.out, correlation=corr)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_score(args) -> int:
    try:
        est = read_edge_source(args.edges)
        truth = read_edge_source(args.truth)
    except (OSError, KeyError, json.JSONDecodeError) as e:
        raise DataError(f"cannot read edge files: {e}") from None
    if est.dim != truth.dim:
        raise DataError(f"dimension mismatch: {est.dim} vs {truth.dim}")
    c = confusion(est, truth)
    doc = {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn, "f1": f1(c),
           "edges_selected": len(est), "edges_true": len(truth)}
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "run": cmd_run,
    "case-study": cmd_case_study,
    "score": cmd_score,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
