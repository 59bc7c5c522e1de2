"""Config-driven simulation runner, data ingestion, case study and graph export."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence

import numpy as np

from .core import EdgeSet, as_data_matrix, sample_covariance, to_correlation
from .metrics import confusion, f1, tuning_share
from .pipelines import (
    DATA_DRIVEN_METHODS,
    DEFAULT_GAMMAS,
    METHODS,
    TUNING_MODES,
    TuningSettings,
    run_method,
)
from .select import DEFAULT_LAMBDA0_C
from .simulate import (
    RNG_NAME,
    GraphSpec,
    chain_precision,
    latent_spec,
    sample_mvn,
    small_world_precision,
)

DESIGNS = (
    "no_latent_vary_n",
    "no_latent_vary_p",
    "latent_base",
    "latent_knob_sweep",
    "latent_highdim",
    "data_driven_tuning",
    "case_study",
)
GRAPH_KINDS = ("small_world", "chain")
GRAPH_KNOBS = ("p_o", "k", "beta", "weight")
LATENT_KNOBS = ("p_h", "oh_magnitude", "h_diag", "oh_sparsity", "h_sparsity",
                "h_offdiag_magnitude")
SWEEP_KNOBS = ("n",) + GRAPH_KNOBS + LATENT_KNOBS
RESULT_COLUMNS = (
    "design", "method", "knob", "knob_value", "n", "p_o", "p_h", "replicate", "seed",
    "eta", "lambda", "tau", "gamma", "edges_selected", "tp", "fp", "fn", "f1",
    "runtime_ms", "converged",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


class DataError(ValueError):
    """Unreadable or invalid input data (CLI exit code 3)."""


# --------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class GraphConfig:
    kind: str = "small_world"
    p_o: int = 30
    k: int = 2
    beta: float = 0.1
    weight: float = 1.0
    margin: float = 0.1


@dataclass(frozen=True)
class LatentConfig:
    p_h: int = 0
    oh_magnitude: float = 0.2
    # None: calibrated automatically (see simulate.calibrate_h_diag)
    h_diag: Optional[float] = None
    oh_sparsity: float = 0.0
    h_sparsity: float = 0.0
    h_offdiag_magnitude: float = 0.0


@dataclass(frozen=True)
class SweepConfig:
    knob: str
    values: tuple
    # used instead of ``values`` when running with --full
    full_values: Optional[tuple] = None


@dataclass(frozen=True)
class GridConfig:
    n_lambda: int = 10
    lambda_min_ratio: float = 0.01
    gammas: tuple = DEFAULT_GAMMAS
    count_step: int = 0


@dataclass(frozen=True)
class TuningConfig:
    mode: str = "oracle_count"
    lambda0_c: float = DEFAULT_LAMBDA0_C
    grids: GridConfig = GridConfig()
    gamma_ebic: float = 0.5
    K: int = 5
    nbsel_rule: str = "AND"
    cv_seed: int = 0
    # case study only: fit every method at this lambda instead of tuning it
    fixed_lambda: Optional[float] = None


@dataclass(frozen=True)
class CaseStudyConfig:
    data: str
    labels: Optional[str] = None
    correlation: bool = True


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    results: str = "results"
    timing: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    design: str
    methods: tuple
    graph: GraphConfig = GraphConfig()
    latent: LatentConfig = LatentConfig()
    sweep: Optional[SweepConfig] = None
    sample_sizes: tuple = (150,)
    tuning: TuningConfig = TuningConfig()
    replicates: int = 5
    base_seed: int = 0
    full_replicates: Optional[int] = None
    case_study: Optional[CaseStudyConfig] = None
    output: OutputConfig = OutputConfig()

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def tuning_settings(self) -> TuningSettings:
        t, g = self.tuning, self.tuning.grids
        return TuningSettings(
            mode=t.mode, lambda0_c=t.lambda0_c, gamma_ebic=t.gamma_ebic, K=t.K,
            n_lambda=g.n_lambda, lambda_min_ratio=g.lambda_min_ratio,
            gammas=tuple(g.gammas), count_step=g.count_step, nbsel_rule=t.nbsel_rule,
            cv_seed=t.cv_seed, lambda_fixed=t.fixed_lambda,
        )


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


_NESTED = {
    "graph": GraphConfig,
    "latent": LatentConfig,
    "sweep": SweepConfig,
    "tuning": TuningConfig,
    "grids": GridConfig,
    "case_study": CaseStudyConfig,
    "output": OutputConfig,
}


def _build(cls, doc, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    kwargs = {}
    for k, v in doc.items():
        if k in _NESTED and v is not None:
            v = _build(_NESTED[k], v, f"{where}.{k}")
        elif isinstance(v, list):
            v = tuple(v)
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"{where}: {e}") from None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.design in DESIGNS, f"design must be one of {DESIGNS}, got {cfg.design!r}")
    need(len(cfg.methods) > 0, "methods must be nonempty")
    for m in cfg.methods:
        need(m in METHODS, f"unknown method {m!r}; expected a subset of {METHODS}")
    need(len(set(cfg.methods)) == len(cfg.methods), "methods contain duplicates")
    need(_is_int(cfg.replicates) and cfg.replicates >= 1, "replicates must be an integer >= 1")
    need(_is_int(cfg.base_seed) and cfg.base_seed >= 0, "base_seed must be a non-negative integer")
    need(cfg.full_replicates is None or (_is_int(cfg.full_replicates) and cfg.full_replicates >= 1),
         "full_replicates must be an integer >= 1")

    t = cfg.tuning
    need(t.mode in TUNING_MODES, f"tuning.mode must be one of {TUNING_MODES}")
    need(_is_num(t.lambda0_c) and t.lambda0_c > 0, "tuning.lambda0_c must be positive")
    need(_is_num(t.gamma_ebic) and 0 <= t.gamma_ebic <= 1, "tuning.gamma_ebic must lie in [0, 1]")
    need(_is_int(t.K) and t.K >= 2, "tuning.K must be an integer >= 2")
    need(t.nbsel_rule in ("AND", "OR"), "tuning.nbsel_rule must be AND or OR")
    need(_is_int(t.cv_seed), "tuning.cv_seed must be an integer")
    need(t.fixed_lambda is None or (_is_num(t.fixed_lambda) and t.fixed_lambda > 0),
         "tuning.fixed_lambda must be positive")
    g = t.grids
    need(_is_int(g.n_lambda) and g.n_lambda >= 1, "tuning.grids.n_lambda must be >= 1")
    need(_is_num(g.lambda_min_ratio) and 0 < g.lambda_min_ratio <= 1,
         "tuning.grids.lambda_min_ratio must lie in (0, 1]")
    need(len(g.gammas) > 0 and all(_is_num(v) and v > 0 for v in g.gammas),
         "tuning.grids.gammas must be positive numbers")
    need(_is_int(g.count_step) and g.count_step >= 0, "tuning.grids.count_step must be >= 0")
    if t.mode != "oracle_count" or cfg.design == "case_study":
        bad = [m for m in cfg.methods if m not in DATA_DRIVEN_METHODS]
        need(not bad, f"methods {bad} support only oracle_count tuning")

    if cfg.design == "case_study":
        need(cfg.case_study is not None, "case_study design needs a case_study section")
        need(t.mode != "oracle_count", "case study has no true graph; use ebic or cv tuning")
        need(isinstance(cfg.case_study.data, str), "case_study.data must be a path")
        return cfg

    gr = cfg.graph
    need(gr.kind in GRAPH_KINDS, f"graph.kind must be one of {GRAPH_KINDS}")
    need(_is_int(gr.p_o) and gr.p_o >= 2, "graph.p_o must be an integer >= 2")
    need(_is_int(gr.k) and gr.k >= 2 and gr.k % 2 == 0, "graph.k must be an even integer >= 2")
    need(_is_num(gr.beta) and 0 <= gr.beta <= 1, "graph.beta must lie in [0, 1]")
    need(_is_num(gr.weight), "graph.weight must be a number")
    need(_is_num(gr.margin) and gr.margin > 0, "graph.margin must be positive")
    la = cfg.latent
    need(_is_int(la.p_h) and la.p_h >= 0, "latent.p_h must be a non-negative integer")
    need(la.h_diag is None or (_is_num(la.h_diag) and la.h_diag > 0),
         "latent.h_diag must be positive or null")
    for name in ("oh_sparsity", "h_sparsity"):
        v = getattr(la, name)
        need(_is_num(v) and 0 <= v <= 1, f"latent.{name} must lie in [0, 1]")
    need(len(cfg.sample_sizes) > 0 and all(_is_int(v) and v >= 2 for v in cfg.sample_sizes),
         "sample_sizes must be integers >= 2")
    if cfg.sweep is not None:
        need(cfg.sweep.knob in SWEEP_KNOBS,
             f"sweep.knob {cfg.sweep.knob!r} not in {SWEEP_KNOBS}")
        need(len(cfg.sweep.values) > 0, "sweep.values must be nonempty")
        need(all(_is_num(v) for v in cfg.sweep.values), "sweep.values must be numbers")
        if cfg.sweep.knob == "n":
            need(len(cfg.sample_sizes) == 1 or tuple(cfg.sample_sizes) == (150,),
                 "sweeping n: leave sample_sizes at a single value")
    return cfg


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for req in ("design", "methods"):
        if req not in doc:
            raise ConfigError(f"config is missing required field {req!r}")
    return validate_config(_build(ExperimentConfig, doc, "config"))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    return config_from_dict(doc)


# --------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class ResultRecord:
    design: str
    method: str
    knob: str
    knob_value: Any
    n: int
    p_o: int
    p_h: int
    replicate: int
    seed: int
    eta: float
    lambda_: float
    tau: float
    gamma: float
    edges_selected: int
    tp: int
    fp: int
    fn: int
    f1: float
    runtime_ms: Optional[float]
    converged: bool

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in dataclasses.fields(self))

    def as_dict(self) -> dict:
        return dict(zip(RESULT_COLUMNS, self.values()))

    def sort_key(self):
        kv = self.knob_value if self.knob_value is not None else -math.inf
        return (self.design, self.knob, kv, self.n, self.replicate, METHODS.index(self.method))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def records_to_csv(records: Sequence[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def records_to_json(records: Sequence[ResultRecord]) -> str:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v
    rows = [{k: clean(v) for k, v in r.as_dict().items()} for r in records]
    return json.dumps(rows, indent=1)


def read_results_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------------
# running

@dataclass(frozen=True)
class Setting:
    knob: str
    value: Any
    n: int
    graph: GraphConfig
    latent: LatentConfig


def _settings(cfg: ExperimentConfig, full: bool = False) -> list:
    out = []
    if cfg.sweep is None:
        for n in cfg.sample_sizes:
            out.append(Setting("", None, int(n), cfg.graph, cfg.latent))
        return out
    sw = cfg.sweep
    values = sw.full_values if (full and sw.full_values) else sw.values
    for v in values:
        if sw.knob == "n":
            out.append(Setting("n", int(v), int(v), cfg.graph, cfg.latent))
            continue
        if sw.knob in GRAPH_KNOBS:
            v = int(v) if sw.knob in ("p_o", "k") else float(v)
            g, la = dataclasses.replace(cfg.graph, **{sw.knob: v}), cfg.latent
        else:
            v = int(v) if sw.knob == "p_h" else float(v)
            g, la = cfg.graph, dataclasses.replace(cfg.latent, **{sw.knob: v})
        for n in cfg.sample_sizes:
            out.append(Setting(sw.knob, v, int(n), g, la))
    return out


def setting_hash(knob: str, value, n: int) -> int:
    """Stable 32-bit hash of a setting, folded into the sampling seed."""
    return zlib.crc32(f"{knob}={value!r}|n={n}".encode())


def replicate_seed(base_seed: int, replicate: int) -> int:
    return base_seed + replicate


def sample_seed(seed: int, setting: Setting) -> int:
    ss = np.random.SeedSequence([seed, setting_hash(setting.knob, setting.value, setting.n)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_spec(graph: GraphConfig, latent: LatentConfig, seed: int) -> GraphSpec:
    """Ground truth for one replicate: observed graph plus latent augmentation."""
    if graph.kind == "small_world":
        if graph.k >= graph.p_o:
            raise ConfigError(f"graph.k={graph.k} must be smaller than p_o={graph.p_o}")
        theta_o = small_world_precision(graph.p_o, graph.k, graph.beta, graph.weight,
                                        seed=seed, margin=graph.margin)
    else:
        theta_o = chain_precision(graph.p_o, graph.weight, graph.margin)
    spec = latent_spec(
        theta_o, p_h=latent.p_h, oh_magnitude=latent.oh_magnitude, h_diag=latent.h_diag,
        oh_sparsity=latent.oh_sparsity, h_sparsity=latent.h_sparsity,
        h_offdiag_magnitude=latent.h_offdiag_magnitude, seed=seed, margin=graph.margin,
    )
    knobs = dict(spec.knobs)
    knobs.update({"graph": graph.kind, "k": graph.k, "beta": graph.beta,
                  "weight": graph.weight})
    return dataclasses.replace(spec, knobs=knobs)


_NUMERIC_ERRORS = (np.linalg.LinAlgError, FloatingPointError, ArithmeticError, RuntimeError)


def _run_task(cfg: ExperimentConfig, setting: Setting, rep: int) -> list:
    seed = replicate_seed(cfg.base_seed, rep)
    spec = make_spec(setting.graph, setting.latent, seed)
    x = sample_mvn(spec.sigma_o, setting.n, sample_seed(seed, setting))
    S = sample_covariance(x)
    truth = spec.true_edges()
    t = cfg.tuning_settings()
    out = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        try:
            res = run_method(method, x, S, t, k=len(truth))
            edges, lam, tau, gamma, conv = res.edges, res.lam, res.tau, res.gamma, res.converged
        except _NUMERIC_ERRORS:
            edges, lam, tau, gamma, conv = EdgeSet(spec.p_o, frozenset()), math.nan, math.nan, math.nan, False
        ms = (time.perf_counter() - t0) * 1e3 if cfg.output.timing else None
        c = confusion(edges, truth)
        out.append(ResultRecord(
            design=cfg.design, method=method, knob=setting.knob, knob_value=setting.value,
            n=setting.n, p_o=spec.p_o, p_h=spec.p_h, replicate=rep, seed=seed,
            eta=float(spec.eta), lambda_=float(lam), tau=float(tau), gamma=float(gamma),
            edges_selected=len(edges), tp=c.tp, fp=c.fp, fn=c.fn, f1=f1(c),
            runtime_ms=ms, converged=bool(conv),
        ))
    return out


def _run_task_star(args):
    return _run_task(*args)


def run_experiment(cfg: ExperimentConfig, threads: int = 1, full: bool = False) -> list:
    """All records of ``cfg``, sorted by (design, knob value, n, replicate, method)."""
    if cfg.design == "case_study":
        raise ConfigError("use run_case_study for the case_study design")
    validate_config(cfg)
    reps = cfg.full_replicates if (full and cfg.full_replicates) else cfg.replicates
    tasks = [(cfg, s, r) for s in _settings(cfg, full) for r in range(reps)]
    records = []
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for chunk in pool.map(_run_task_star, tasks):
                records.extend(chunk)
    else:
        for task in tasks:
            records.extend(_run_task(*task))
    records.sort(key=ResultRecord.sort_key)
    return records


def summarize(records: Sequence[ResultRecord]) -> dict:
    """Mean F1 keyed by ``(method, knob_value, n)``."""
    acc = {}
    for r in records:
        acc.setdefault((r.method, r.knob_value, r.n), []).append(r.f1)
    return {k: float(np.mean(v)) for k, v in sorted(acc.items(), key=lambda kv: str(kv[0]))}


def write_results(records, cfg: ExperimentConfig, out_dir, fmt: str = "csv") -> list:
    """Write the result table and the resolved-config sidecar; return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, cfg.output.results)
    if fmt == "csv":
        body, path = records_to_csv(records), stem + ".csv"
    elif fmt == "json":
        body, path = records_to_json(records), stem + ".json"
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(body)
    side = stem + ".config.json"
    doc = cfg.to_dict()
    doc["_provenance"] = {"rng": RNG_NAME, "columns": list(RESULT_COLUMNS)}
    with open(side, "w") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return [path, side]


# --------------------------------------------------------------------------
# ingestion

@dataclass(frozen=True)
class LoadedMatrix:
    data: np.ndarray
    columns: Optional[tuple] = None

    @property
    def shape(self):
        return self.data.shape


def _parse_float(s: str):
    try:
        return float(s)
    except ValueError:
        return None


def load_matrix_csv(path) -> LoadedMatrix:
    """Read a rectangular numeric CSV (rows = observations).

    A first row containing any non-numeric cell is taken as a header.
    """
    try:
        with open(path, newline="") as fh:
            rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh))]
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    rows = [(ln, [c.strip() for c in r]) for ln, r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    columns = None
    if any(_parse_float(c) is None for c in rows[0][1]):
        columns = tuple(rows[0][1])
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: header but no data rows")
    width = len(columns) if columns is not None else len(rows[0][1])
    vals = []
    for ln, r in rows:
        if len(r) != width:
            raise DataError(f"{path}: line {ln} has {len(r)} fields, expected {width}")
        row = []
        for j, c in enumerate(r):
            v = _parse_float(c)
            if v is None:
                raise DataError(f"{path}: line {ln}, column {j + 1}: non-numeric value {c!r}")
            if not math.isfinite(v):
                raise DataError(f"{path}: line {ln}, column {j + 1}: non-finite value {c!r}")
            row.append(v)
        vals.append(row)
    data = np.array(vals, dtype=float)
    if data.shape[0] < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {data.shape[0]}")
    return LoadedMatrix(data=data, columns=columns)


def load_labels(path, p: int) -> list:
    """One label per line; a leading extra line is treated as a header."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    if len(lines) == p + 1:
        lines = lines[1:]
    if len(lines) != p:
        raise DataError(f"{path}: {len(lines)} labels for {p} variables")
    return lines


# --------------------------------------------------------------------------
# graph export

def export_graph(edges: EdgeSet, weights, path, node_labels=None, node_names=None) -> dict:
    w = np.asarray(weights, dtype=float)
    if w.shape != (edges.dim, edges.dim):
        raise ValueError(f"weights shape {w.shape} does not match dim {edges.dim}")
    for extra, what in ((node_labels, "labels"), (node_names, "names")):
        if extra is not None and len(extra) != edges.dim:
            raise ValueError(f"{len(extra)} {what} for {edges.dim} nodes")
    nodes = []
    for i in range(edges.dim):
        node = {"id": i}
        if node_names is not None:
            node["name"] = str(node_names[i])
        if node_labels is not None:
            node["label"] = str(node_labels[i])
        nodes.append(node)
    doc = {
        "nodes": nodes,
        "edges": [{"i": i, "j": j, "weight": float(w[i, j])} for i, j in edges],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return doc


def read_graph(path) -> tuple:
    """Parse an exported graph; returns ``(EdgeSet, weights dict, nodes)``."""
    with open(path) as fh:
        doc = json.load(fh)
    p = len(doc["nodes"])
    pairs = [(e["i"], e["j"]) for e in doc["edges"]]
    weights = {(e["i"], e["j"]): e["weight"] for e in doc["edges"]}
    return EdgeSet.from_pairs(p, pairs), weights, doc["nodes"]


def read_edge_source(path) -> EdgeSet:
    """Edge set from an exported graph or from a GraphSpec JSON (true edges)."""
    with open(path) as fh:
        doc = json.load(fh)
    if "theta_o" in doc:
        return GraphSpec.from_json(json.dumps(doc)).true_edges()
    if "nodes" in doc and "edges" in doc:
        return read_graph(path)[0]
    raise DataError(f"{path}: neither a graph export nor a graph spec")


# --------------------------------------------------------------------------
# case study

def run_case_study(data_path, labels_path=None, methods=DATA_DRIVEN_METHODS,
                   tuning: TuningConfig = TuningConfig(mode="ebic"), out_dir=".",
                   correlation: bool = True) -> dict:
    """Fit each method to an external data matrix and export its graph.

    Writes ``graph_<method>.json`` per method and ``summary.json``. The
    tuning share uses all estimated edges as its denominator.
    """
    loaded = load_matrix_csv(data_path)
    x = as_data_matrix(loaded.data)
    n, p = x.shape
    labels = load_labels(labels_path, p) if labels_path is not None else None
    S = sample_covariance(x)
    if correlation:
        try:
            S = to_correlation(S)
        except ValueError as e:
            raise DataError(str(e)) from None
    cfg = ExperimentConfig(design="case_study", methods=tuple(methods), tuning=tuning,
                           case_study=CaseStudyConfig(data=str(data_path)))
    bad = [m for m in methods if m not in DATA_DRIVEN_METHODS]
    if bad:
        raise ConfigError(f"case study supports {DATA_DRIVEN_METHODS}, got {bad}")
    if tuning.mode not in ("ebic", "cv"):
        raise ConfigError("case study tuning mode must be ebic or cv")
    t = cfg.tuning_settings()
    os.makedirs(out_dir, exist_ok=True)
    summary = {
        "n": n,
        "p": p,
        "correlation": bool(correlation),
        "tuning_mode": tuning.mode,
        "methods": {},
    }
    if labels is not None:
        summary["tuning_share_denominator"] = "all estimated edges"
    for m in methods:
        res = run_method(m, x, S, t)
        fname = f"graph_{m}.json"
        export_graph(res.edges, res.weights, os.path.join(out_dir, fname),
                     node_labels=labels, node_names=loaded.columns)
        entry = {
            "edges": len(res.edges),
            "lambda": res.lam,
            "tau": None if math.isnan(res.tau) else res.tau,
            "gamma": None if math.isnan(res.gamma) else res.gamma,
            "converged": res.converged,
            "export": fname,
        }
        if labels is not None:
            entry["tuning_share"] = tuning_share(res.edges, labels)
        summary["methods"][m] = entry
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
