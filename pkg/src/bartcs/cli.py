"""Command-line surface: ``bartcs fit``, ``bartcs simulate``, ``bartcs report``.

Artifacts are plain text. Trace files are line-delimited JSON (one header
record, then one record per retained draw) with floats at 17 significant
digits so reruns are byte-identical; summary tables use 4 significant
digits. Flag validation fails with the usual usage exit status 2; runtime
failures print one ``ERROR <code>: message`` line and exit 1.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import List, Optional

import numpy as np

from .chain import Trace, TraceMeta, TraceRecord, run_chain, run_chains
from .data import (BINARY, CONTINUOUS, MARGINAL, SEPARATE, ChainConfig,
                   Dataset, Hyperparams)
from .diagnostics import (ANY_MODEL, EXPOSURE_MODEL, OUTCOME_MODELS,
                          class_decomposition, gelman_rubin, pip)
from .effects import EffectSummary, contrast_continuous, exposure_response
from .errors import (BadConfig, BartcsError, ChainLengthMismatch,
                     ExposureDomainError, MissingArtifact, MissingColumn,
                     MissingValue, ParseError, UnsupportedForBinary)
from .sim import SCENARIO_IDS, make_scenario, run_replicates, worker_count

MISSING_TOKENS = {"", "NA", "NaN", "nan", "NULL", "null"}

TRACE_FORMAT = 1


# ---------------------------------------------------------------------------
# CSV ingestion


def _parse_cell(text: str, line: int, col: str) -> float:
    s = text.strip()
    if s in MISSING_TOKENS:
        raise MissingValue(line, col)
    try:
        value = float(s)
    except ValueError:
        raise ParseError(line, col, text) from None
    if math.isnan(value):
        raise MissingValue(line, col)
    if math.isinf(value):
        raise ParseError(line, col, text)
    return value


def ingest_csv(path, outcome: str, exposure: str,
               covariates: Optional[List[str]] = None,
               exposure_kind: str = BINARY) -> Dataset:
    """Load a UTF-8 CSV with a header row into a Dataset.

    Row numbers in errors are file line numbers (the header is line 1).
    covariates defaults to every non-role column in file order.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingArtifact(f"input file not found: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise BadConfig(f"{path}: no header row")

    header = [name.strip() for name in rows[0]]
    if outcome == exposure:
        raise BadConfig("outcome and exposure must be different columns")
    for role_name in (outcome, exposure):
        if header.count(role_name) > 1:
            raise BadConfig(f"column {role_name!r} appears more than once")
        if role_name not in header:
            raise MissingColumn(f"column {role_name!r} not in header")

    if covariates is None:
        covariates = [c for c in header if c not in (outcome, exposure)]
    else:
        covariates = list(covariates)
        for name in covariates:
            if name not in header:
                raise MissingColumn(f"column {name!r} not in header")
            if name in (outcome, exposure):
                raise BadConfig(f"column {name!r} cannot be both a role "
                                "and a covariate")
        if len(set(covariates)) != len(covariates):
            raise BadConfig("covariate list contains duplicates")
    if not covariates:
        raise BadConfig("no covariate columns remain")

    col_index = {name: header.index(name) for name in
                 [outcome, exposure] + covariates}
    n_cols = len(header)
    y, a = [], []
    x_rows = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n_cols:
            raise ParseError(i, "<row>", f"expected {n_cols} cells, got "
                                         f"{len(row)}")
        y.append(_parse_cell(row[col_index[outcome]], i, outcome))
        a.append(_parse_cell(row[col_index[exposure]], i, exposure))
        x_rows.append([_parse_cell(row[col_index[c]], i, c)
                       for c in covariates])

    a_arr = np.array(a)
    if exposure_kind == BINARY and not np.all(np.isin(a_arr, (0.0, 1.0))):
        bad = a_arr[~np.isin(a_arr, (0.0, 1.0))][0]
        raise ExposureDomainError(f"binary exposure column {exposure!r} "
                                  f"contains {bad!r}")
    return Dataset(y=np.array(y), a=a_arr, X=np.array(x_rows),
                   names=tuple(covariates), exposure_kind=exposure_kind)


# ---------------------------------------------------------------------------
# Fixed-format serialization


def _jfloat(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value in trace output")
    return format(x, ".17g")


def _to_json(obj) -> str:
    """JSON with floats at 17 significant digits (byte-stable output)."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _jfloat(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_to_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + _to_json(v)
                              for k, v in obj.items()) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _g4(x) -> str:
    return format(float(x), ".4g")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Trace persistence


def write_trace(path: Path, trace: Trace, hyper: Hyperparams,
                outcome_col: str, exposure_col: str) -> None:
    meta = trace.meta
    header = {
        "type": "header", "format": TRACE_FORMAT,
        "scheme": meta.scheme, "exposure_kind": meta.exposure_kind,
        "n": meta.n, "p": meta.p, "names": list(meta.names),
        "outcome": outcome_col, "exposure": exposure_col,
        "seed": meta.seed, "chain_index": meta.chain_index,
        "n_iter": meta.n_iter, "burn_in": meta.burn_in, "thin": meta.thin,
        "trees": hyper.h,
        "y_min": meta.y_min, "y_max": meta.y_max,
        "a_min": meta.a_min, "a_max": meta.a_max,
    }
    lines = [_to_json(header)]
    for rec in trace.records:
        ate = None
        if rec.cf1 is not None:
            ate = float(np.mean(rec.cf1 - rec.cf0))
        lines.append(_to_json({
            "type": "draw", "iteration": rec.iteration,
            "alpha": rec.alpha, "sigma2": rec.sigma2, "s": rec.s,
            "m": rec.m, "n": rec.n, "n0": rec.n0, "n1": rec.n1,
            "ate": ate, "snapshots": rec.snapshots,
        }))
    _atomic_write(path, "\n".join(lines) + "\n")


def _int_array(values) -> Optional[np.ndarray]:
    if values is None:
        return None
    return np.asarray(values, dtype=np.int64)


def read_trace(path) -> tuple:
    """Parse a trace file back into (Trace, header dict).

    Counterfactual fit vectors are not persisted; records read from disk
    carry counts, parameters, per-draw ATE, and (continuous exposure)
    forest snapshots.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingArtifact(f"trace file not found: {path}")
    with open(p, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line]
    if not lines:
        raise MissingArtifact(f"trace file is empty: {path}")
    header = json.loads(lines[0])
    if header.get("type") != "header" or header.get("format") != TRACE_FORMAT:
        raise MissingArtifact(f"{path}: not a recognized trace file")

    records = []
    ates = []
    for line in lines[1:]:
        raw = json.loads(line)
        records.append(TraceRecord(
            iteration=int(raw["iteration"]),
            m=_int_array(raw["m"]), n=_int_array(raw["n"]),
            n0=_int_array(raw["n0"]), n1=_int_array(raw["n1"]),
            cf1=None, cf0=None, snapshots=raw["snapshots"],
            sigma2={k: float(v) for k, v in raw["sigma2"].items()},
            alpha=float(raw["alpha"]),
            s=np.asarray(raw["s"], dtype=np.float64)))
        ates.append(None if raw["ate"] is None else float(raw["ate"]))

    meta = TraceMeta(
        scheme=header["scheme"], exposure_kind=header["exposure_kind"],
        n=int(header["n"]), p=int(header["p"]),
        names=tuple(header["names"]), seed=int(header["seed"]),
        n_iter=int(header["n_iter"]), burn_in=int(header["burn_in"]),
        thin=int(header["thin"]), chain_index=int(header["chain_index"]),
        y_min=float(header["y_min"]), y_max=float(header["y_max"]),
        a_min=float(header["a_min"]), a_max=float(header["a_max"]))
    trace = Trace(meta=meta, records=records)
    trace.file_ates = ates
    return trace, header


# ---------------------------------------------------------------------------
# Shared artifact writers


def _pooled(traces: List[Trace]) -> Trace:
    records = [rec for trace in traces for rec in trace.records]
    return Trace(meta=traces[0].meta, records=records)


def write_pip_csv(path: Path, traces: List[Trace], exposure_col: str) -> None:
    pooled = _pooled(traces)
    by_exposure = pip(pooled, EXPOSURE_MODEL)
    by_outcome = pip(pooled, OUTCOME_MODELS)
    by_any = pip(pooled, ANY_MODEL)

    lines = ["variable,pip_exposure,pip_outcome,pip_any"]
    if by_outcome.exposure_prob is not None:
        lines.append(f"{exposure_col},NA,{_g4(by_outcome.exposure_prob)},"
                     f"{_g4(by_any.exposure_prob)}")
    for j, name in enumerate(pooled.meta.names):
        lines.append(f"{name},{_g4(by_exposure.probs[j])},"
                     f"{_g4(by_outcome.probs[j])},{_g4(by_any.probs[j])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _binary_effect_draws(trace: Trace) -> np.ndarray:
    return np.array([float(np.mean(rec.cf1 - rec.cf0))
                     for rec in trace.records])


def _rhat_text(per_chain: List[np.ndarray]) -> str:
    try:
        return _g4(gelman_rubin(per_chain))
    except ChainLengthMismatch:
        return "NA"


def write_summary_csv(path: Path, traces: List[Trace],
                      dataset: Dataset) -> None:
    """ATE summary for binary exposure; max-vs-min contrast for continuous."""
    meta = traces[0].meta
    if meta.exposure_kind == BINARY:
        per_chain = [_binary_effect_draws(t) for t in traces]
        label = "ate"
    else:
        per_chain = [contrast_continuous(t, dataset.X, meta.a_max,
                                         meta.a_min).draws for t in traces]
        label = "contrast_max_min"
    summary = EffectSummary.from_draws(np.concatenate(per_chain))
    lines = ["estimand,posterior_mean,ci_low,ci_high,r_hat",
             f"{label},{_g4(summary.posterior_mean)},{_g4(summary.ci_low)},"
             f"{_g4(summary.ci_high)},{_rhat_text(per_chain)}"]
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# fit


def _chain_worker(payload):
    dataset, hyper, config, seed_seq, index = payload
    return run_chain(dataset, hyper, config, seed_seq=seed_seq,
                     chain_index=index)


def _run_all_chains(dataset: Dataset, hyper: Hyperparams,
                    config: ChainConfig) -> List[Trace]:
    workers = worker_count(config.n_chains)
    if workers == 1:
        return run_chains(dataset, hyper, config)
    children = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    payloads = [(dataset, hyper, config, child, i)
                for i, child in enumerate(children)]
    with ProcessPoolExecutor(max_workers=workers,
                             mp_context=get_context("spawn")) as pool:
        return list(pool.map(_chain_worker, payloads))


# flat config-file / flag keys shared by the fit command
_FIT_KEYS = {
    "input": str, "outcome": str, "exposure": str, "covariates": str,
    "scheme": str, "exposure_kind": str, "out": str,
    "iters": int, "burn_in": int, "thin": int, "seed": int,
    "chains": int, "trees": int,
    "beta1": float, "beta2": float, "a_sigma": float, "b_sigma": float,
    "a0": float, "b0": float, "k_leaf": float, "p_grow": float,
    "p_prune": float, "p_change": float, "alpha_step": float,
    "c_offset": str, "c_offset_value": float,
}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; later keys win."""
    p = Path(path)
    if not p.is_file():
        raise BadConfig(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(),
                                 start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIT_KEYS:
            raise BadConfig(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _resolve(args, parser) -> dict:
    """Merge config-file values under explicit flags; convert types."""
    merged = {}
    if args.config is not None:
        try:
            raw = parse_config_file(args.config)
        except BadConfig as exc:
            parser.error(str(exc))
        for key, text in raw.items():
            try:
                merged[key] = _FIT_KEYS[key](text)
            except ValueError:
                parser.error(f"config key {key!r}: cannot parse {text!r}")
    for key in _FIT_KEYS:
        flag_value = getattr(args, key)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved fit configuration."""

    input: str
    outcome: str
    exposure: str
    covariates: Optional[tuple]
    scheme: str
    exposure_kind: str
    out_dir: str
    hyper: Hyperparams
    chain: ChainConfig


def _build_run_config(merged: dict, parser) -> RunConfig:
    for required in ("input", "outcome", "exposure"):
        if required not in merged:
            parser.error(f"the following argument is required: --{required}")

    scheme = merged.get("scheme", MARGINAL)
    exposure_kind = merged.get("exposure_kind", BINARY)
    if scheme not in (MARGINAL, SEPARATE):
        parser.error(f"unknown scheme {scheme!r}")
    if exposure_kind not in (BINARY, CONTINUOUS):
        parser.error(f"unknown exposure kind {exposure_kind!r}")

    covariates = None
    if "covariates" in merged:
        covariates = tuple(name.strip() for name in
                           merged["covariates"].split(",") if name.strip())

    hyper_kwargs = {}
    for key, field_name in (("trees", "h"), ("beta1", "beta1"),
                            ("beta2", "beta2"), ("a_sigma", "a_sigma"),
                            ("b_sigma", "b_sigma"), ("a0", "a0"),
                            ("b0", "b0"), ("k_leaf", "k_leaf"),
                            ("p_grow", "p_grow"), ("p_prune", "p_prune"),
                            ("p_change", "p_change"),
                            ("alpha_step", "alpha_step"),
                            ("c_offset", "c_offset_mode"),
                            ("c_offset_value", "c_offset_value")):
        if key in merged:
            hyper_kwargs[field_name] = merged[key]

    n_iter = merged.get("iters", 25000)
    burn_in = merged.get("burn_in", n_iter // 2)
    try:
        hyper = Hyperparams(**hyper_kwargs)
        chain = ChainConfig(n_iter=n_iter, burn_in=burn_in,
                            thin=merged.get("thin", 10),
                            seed=merged.get("seed", 0), scheme=scheme,
                            n_chains=merged.get("chains", 1))
    except BadConfig as exc:
        parser.error(str(exc))
    return RunConfig(input=merged["input"], outcome=merged["outcome"],
                     exposure=merged["exposure"], covariates=covariates,
                     scheme=scheme, exposure_kind=exposure_kind,
                     out_dir=merged.get("out", "."), hyper=hyper, chain=chain)


def cli_fit(args, parser) -> int:
    config = _build_run_config(_resolve(args, parser), parser)
    dataset = ingest_csv(config.input, config.outcome, config.exposure,
                         covariates=list(config.covariates)
                         if config.covariates else None,
                         exposure_kind=config.exposure_kind)
    traces = _run_all_chains(dataset, config.hyper, config.chain)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for trace in traces:
        path = out_dir / f"trace_{trace.meta.chain_index}.jsonl"
        write_trace(path, trace, config.hyper, config.outcome,
                    config.exposure)
        written.append(path)
    summary_path = out_dir / "summary.csv"
    write_summary_csv(summary_path, traces, dataset)
    written.append(summary_path)
    pip_path = out_dir / "pip.csv"
    write_pip_csv(pip_path, traces, config.exposure)
    written.append(pip_path)

    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# simulate


def cli_simulate(args, parser) -> int:
    try:
        spec = make_scenario(args.scenario, seed=args.seed, n=args.n,
                             p=args.p)
    except BadConfig as exc:
        parser.error(str(exc))
    n_iter = args.iters if args.iters is not None else 25000
    burn_in = args.burn_in if args.burn_in is not None else n_iter // 2
    thin = args.thin if args.thin is not None else 10
    try:
        chain = ChainConfig(n_iter=n_iter, burn_in=burn_in, thin=thin,
                            seed=args.seed, scheme=args.scheme,
                            n_chains=args.chains)
        hyper = Hyperparams(h=args.trees) if args.trees else Hyperparams()
    except BadConfig as exc:
        parser.error(str(exc))

    result = run_replicates(spec, args.reps, args.scheme, chain, hyper=hyper)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggregate = (f"{spec.scenario},{result.scheme},{result.m},"
                 f"{_g4(result.bias)},{_g4(result.mse)},"
                 f"{_g4(result.coverage)},{_g4(result.wall_time_s)}")
    lines = ["scenario,scheme,m,bias,mse,coverage,wall_time_s", aggregate]
    for rep in result.replicates:
        lines.append(f"{spec.scenario},{result.scheme},1,{_g4(rep.bias)},"
                     f"{_g4(rep.squared_error)},{rep.covered},"
                     f"{_g4(rep.wall_time_s)}")
    path = out_dir / "metrics.csv"
    _atomic_write(path, "\n".join(lines) + "\n")

    print("scenario,scheme,m,bias,mse,coverage,wall_time_s")
    print(aggregate)
    return 0


# ---------------------------------------------------------------------------
# report


def _load_traces(args) -> List[Trace]:
    if args.trace:
        paths = [Path(t) for t in args.trace]
    else:
        paths = sorted(Path(args.dir).glob("trace_*.jsonl"))
        if not paths:
            raise MissingArtifact(f"no trace_*.jsonl files in {args.dir}")
    loaded = [read_trace(p) for p in paths]
    traces = [trace for trace, _ in loaded]
    first = traces[0].meta
    for trace in traces[1:]:
        if (trace.meta.scheme != first.scheme
                or trace.meta.exposure_kind != first.exposure_kind
                or trace.meta.names != first.names):
            raise BadConfig("trace files come from different runs")
    return traces


def _names_to_indices(names_csv: str, names: tuple) -> list:
    indices = []
    lookup = {name: j for j, name in enumerate(names)}
    for raw in names_csv.split(","):
        name = raw.strip()
        if not name:
            continue
        if name not in lookup:
            raise BadConfig(f"unknown covariate name {name!r}")
        indices.append(lookup[name])
    return indices


def cli_report(args, parser) -> int:
    traces = _load_traces(args)
    pooled = _pooled(traces)
    meta = pooled.meta
    out_dir = Path(args.out if args.out is not None else args.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    pip_path = out_dir / "pip.csv"
    write_pip_csv(pip_path, traces, "exposure")
    written.append(pip_path)

    if args.grid is not None:
        if meta.exposure_kind == BINARY:
            raise UnsupportedForBinary(
                "exposure-response grids require a continuous exposure")
        if args.input is None:
            raise BadConfig("--grid requires --input to rebuild the "
                            "covariate matrix")
        _, header = read_trace(args.trace[0] if args.trace
                               else sorted(Path(args.dir)
                                           .glob("trace_*.jsonl"))[0])
        dataset = ingest_csv(args.input, header["outcome"],
                             header["exposure"],
                             covariates=list(meta.names),
                             exposure_kind=meta.exposure_kind)
        if dataset.n != meta.n:
            raise BadConfig(f"--input has {dataset.n} rows but the trace "
                            f"was fitted on {meta.n}")
        grid = np.linspace(meta.a_min, meta.a_max, args.grid)
        curve = exposure_response(pooled, dataset.X, grid)
        lines = ["grid_point,posterior_mean,ci_low,ci_high"]
        for value, summary in zip(grid, curve):
            lines.append(f"{_g4(value)},{_g4(summary.posterior_mean)},"
                         f"{_g4(summary.ci_low)},{_g4(summary.ci_high)}")
        grid_path = out_dir / "exposure_response.csv"
        _atomic_write(grid_path, "\n".join(lines) + "\n")
        written.append(grid_path)

    if args.x_cap is not None or args.x_star is not None:
        cap = _names_to_indices(args.x_cap or "", meta.names)
        star = _names_to_indices(args.x_star or "", meta.names)
        decomp = class_decomposition(pooled, cap, star)
        lines = ["quantity,value",
                 f"fraction_r_cap,{_g4(decomp.fraction_r_cap)}",
                 f"fraction_r_star,{_g4(decomp.fraction_r_star)}"]
        decomp_path = out_dir / "class_decomposition.csv"
        _atomic_write(decomp_path, "\n".join(lines) + "\n")
        written.append(decomp_path)
        print(f"fraction_r_cap={_g4(decomp.fraction_r_cap)} "
              f"fraction_r_star={_g4(decomp.fraction_r_star)}")

    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bartcs",
        description="Confounder-selecting BART for causal effect estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit chains to a CSV dataset")
    fit.add_argument("--config", help="flat key = value config file")
    fit.add_argument("--input")
    fit.add_argument("--outcome")
    fit.add_argument("--exposure")
    fit.add_argument("--covariates",
                     help="comma-separated allowlist (default: all other "
                          "columns)")
    fit.add_argument("--scheme", choices=(MARGINAL, SEPARATE))
    fit.add_argument("--exposure-kind", dest="exposure_kind",
                     choices=(BINARY, CONTINUOUS))
    fit.add_argument("--iters", type=_positive_int)
    fit.add_argument("--burn-in", dest="burn_in", type=int)
    fit.add_argument("--thin", type=_positive_int)
    fit.add_argument("--seed", type=int)
    fit.add_argument("--chains", type=_positive_int)
    fit.add_argument("--trees", type=_positive_int)
    fit.add_argument("--out", help="output directory (default .)")
    for flag in ("beta1", "beta2", "a-sigma", "b-sigma", "a0", "b0",
                 "k-leaf", "p-grow", "p-prune", "p-change", "alpha-step",
                 "c-offset-value"):
        fit.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                         type=float)
    fit.add_argument("--c-offset", dest="c_offset", choices=("n0", "fixed"))
    fit.set_defaults(func=cli_fit)

    simulate = sub.add_parser("simulate", help="run scenario replicates")
    simulate.add_argument("--scenario", required=True, choices=SCENARIO_IDS)
    simulate.add_argument("--reps", type=_positive_int, required=True)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--scheme", choices=(MARGINAL, SEPARATE),
                          default=MARGINAL)
    simulate.add_argument("--iters", type=_positive_int)
    simulate.add_argument("--burn-in", dest="burn_in", type=int)
    simulate.add_argument("--thin", type=_positive_int)
    simulate.add_argument("--chains", type=_positive_int, default=1)
    simulate.add_argument("--trees", type=_positive_int)
    simulate.add_argument("--n", type=_positive_int)
    simulate.add_argument("--p", type=_positive_int)
    simulate.add_argument("--out", default=".")
    simulate.set_defaults(func=cli_simulate)

    report = sub.add_parser("report", help="post-process trace artifacts")
    report.add_argument("--dir", default=".",
                        help="directory holding trace_*.jsonl")
    report.add_argument("--trace", action="append",
                        help="explicit trace file (repeatable)")
    report.add_argument("--input",
                        help="original CSV (needed for --grid)")
    report.add_argument("--grid", type=_positive_int,
                        help="evaluate the exposure-response curve on this "
                             "many equally spaced points")
    report.add_argument("--x-cap", dest="x_cap",
                        help="comma-separated covariate names")
    report.add_argument("--x-star", dest="x_star",
                        help="comma-separated covariate names")
    report.add_argument("--out", help="output directory (default --dir)")
    report.set_defaults(func=cli_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except BartcsError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
