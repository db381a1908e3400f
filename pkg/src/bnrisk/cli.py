"""Batch command-line entry points.

Every command writes its artifacts under ``--out`` together with a single
``run.json`` manifest recording the resolved configuration, seeds, input
checksums, output paths, and wall-clock time, so a run is reproducible from
its manifest alone. Exit codes: 0 success, 2 usage or validation problem,
1 internal error.

A flat ``key = value`` configuration file (``--config``) may supply any
scalar flag; command-line values take precedence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import analytics, evaluation, persist
from .data import DataError, Dataset, complete_cases, load_dataset, save_dataset
from .fixtures import POPULATION_MARGINALS, PUBLISHED_ALPHA
from .inference import ImpossibleEvidenceError, forward_sample, query
from .model import ArcConstraints, NetworkSchema, Variable, reference_crc_network
from .params import build_prior, initial_posterior, posterior_mean_network, sequential_fit
from .structure import ScoreConfig, SearchConfig, hill_climb


class UsageError(ValueError):
    """Bad flags, unreadable inputs, or inconsistent request."""


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


class Manifest:
    def __init__(self, command: str, config: dict):
        self.started = time.monotonic()
        self.doc = {
            "command": command,
            "config": {k: v for k, v in sorted(config.items()) if v is not None},
            "seeds": {},
            "inputs": {},
            "outputs": [],
        }

    def add_input(self, path) -> None:
        p = Path(path)
        self.doc["inputs"][str(p)] = _sha256(p)

    def add_output(self, path) -> None:
        self.doc["outputs"].append(str(path))

    def record(self, **extra) -> None:
        self.doc.update(extra)

    def seed(self, name: str, value) -> None:
        self.doc["seeds"][name] = value

    def write(self, out_dir: Path) -> None:
        self.doc["wall_clock_s"] = round(time.monotonic() - self.started, 6)
        path = out_dir / "run.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.doc, fh, indent=1, sort_keys=True)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_config_value(raw: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _load_config(path: str) -> dict:
    cfg = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = _parse_config_value(value)
    return cfg


def _merge_config(args: argparse.Namespace) -> dict:
    """Fill argparse Nones from the config file; returns the resolved dict."""
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        for key, value in cfg.items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    return {k: v for k, v in vars(args).items() if k not in ("func", "config")}


def _parse_target(spec: str) -> tuple[str, str]:
    if "=" not in spec:
        raise UsageError(f"target must be VAR=STATE, got {spec!r}")
    var, state = spec.split("=", 1)
    return var, state


def _parse_evidence(pairs, schema: NetworkSchema) -> dict[str, int]:
    ev = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"evidence must be VAR=STATE, got {pair!r}")
        var, state = pair.split("=", 1)
        ev[var] = state
    return schema.coerce_evidence(ev)


def _schema_for_csv(path: str, schema_path: str | None) -> NetworkSchema:
    """Explicit schema file > reference schema (when the header matches) >
    inference from the file's own labels (sorted), in that order."""
    if schema_path:
        return persist.load_schema(schema_path)
    with open(path, "r", encoding="utf-8") as fh:
        header = [c.strip() for c in fh.readline().split(",")]
    ref_schema, _ = reference_crc_network()
    if set(header) - {"year"} == set(ref_schema.names):
        return ref_schema
    import csv as _csv

    values: dict[str, set[str]] = {c: set() for c in header if c != "year"}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        for row in reader:
            for col in values:
                cell = (row.get(col) or "").strip()
                if cell:
                    values[col].add(cell)
    variables = []
    for col in header:
        if col == "year":
            continue
        states = sorted(values[col])
        if len(states) < 2:
            raise UsageError(f"column {col!r} has fewer than 2 observed states; supply --schema")
        variables.append(Variable(col, tuple(states)))
    return NetworkSchema(variables)


def _load_complete(path: str, schema: NetworkSchema, manifest: Manifest) -> Dataset:
    manifest.add_input(path)
    ds, report = load_dataset(path, schema, name=Path(path).name)
    ds, dropped = complete_cases(ds)
    manifest.record(
        **{
            f"ingest:{Path(path).name}": {
                "rows": report.total_rows,
                "rejected": report.rejected_rows,
                "missing_cells": report.missing_cells,
                "dropped_incomplete": dropped,
            }
        }
    )
    return ds


# --- commands ----------------------------------------------------------------


def cmd_learn_structure(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("learn-structure", config)
    schema = _schema_for_csv(args.data, args.schema)
    ds = _load_complete(args.data, schema, manifest)
    constraints = ArcConstraints()
    if args.constraints:
        manifest.add_input(args.constraints)
        constraints = persist.load_constraints(args.constraints)
    initial = None
    if args.initial:
        manifest.add_input(args.initial)
        initial, initial_schema = persist.load_dag(args.initial)
        if initial_schema != schema:
            raise UsageError("initial DAG schema does not match the data schema")
    score_cfg = ScoreConfig(
        imposed_sample_size=args.iss if args.iss is not None else 1.0,
        score_kind=(args.score or "bds"),
    )
    search_cfg = SearchConfig(
        max_iterations=args.max_iterations if args.max_iterations is not None else 200,
        tie_break=args.tie_break or "lexicographic",
        seed=args.seed if args.seed is not None else 0,
    )
    manifest.seed("search", search_cfg.seed)
    result = hill_climb(ds, constraints, initial, score_cfg, search_cfg)
    dag_path = out / "dag.json"
    persist.save_dag(result.dag, schema, dag_path)
    manifest.add_output(dag_path)
    moves_path = out / "moves.json"
    with open(moves_path, "w", encoding="utf-8") as fh:
        json.dump(
            [
                {"kind": m.kind, "parent": m.parent, "child": m.child,
                 "delta": m.delta, "score_after": m.score_after}
                for m in result.moves
            ],
            fh,
            indent=1,
        )
    manifest.add_output(moves_path)
    manifest.record(score=result.score, accepted_moves=len(result.moves),
                    arcs=sorted([list(a) for a in result.dag.arcs]))
    manifest.write(out)
    return 0


def _empirical_marginals(ds: Dataset) -> dict[str, np.ndarray]:
    out = {}
    for var in ds.schema.variables:
        col = ds.column(var.name)
        counts = np.bincount(col, minlength=var.cardinality).astype(np.float64)
        total = counts.sum()
        if total == 0:
            raise UsageError(f"no data to derive marginals for {var.name!r}")
        out[var.name] = counts / total
    return out


def cmd_fit(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("fit", config)
    manifest.add_input(args.structure)
    dag, schema = persist.load_dag(args.structure)
    yearly = [_load_complete(path, schema, manifest) for path in args.data]
    total_rows = sum(ds.n_rows for ds in yearly)

    alpha_flag = args.alpha if args.alpha is not None else "auto"
    if isinstance(alpha_flag, str) and alpha_flag.lower() == "auto":
        alpha = total_rows / 10000.0
        alpha_source = "auto: training rows / 10000"
    else:
        alpha = float(alpha_flag)
        alpha_source = "flag"
    if alpha <= 0:
        raise UsageError(f"alpha must be positive, got {alpha}")

    if args.marginals:
        manifest.add_input(args.marginals)
        with open(args.marginals, "r", encoding="utf-8") as fh:
            marg = {k: np.asarray(v, dtype=float) for k, v in json.load(fh).items()}
    else:
        marg = _empirical_marginals(yearly[0])
    prior = build_prior(marg, alpha)
    posteriors = sequential_fit(prior, schema, dag, yearly)
    for ds, post in zip(yearly, posteriors):
        path = out / f"model_{Path(ds.name).stem}.json"
        persist.save_model(post, path)
        manifest.add_output(path)
    final_path = out / "model.json"
    persist.save_model(posteriors[-1], final_path)
    manifest.add_output(final_path)
    manifest.record(alpha=alpha, alpha_source=alpha_source, training_rows=total_rows)
    manifest.write(out)
    return 0


def cmd_generate(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("generate", config)
    manifest.add_input(args.model)
    posterior = persist.load_model(args.model)
    if args.seed is None:
        raise UsageError("generate requires --seed")
    manifest.seed("generate", args.seed)
    net = posterior_mean_network(posterior)
    n = args.n if args.n is not None else 10000
    ds = forward_sample(net, n, args.seed, year=args.year if args.year is not None else 0)
    path = out / "data.csv"
    save_dataset(ds, path)
    manifest.add_output(path)
    manifest.record(rows=n)
    manifest.write(out)
    return 0


def cmd_riskmap(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("riskmap", config)
    manifest.add_input(args.model)
    posterior = persist.load_model(args.model)
    if args.seed is None:
        raise UsageError("riskmap requires --seed")
    manifest.seed("riskmap", args.seed)
    target, target_state = _parse_target(args.target)
    condition = _parse_evidence(args.cond, posterior.schema)
    axes = tuple(args.axes or ())
    spec = analytics.RiskMapSpec(
        target=target,
        target_state=target_state,
        condition=condition,
        axes=axes,
        n_param_samples=args.samples if args.samples is not None else 1000,
        level=args.level if args.level is not None else 0.9,
        seed=args.seed,
    )
    m = analytics.risk_map(posterior, spec)
    json_path = out / "riskmap.json"
    json_path.write_text(analytics.render_risk_map(m, "json"), encoding="utf-8")
    manifest.add_output(json_path)
    fmt = args.format or "text"
    if fmt == "svg":
        p = out / "riskmap.svg"
        p.write_text(analytics.render_risk_map(m, "svg"), encoding="utf-8")
        manifest.add_output(p)
    elif fmt == "text":
        p = out / "riskmap.txt"
        p.write_text(analytics.render_risk_map(m, "text"), encoding="utf-8")
        manifest.add_output(p)
    elif fmt != "json":
        raise UsageError(f"unknown format {fmt!r}")
    manifest.write(out)
    return 0


def cmd_influence(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("influence", config)
    manifest.add_input(args.model)
    posterior = persist.load_model(args.model)
    if args.seed is None:
        raise UsageError("influence requires --seed")
    manifest.seed("influence", args.seed)
    target, target_state = _parse_target(args.target)
    positives = _load_complete(args.positives, posterior.schema, manifest)
    report = analytics.influential_findings(
        posterior,
        positives,
        target,
        target_state,
        iterations=args.iterations if args.iterations is not None else 10,
        seed=args.seed,
    )
    json_path = out / "influence.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(analytics.influence_to_obj(report), fh, indent=1)
    manifest.add_output(json_path)
    txt_path = out / "influence.txt"
    txt_path.write_text(analytics.influence_summary(report), encoding="utf-8")
    manifest.add_output(txt_path)
    manifest.write(out)
    return 0


def cmd_validate(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("validate", config)
    manifest.add_input(args.model)
    posterior = persist.load_model(args.model)
    target, target_state = _parse_target(args.target)
    net = posterior_mean_network(posterior)
    data = _load_complete(args.data, posterior.schema, manifest)
    preds = evaluation.score_dataset(net, data, target, target_state)

    threshold_flag = args.threshold or "gmean"
    degenerate = False
    if isinstance(threshold_flag, str) and threshold_flag.lower() == "gmean":
        if args.threshold_data:
            thr_ds = _load_complete(args.threshold_data, posterior.schema, manifest)
            thr_preds = evaluation.score_dataset(net, thr_ds, target, target_state)
            source = f"gmean optimized on {Path(args.threshold_data).name}"
        else:
            thr_preds = preds
            source = "gmean optimized on the evaluation data"
        sel = evaluation.select_threshold_gmean(thr_preds)
        threshold, degenerate = sel.threshold, sel.degenerate
    else:
        threshold = float(threshold_flag)
        source = "flag"
    report = evaluation.metrics_report(
        preds,
        threshold,
        source,
        n_bins=args.bins if args.bins is not None else 10,
        degenerate_threshold=degenerate,
    )
    json_path = out / "metrics.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
    manifest.add_output(json_path)
    txt_path = out / "metrics.txt"
    txt_path.write_text(evaluation.metrics_summary(report), encoding="utf-8")
    manifest.add_output(txt_path)
    manifest.write(out)
    return 0


def cmd_query(args) -> int:
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("query", config)
    manifest.add_input(args.model)
    posterior = persist.load_model(args.model)
    net = posterior_mean_network(posterior)
    evidence = _parse_evidence(args.evidence, posterior.schema)
    res = query(net, evidence, args.target)
    payload = {
        "target": args.target,
        "states": list(posterior.schema.variable(args.target).states),
        "distribution": [float(p) for p in res.distribution],
        "evidence_probability": res.evidence_probability,
    }
    print(json.dumps(payload, indent=1))
    path = out / "query.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
    manifest.add_output(path)
    manifest.write(out)
    return 0


def cmd_reference_model(args) -> int:
    """Emit the bundled reference schema, structure, and prior-only model."""
    config = _merge_config(args)
    out = _out_dir(args)
    manifest = Manifest("reference-model", config)
    schema, dag = reference_crc_network()
    alpha = args.alpha if args.alpha is not None else PUBLISHED_ALPHA
    marginals = {v.name: POPULATION_MARGINALS.normalized(v.name) for v in schema.variables}
    prior = build_prior(marginals, float(alpha))
    posterior = initial_posterior(prior, schema, dag)
    schema_path = out / "schema.json"
    persist.save_schema(schema, schema_path)
    dag_path = out / "dag.json"
    persist.save_dag(dag, schema, dag_path)
    model_path = out / "model.json"
    persist.save_model(posterior, model_path)
    for p in (schema_path, dag_path, model_path):
        manifest.add_output(p)
    manifest.record(alpha=float(alpha))
    manifest.write(out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        model_path=args.model,
        positives_path=args.positives,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host or "127.0.0.1", port=args.port or 8000)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnrisk", description="Bayesian-network risk modeling toolkit"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser, with_seed=False):
        p.add_argument("--out", required=True, help="output directory (run.json lands here)")
        p.add_argument("--config", help="flat key = value configuration file")
        if with_seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("learn-structure", help="greedy hill climbing under arc constraints")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--constraints")
    p.add_argument("--initial")
    p.add_argument("--score", choices=["bds", "bdeu"], default=None)
    p.add_argument("--iss", type=float, default=None, help="imposed sample size (default 1)")
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=None)
    p.add_argument("--tie-break", dest="tie_break", choices=["lexicographic", "random"], default=None)
    common(p, with_seed=True)
    p.set_defaults(func=cmd_learn_structure)

    p = sub.add_parser("fit", help="sequential Dirichlet fit, one posterior per year file")
    p.add_argument("--data", action="append", required=True, help="repeat per year, in order")
    p.add_argument("--structure", required=True)
    p.add_argument("--alpha", default=None, help="'auto' (rows/10000) or a positive number")
    p.add_argument("--marginals", help="JSON {variable: [probabilities]} for the prior means")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("generate", help="forward-sample synthetic rows from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--year", type=int, default=None)
    common(p, with_seed=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("riskmap", help="interval-annotated risk map")
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True, help="VAR=STATE")
    p.add_argument("--cond", action="append", help="VAR=STATE, repeatable")
    p.add_argument("--axes", action="append", required=True, help="axis variable, repeatable (max 2)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--format", choices=["text", "svg", "json"], default=None)
    common(p, with_seed=True)
    p.set_defaults(func=cmd_riskmap)

    p = sub.add_parser("influence", help="randomized-evidence influence ranking")
    p.add_argument("--model", required=True)
    p.add_argument("--positives", required=True)
    p.add_argument("--target", required=True, help="VAR=STATE")
    p.add_argument("--iterations", type=int, default=None)
    common(p, with_seed=True)
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("validate", help="classification metrics and calibration")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True, help="VAR=STATE")
    p.add_argument("--threshold", default=None, help="'gmean' or a number in [0,1]")
    p.add_argument("--threshold-data", dest="threshold_data",
                   help="optimize the threshold on this file instead of --data")
    p.add_argument("--bins", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", help="exact conditional query against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence", action="append", help="VAR=STATE, repeatable")
    p.add_argument("--target", required=True)
    common(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("reference-model", help="emit the bundled reference schema/structure/prior model")
    p.add_argument("--alpha", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_reference_model)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--positives")
    p.add_argument("--ui", help="directory of built UI assets to serve")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DataError, persist.PersistError, ImpossibleEvidenceError,
            FileNotFoundError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - internal failure path
        import traceback

        traceback.print_exc()
        print(f"internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
