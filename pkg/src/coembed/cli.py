"""Command-line interface.

Subcommands: ingest, train, recommend, evaluate, tune, sweep, bench,
similar. Every run resolves its settings as flag > config file >
built-in default (config files are flat ``key = value`` text, keys named
like the long flags without the leading dashes), derives all randomness
from one root seed, and drops a JSON run manifest next to each primary
output.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .data import (
    ColumnSpec,
    PreprocessRules,
    dataset_stats,
    ingest_interactions,
    load_snapshot,
    preprocess,
    save_snapshot,
    split_dataset,
)
from .errors import ConfigError, DataError, NumericError
from .evaluate import (
    EvalCache,
    GridSpec,
    benchmark_scaling,
    describe_strategy,
    evaluate,
    grid_search,
    sensitivity_sweep,
)
from .model import (
    TrainConfig,
    export_embeddings,
    export_embeddings_text,
    import_embeddings,
    train,
)
from .recommend import StrategyConfig, recommend_for_user, similarity_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclasses.dataclass(slots=True)
class RunManifest:
    """Provenance record written beside each primary output."""

    command: str
    version: str
    seed: int
    config: dict
    inputs: dict
    outputs: list
    timings: dict

    def write(self, anchor_path: str) -> str:
        path = anchor_path + ".manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _write_manifest(args: argparse.Namespace, command: str, inputs: list[str],
                    outputs: list[str], timings: dict) -> None:
    if not outputs:
        return
    config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "config") and not k.startswith("_")
    }
    manifest = RunManifest(
        command=command,
        version=__version__,
        seed=int(getattr(args, "seed", 0)),
        config=config,
        inputs={p: _sha256(p) for p in inputs if p and os.path.exists(p)},
        outputs=list(outputs),
        timings=timings,
    )
    path = manifest.write(outputs[0])
    logger.info("manifest written to %s", path)


def _parse_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` text; blank lines and # comments ignored."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _parse_consumers(text: str) -> list[int | None]:
    out: list[int | None] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token.lower() == "all":
            out.append(None)
        else:
            try:
                out.append(int(token))
            except ValueError:
                raise ConfigError(f"consumer counts must be integers or 'all', got {token!r}") from None
    return out


def _parse_flags(text: str) -> list[bool]:
    return [_parse_bool(tok) for tok in text.split(",") if tok.strip()]


def _parse_column(text: str) -> int | str:
    return int(text) if text.lstrip("-").isdigit() else text


_CONVERTERS = {
    "float": float,
    "int": int,
    "str": str,
    "bool": _parse_bool,
    "floats": _parse_floats,
    "ints": _parse_ints,
    "consumers": _parse_consumers,
    "flags": _parse_flags,
    "column": _parse_column,
}


class _Command:
    """One subcommand: wires flags, config-file defaults, and the body."""

    def __init__(self, subparsers, name: str, help_text: str):
        self.parser = subparsers.add_parser(name, help=help_text)
        self.name = name
        self.types: dict[str, str] = {}

    def flag(self, name: str, kind: str = "str", default=None, required: bool = False,
             help: str = "", choices=None):
        dest = name.lstrip("-").replace("-", "_")
        self.types[dest] = kind
        kwargs: dict = {"default": default, "help": help, "dest": dest}
        if choices:
            kwargs["choices"] = choices
        if kind == "bool":
            self.parser.add_argument(name, action="store_true", **{k: v for k, v in kwargs.items() if k != "default"})
            self.parser.set_defaults(**{dest: bool(default)})
        else:
            kwargs["type"] = _CONVERTERS[kind]
            kwargs["required"] = required
            self.parser.add_argument(name, **kwargs)
        return self

    def apply_config(self, args: argparse.Namespace, file_values: dict[str, str],
                     explicit: set[str]) -> None:
        for key, raw in file_values.items():
            if key not in self.types:
                raise ConfigError(f"unknown config key {key!r} for command {self.name}")
            if key in explicit:
                continue
            setattr(args, key, _CONVERTERS[self.types[key]](raw))


def _add_common(cmd: _Command) -> None:
    cmd.flag("--config", "str", help="flat key=value settings file (flags win)")
    cmd.flag("--seed", "int", default=0, help="root seed for all randomness")
    cmd.flag("--verbose", "bool", default=False, help="debug logging")


def _add_train_flags(cmd: _Command) -> None:
    cmd.flag("--dim", "int", default=100, help="embedding dimensionality")
    cmd.flag("--learning-rate", "float", default=0.25)
    cmd.flag("--epochs", "int", default=50)
    cmd.flag("--subsample", "float", default=1e-6, help="frequent-item subsampling threshold")
    cmd.flag("--negatives", "int", default=5, help="negative draws per positive")
    cmd.flag("--neg-exponent", "float", default=0.75, help="degree exponent for negative sampling")
    cmd.flag("--regularization", "float", default=0.1)
    cmd.flag("--workers", "int", default=0, help="0 = deterministic single thread")


def _add_split_flags(cmd: _Command) -> None:
    cmd.flag("--ratios", "floats", default=[0.8, 0.1, 0.1],
             help="train,validation,test ratios (must sum to 1)")


def _add_strategy_flags(cmd: _Command) -> None:
    cmd.flag("--strategy", "str", default="item_item",
             choices=["user_item", "item_item", "weighted", "combined", "ensemble"])
    cmd.flag("--top-n", "int", default=10)
    cmd.flag("--user-weight", "float", default=0.5)
    cmd.flag("--item-weight", "float", default=0.5)
    cmd.flag("--top-consumers", "str", default="all", help="consumer count for combined ('all' or int)")
    cmd.flag("--depth", "int", default=30, help="per-method list length for ensemble voting")
    cmd.flag("--use-method-weights", "bool", default=False)
    cmd.flag("--use-rank-weights", "bool", default=False)
    cmd.flag("--rank-weight-form", "str", default="log", choices=["log", "linear"],
             help="rank discount shape for ensemble voting")
    cmd.flag("--method-weights", "floats", default=None,
             help="four comma-separated weights (user_item,item_item,weighted,combined)")


def _strategy_from_args(args: argparse.Namespace) -> StrategyConfig:
    consumers = None if args.top_consumers.lower() == "all" else int(args.top_consumers)
    return StrategyConfig(
        kind=args.strategy,
        top_n=args.top_n,
        user_weight=args.user_weight,
        item_weight=args.item_weight,
        top_consumers=consumers,
        depth=args.depth,
        use_method_weights=args.use_method_weights,
        use_rank_weights=args.use_rank_weights,
        rank_weight_form=args.rank_weight_form,
    )


def _train_config_from_args(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        dim=args.dim,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        subsample=args.subsample,
        negatives=args.negatives,
        neg_exponent=args.neg_exponent,
        regularization=args.regularization,
        seed=args.seed,
        workers=args.workers,
    )


def _require_file(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


def _load_serving_dataset(args: argparse.Namespace, model):
    """Dataset matching the embedding id space.

    The snapshot itself if counts line up; otherwise the train partition
    of the recorded split (--split-seed / --ratios must match training).
    """
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    if ds.user_count == model.user_count and ds.item_count == model.item_count:
        return ds
    if args.split_seed is not None:
        split = split_dataset(ds, tuple(args.ratios), args.split_seed)
        train_ds = split.train
        if train_ds.user_count == model.user_count and train_ds.item_count == model.item_count:
            return train_ds
        raise DataError(
            "embeddings do not match the snapshot's split train partition "
            f"({model.user_count}x{model.item_count} vs {train_ds.user_count}x{train_ds.item_count})"
        )
    raise DataError(
        "embeddings do not match the snapshot "
        f"({model.user_count}x{model.item_count} vs {ds.user_count}x{ds.item_count}); "
        "pass --split-seed if they were trained on a split"
    )


def _out_stream(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def cmd_ingest(args: argparse.Namespace) -> int:
    started = time.time()
    _require_file(args.input, "input file")
    spec = ColumnSpec(
        delimiter=args.delimiter,
        has_header=args.header,
        user_col=args.user_col,
        item_col=args.item_col,
        rating_col=args.rating_col,
        kind_col=args.kind_col,
        timestamp_col=args.timestamp_col,
    )
    rules = PreprocessRules(
        interaction_kind=args.kind,
        min_user_degree=args.min_user_degree,
        min_item_degree=args.min_item_degree,
    )
    raw = ingest_interactions(args.input, spec)
    ds = preprocess(raw, rules)
    save_snapshot(ds, args.output)
    stats = dataset_stats(ds)
    lines = [f"lines_read\t{raw.lines_read}", f"lines_skipped\t{raw.lines_skipped}"]
    for key in ("user_count", "item_count", "interaction_count"):
        lines.append(f"{key}\t{stats[key]}")
    lines.append(f"sparsity\t{stats['sparsity']:.6f}")
    for key, value in stats["user_consumption"].items():
        lines.append(f"user_consumption_{key}\t{value:g}")
    text = "\n".join(lines)
    print(text)
    if args.stats_out:
        with open(args.stats_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    _write_manifest(args, "ingest", [args.input], [args.output],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    started = time.time()
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    cfg = _train_config_from_args(args)
    if args.no_split:
        train_ds = ds
    else:
        split = split_dataset(ds, tuple(args.ratios), args.seed)
        train_ds = split.train
    t0 = time.time()
    model, trace = train(train_ds, cfg)
    train_seconds = time.time() - t0
    export_embeddings(model, args.output)
    outputs = [args.output]
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            for epoch, loss in enumerate(trace):
                fh.write(f"{epoch}\t{loss:.10g}\n")
        outputs.append(args.trace_out)
    if args.text_out:
        export_embeddings_text(model, train_ds.user_keys, train_ds.item_keys, args.text_out)
        outputs.append(args.text_out)
    logger.info("trained %d users x %d items (dim %d) in %.1fs",
                model.user_count, model.item_count, model.dim, train_seconds)
    _write_manifest(args, "train", [args.snapshot], outputs,
                    {"train_seconds": train_seconds, "total_seconds": time.time() - started})
    return EXIT_OK


def cmd_recommend(args: argparse.Namespace) -> int:
    started = time.time()
    model = import_embeddings(_require_file(args.embeddings, "embedding file"))
    ds = _load_serving_dataset(args, model)
    strategy = _strategy_from_args(args)
    strategy.validate()
    if strategy.use_method_weights and not args.method_weights:
        raise ConfigError("--use-method-weights requires --method-weights")

    if args.users:
        with open(_require_file(args.users, "user list"), "r", encoding="utf-8") as fh:
            keys = [line.strip() for line in fh if line.strip()]
    else:
        keys = ds.user_keys

    from .recommend import combine_embeddings

    augmented = None
    if strategy.kind in ("combined", "ensemble"):
        augmented = combine_embeddings(model, ds, strategy.top_consumers)

    out = _out_stream(args.output)
    try:
        for key in keys:
            try:
                u = ds.user_index(key)
            except DataError as exc:
                print(f"warning: {exc}", file=sys.stderr)
                continue
            ranking = recommend_for_user(
                model, ds, u, strategy, augmented=augmented,
                method_weights=args.method_weights,
            )
            for rank, (item, score) in enumerate(zip(ranking.items, ranking.scores), 1):
                out.write(f"{key}\t{rank}\t{ds.item_keys[int(item)]}\t{score:.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    _write_manifest(args, "recommend",
                    [args.snapshot, args.embeddings, args.users or ""],
                    [args.output] if args.output else [],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    started = time.time()
    model = import_embeddings(_require_file(args.embeddings, "embedding file"))
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    split = split_dataset(ds, tuple(args.ratios), args.split_seed)
    strategy = _strategy_from_args(args)
    report = evaluate(split, model, strategy, eval_set=args.eval_set,
                      method_weights=args.method_weights)
    out = _out_stream(args.report_out)
    try:
        out.write("\n".join(report.lines()) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    _write_manifest(args, "evaluate", [args.snapshot, args.embeddings],
                    [args.report_out] if args.report_out else [],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    started = time.time()
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    split = split_dataset(ds, tuple(args.ratios), args.seed)
    model_grid = GridSpec(
        dims=tuple(args.grid_dims),
        negatives=tuple(args.grid_negatives),
        neg_exponents=tuple(args.grid_exponents),
        selection_metric=args.selection_metric,
        selection_n=args.selection_n,
    )
    strategy_grid = GridSpec(
        user_weights=tuple(args.grid_user_weights),
        item_weights=tuple(args.grid_item_weights),
        consumer_counts=tuple(args.grid_consumers),
        depths=tuple(args.grid_depths),
        method_weight_flags=tuple(args.grid_method_weight_flags),
        rank_weight_flags=tuple(args.grid_rank_weight_flags),
        selection_metric=args.selection_metric,
        selection_n=args.selection_n,
    )
    base = _train_config_from_args(args)
    result = grid_search(split, model_grid, strategy_grid, base_config=base)

    rows_path = args.results_out
    with open(rows_path, "w", encoding="utf-8") as fh:
        fh.write("dim\tnegatives\tneg_exponent\tstrategy\tvalue\tstatus\n")
        for row in result.rows:
            strat = describe_strategy(row.strategy) if row.strategy else "-"
            fh.write(
                f"{row.train_config.dim}\t{row.train_config.negatives}"
                f"\t{row.train_config.neg_exponent}\t{strat}\t{row.value:.6f}\t{row.status}\n"
            )
    outputs = [rows_path]
    if args.best_out:
        best = result.best_strategy
        lines = [
            f"dim = {result.best_train.dim}",
            f"negatives = {result.best_train.negatives}",
            f"neg-exponent = {result.best_train.neg_exponent}",
            f"strategy = {best.kind}",
            f"top-n = {best.top_n}",
            f"user-weight = {best.user_weight}",
            f"item-weight = {best.item_weight}",
            f"top-consumers = {'all' if best.top_consumers is None else best.top_consumers}",
            f"depth = {best.depth}",
            f"use-method-weights = {'yes' if best.use_method_weights else 'no'}",
            f"use-rank-weights = {'yes' if best.use_rank_weights else 'no'}",
        ]
        if result.best_method_weights:
            joined = ",".join(f"{w:.6f}" for w in result.best_method_weights)
            lines.append(f"method-weights = {joined}")
        with open(args.best_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        outputs.append(args.best_out)
    print(
        f"best: dim={result.best_train.dim} negatives={result.best_train.negatives} "
        f"neg_exponent={result.best_train.neg_exponent} "
        f"strategy={describe_strategy(result.best_strategy)} "
        f"{result.selection_metric}@{result.selection_n}={result.best_value:.4f}"
    )
    _write_manifest(args, "tune", [args.snapshot], outputs,
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.time()
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    split = split_dataset(ds, tuple(args.ratios), args.seed)
    fixed = _train_config_from_args(args)
    strategy = _strategy_from_args(args)
    result = sensitivity_sweep(
        split, args.parameter, args.values, fixed,
        strategy=strategy, metric=args.metric, metric_n=args.metric_n,
    )
    out = _out_stream(args.output)
    try:
        out.write(f"parameter\t{result.parameter}\n")
        out.write(f"value\t{args.metric}@{args.metric_n}\n")
        for value, score in zip(result.values, result.metric_values):
            out.write(f"{value:g}\t{score:.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    _write_manifest(args, "sweep", [args.snapshot],
                    [args.output] if args.output else [],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    started = time.time()
    ds = load_snapshot(_require_file(args.snapshot, "snapshot"))
    cfg = _train_config_from_args(args)
    report = benchmark_scaling(ds, cfg, fractions=tuple(args.fractions),
                               repetitions=args.repetitions, seed=args.seed)
    out = _out_stream(args.output)
    try:
        out.write("fraction\tinteractions\tmean_seconds\tstd_seconds\n")
        for row in report.rows:
            out.write(f"{row.fraction:g}\t{row.interactions}\t{row.mean_seconds:.4f}"
                      f"\t{row.std_seconds:.4f}\n")
        if report.slope is not None:
            out.write(f"fit_slope_seconds_per_interaction\t{report.slope:.3e}\n")
            out.write(f"fit_intercept_seconds\t{report.intercept:.4f}\n")
            out.write(f"fit_r_squared\t{report.r_squared:.4f}\n")
        else:
            out.write("fit\tundefined (single size)\n")
    finally:
        if out is not sys.stdout:
            out.close()
    _write_manifest(args, "bench", [args.snapshot],
                    [args.output] if args.output else [],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def cmd_similar(args: argparse.Namespace) -> int:
    started = time.time()
    model = import_embeddings(_require_file(args.embeddings, "embedding file"))
    ds = _load_serving_dataset(args, model)
    with open(_require_file(args.seeds, "seed item list"), "r", encoding="utf-8") as fh:
        seed_keys = [line.strip() for line in fh if line.strip()]
    entries = similarity_table(model, ds, seed_keys, args.k)
    out = _out_stream(args.output)
    try:
        for entry in entries:
            if entry.error:
                print(f"warning: {entry.error}", file=sys.stderr)
                continue
            for rank, (key, sim) in enumerate(entry.neighbors, 1):
                out.write(f"{entry.seed_key}\t{rank}\t{key}\t{sim:.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    _write_manifest(args, "similar", [args.snapshot, args.embeddings, args.seeds],
                    [args.output] if args.output else [],
                    {"total_seconds": time.time() - started})
    return EXIT_OK


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, _Command]]:
    parser = argparse.ArgumentParser(
        prog="coembed",
        description="Joint user/item embeddings for implicit-feedback recommendation",
    )
    parser.add_argument("--version", action="version", version=f"coembed {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, _Command] = {}

    cmd = _Command(subparsers, "ingest", "parse, clean, and snapshot an interaction file")
    _add_common(cmd)
    cmd.flag("--input", "str", required=True, help="delimited interaction file")
    cmd.flag("--output", "str", required=True, help="snapshot file to write")
    cmd.flag("--delimiter", "str", default=",")
    cmd.flag("--header", "bool", default=False, help="first line is a header")
    cmd.flag("--user-col", "column", default=0)
    cmd.flag("--item-col", "column", default=1)
    cmd.flag("--rating-col", "column", default=None)
    cmd.flag("--kind-col", "column", default=None)
    cmd.flag("--timestamp-col", "column", default=None)
    cmd.flag("--kind", "str", default=None, help="keep only this interaction kind")
    cmd.flag("--min-user-degree", "int", default=2)
    cmd.flag("--min-item-degree", "int", default=2)
    cmd.flag("--stats-out", "str", default=None)
    cmd.parser.set_defaults(func=cmd_ingest)
    commands["ingest"] = cmd

    cmd = _Command(subparsers, "train", "fit embeddings from a snapshot")
    _add_common(cmd)
    _add_train_flags(cmd)
    _add_split_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--output", "str", required=True, help="embedding file to write")
    cmd.flag("--no-split", "bool", default=False, help="train on the full snapshot")
    cmd.flag("--trace-out", "str", default=None, help="per-epoch mean loss file")
    cmd.flag("--text-out", "str", default=None, help="also export embeddings as text")
    cmd.parser.set_defaults(func=cmd_train)
    commands["train"] = cmd

    cmd = _Command(subparsers, "recommend", "write top-N recommendations per user")
    _add_common(cmd)
    _add_strategy_flags(cmd)
    _add_split_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--embeddings", "str", required=True)
    cmd.flag("--users", "str", default=None, help="file of user keys (default: all)")
    cmd.flag("--split-seed", "int", default=None,
             help="re-derive the training split when embeddings were split-trained")
    cmd.flag("--output", "str", default=None, help="default: stdout")
    cmd.parser.set_defaults(func=cmd_recommend)
    commands["recommend"] = cmd

    cmd = _Command(subparsers, "evaluate", "score a strategy against a held-out set")
    _add_common(cmd)
    _add_strategy_flags(cmd)
    _add_split_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--embeddings", "str", required=True)
    cmd.flag("--split-seed", "int", default=0)
    cmd.flag("--eval-set", "str", default="validation", choices=["validation", "test"])
    cmd.flag("--report-out", "str", default=None, help="default: stdout")
    cmd.parser.set_defaults(func=cmd_evaluate)
    commands["evaluate"] = cmd

    cmd = _Command(subparsers, "tune", "grid-search model and strategy hyperparameters")
    _add_common(cmd)
    _add_train_flags(cmd)
    _add_split_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--grid-dims", "ints", default=[50, 100, 150])
    cmd.flag("--grid-negatives", "ints", default=[5, 10, 15])
    cmd.flag("--grid-exponents", "floats", default=[-1.0, -0.5, 0.5, 1.0])
    cmd.flag("--grid-user-weights", "floats", default=[0.1, 0.25, 0.5, 0.75, 0.9])
    cmd.flag("--grid-item-weights", "floats", default=[0.1, 0.25, 0.5, 0.75, 0.9])
    cmd.flag("--grid-consumers", "consumers", default=[1, 5, 10, 15, None])
    cmd.flag("--grid-depths", "ints", default=[15, 30, 45])
    cmd.flag("--grid-method-weight-flags", "flags", default=[True, False])
    cmd.flag("--grid-rank-weight-flags", "flags", default=[True, False])
    cmd.flag("--selection-metric", "str", default="ndcg",
             choices=["precision", "recall", "f1", "ndcg"])
    cmd.flag("--selection-n", "int", default=15)
    cmd.flag("--results-out", "str", required=True, help="grid result table")
    cmd.flag("--best-out", "str", default=None, help="best config, reusable via --config")
    cmd.parser.set_defaults(func=cmd_tune)
    commands["tune"] = cmd

    cmd = _Command(subparsers, "sweep", "sensitivity curve for one hyperparameter")
    _add_common(cmd)
    _add_train_flags(cmd)
    _add_split_flags(cmd)
    _add_strategy_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--parameter", "str", required=True,
             choices=["learning_rate", "dim", "epochs", "subsample", "negatives",
                      "neg_exponent", "regularization"])
    cmd.flag("--values", "floats", required=True)
    cmd.flag("--metric", "str", default="ndcg", choices=["precision", "recall", "f1", "ndcg"])
    cmd.flag("--metric-n", "int", default=15)
    cmd.flag("--output", "str", default=None, help="default: stdout")
    cmd.parser.set_defaults(func=cmd_sweep)
    commands["sweep"] = cmd

    cmd = _Command(subparsers, "bench", "training-time scaling benchmark")
    _add_common(cmd)
    _add_train_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--fractions", "floats", default=[0.25, 0.5, 0.75, 1.0])
    cmd.flag("--repetitions", "int", default=3)
    cmd.flag("--output", "str", default=None, help="default: stdout")
    cmd.parser.set_defaults(func=cmd_bench)
    commands["bench"] = cmd

    cmd = _Command(subparsers, "similar", "nearest neighbors for seed items")
    _add_common(cmd)
    _add_split_flags(cmd)
    cmd.flag("--snapshot", "str", required=True)
    cmd.flag("--embeddings", "str", required=True)
    cmd.flag("--seeds", "str", required=True, help="file of item keys, one per line")
    cmd.flag("--k", "int", default=3, help="neighbors per seed")
    cmd.flag("--split-seed", "int", default=None)
    cmd.flag("--output", "str", default=None, help="default: stdout")
    cmd.parser.set_defaults(func=cmd_similar)
    commands["similar"] = cmd

    return parser, commands


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if getattr(args, "config", None):
            explicit = {
                tok.split("=", 1)[0].lstrip("-").replace("-", "_")
                for tok in argv if tok.startswith("--")
            }
            commands[args.command].apply_config(
                args, _parse_config_file(args.config), explicit
            )
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
