"""Command-line entry point.

Subcommands: prepare (split manifest from a CSV or named profile),
pca-variance, run (grid search into a record store), report (CSV tables
from a store), verify (property suite), datasets (profiles and where to
get the real files).
"""
from __future__ import annotations

import argparse
import os
import sys

from . import bench, datasets, verify
from .bench import RecordStore, RunSettings
from .errors import ConfigurationError, IngestionError, UsageError
from .pipeline import (load_csv, pca_fit, save_manifest, standardize_apply,
                       standardize_fit, stratified_split)


def parse_feature_range(text: str) -> tuple:
    """"2..6" -> (2, 6); a single number means that one count."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            k = int(parts[0])
            return (k, k)
        if len(parts) == 2:
            return (int(parts[0]), int(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"bad feature range {text!r}, expected N or LO..HI")


def _resolve_dataset(key: str):
    dataset, origin = datasets.resolve(key)
    print(f"dataset {key}: {dataset.n_rows} rows, "
          f"{dataset.n_features} features, "
          f"{dataset.positive_count()} positive ({origin})")
    return dataset


def _cmd_prepare(args) -> int:
    if args.profile:
        dataset = _resolve_dataset(args.profile)
        name = args.profile
    else:
        if not args.csv:
            raise UsageError("prepare needs a CSV path or --profile")
        if args.label is None or args.positive is None:
            raise UsageError("prepare <csv> needs --label and --positive")
        name = args.name or os.path.splitext(os.path.basename(args.csv))[0]
        dataset = load_csv(args.csv, args.label, args.positive, name=name,
                           drop_columns=tuple(args.drop))
    bundle = stratified_split(dataset, args.seed)
    out = args.out or f"{name}_split_{args.seed}.json"
    save_manifest(bundle, out)
    w0, w1 = bundle.class_weights()
    for split in ("train", "val", "test"):
        y = bundle.labels(split)
        print(f"  {split}: {y.size} rows, {int(y.sum())} positive")
    print(f"  class weights: ({w0:.4f}, {w1:.4f})")
    print(f"wrote {out}")
    return 0


def _cmd_pca_variance(args) -> int:
    dataset = _resolve_dataset(args.dataset)
    mean, std = standardize_fit(dataset.features)
    model = pca_fit(standardize_apply(dataset.features, mean, std))
    lines = [f"{i + 1},{v:.4f}"
             for i, v in enumerate(model.cumulative_ratio)]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("Component,CumulativeRatio\n")
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    else:
        print("Component,CumulativeRatio")
        print("\n".join(lines))
    return 0


def _cmd_run(args) -> int:
    settings = (RunSettings.from_document(args.config) if args.config
                else RunSettings())
    if args.seed is not None:
        settings.master_seed = args.seed
    if args.workers is not None:
        settings.workers = args.workers
    families = tuple(args.families.split(","))
    feature_range = (parse_feature_range(args.features)
                     if args.features else None)
    dataset = _resolve_dataset(args.dataset)
    store = RecordStore(args.store)
    done = len(store)
    if done:
        print(f"store {args.store}: {done} records, resuming")

    def progress(record):
        if record.error:
            tag = "ERROR " + record.error
        elif record.val is not None:
            tag = f"val F1 {record.val.f1:.3f}"
        else:
            tag = "meta"
        print(f"  k={record.k} {record.family} "
              f"{bench.canonical(record.config)} {tag}")

    new = bench.run_grid(args.dataset, dataset, store, settings,
                         families=families, feature_range=feature_range,
                         split_seed=args.split_seed, progress=progress)
    failed = sum(1 for r in new if r.error)
    print(f"{len(new)} new records ({failed} failed), "
          f"store now {len(store)}")
    return 0


def _cmd_report(args) -> int:
    store = RecordStore(args.store)
    if len(store) == 0:
        print(f"store {args.store} is empty", file=sys.stderr)
    only = args.dataset or None
    files = bench.emit_reports(store.records(), args.out, datasets=only)
    for f in files:
        print(f"wrote {f}")
    return 0


def _cmd_verify(args) -> int:
    results = verify.run_property_suite(fast=args.fast)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark}  {r.name:18s} {r.elapsed:7.2f}s  {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def _cmd_datasets(args) -> int:
    directory = datasets.data_dir()
    print(f"data directory ({datasets.DATA_DIR_ENV}): "
          f"{directory or 'not set'}")
    for key in datasets.PROFILES:
        p = datasets.profile(key)
        path = os.path.join(directory, p.filename) if directory else None
        origin = "real file present" if path and os.path.exists(path) \
            else "will use synthetic stand-in"
        print(f"\n{key}: {p.title}")
        print(f"  {p.n_rows} rows, {p.n_features} features, "
              f"{p.n_positive} positive; {origin}")
        if args.fetch:
            print(datasets.fetch_instructions(key))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmlgrid",
        description="Quantum and classical model grid search on small "
                    "clinical tabular datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build and save a split manifest")
    p.add_argument("csv", nargs="?", help="CSV file with a header row")
    p.add_argument("--profile", help="named dataset profile instead of a CSV")
    p.add_argument("--label", help="label column name")
    p.add_argument("--positive", help="cell value marking the positive class")
    p.add_argument("--drop", action="append", default=[],
                   help="column to drop (repeatable)")
    p.add_argument("--name", help="dataset name for the manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="manifest path")
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("pca-variance",
                       help="cumulative explained variance per component")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_pca_variance)

    p = sub.add_parser("run", help="run grid cells into a record store")
    p.add_argument("--dataset", required=True)
    p.add_argument("--features", help="feature counts, e.g. 2..6 or 4")
    p.add_argument("--families", default="qnn,qsvm,classical")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--split-seed", type=int, default=None,
                   help="split seed (defaults to the master seed)")
    p.add_argument("--store", default="records.jsonl")
    p.add_argument("--workers", type=int)
    p.add_argument("--config", help="settings document (key = value lines)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="emit CSV tables from a record store")
    p.add_argument("--store", default="records.jsonl")
    p.add_argument("--out", default="reports")
    p.add_argument("--dataset", action="append",
                   help="restrict to this dataset (repeatable)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--fast", action="store_true",
                   help="smaller instance counts")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("datasets", help="list dataset profiles")
    p.add_argument("--fetch", action="store_true",
                   help="print download instructions")
    p.set_defaults(func=_cmd_datasets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, IngestionError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
