"""Grid-search orchestration, the record store, selection, and reports.

A record store is one append-only file of line-delimited JSON records,
one per grid cell, written in deterministic enumeration order so two runs
with the same master seed produce byte-identical stores. Wall-clock
timings never enter the store (they would break that guarantee); they go
to a sidecar file next to it.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import baselines, qnn, svm
from .checkpoint import load_document
from .circuit import EncodingSpec
from .errors import UsageError
from .metrics import Metrics, evaluate
from .pipeline import SplitBundle, stratified_split
from .qkernel import cross_gram, gram_matrix

FAMILIES = ("qnn", "qsvm", "classical")

# train-set F1 gate used when filtering candidate models per dataset
THRESHOLDS = {"heart_failure": 0.50, "diabetes": 0.65, "prostate": 0.75}

# inclusive feature-count sweep per dataset
FEATURE_RANGES = {"heart_failure": (2, 5), "diabetes": (2, 6),
                  "prostate": (2, 6)}

ENCODING_LABELS = {"angle": "Angle", "z": "Z", "zz_a": "ZZ",
                   "zz_b": "ZZ-qiskit"}

MODEL_LABELS = {"logistic": "LogisticRegression", "tree": "DecisionTree",
                "forest": "RandomForest"}


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cell_seed(master_seed: int, dataset: str, family: str, config: dict,
              split_seed: int) -> int:
    payload = f"{master_seed}|{split_seed}|{dataset}|{family}|{canonical(config)}"
    return int.from_bytes(
        hashlib.sha256(payload.encode()).digest()[:8], "big")


# ------------------------------------------------------------------- grids

def axis_sequences():
    """All 15 ordered non-repeating subsets of the rotation axes."""
    out = []
    for r in (1, 2, 3):
        out.extend("".join(p) for p in itertools.permutations("XYZ", r))
    return out


def qnn_grid():
    return [{"sequence": seq, "reupload": ru, "ansatz": a}
            for seq in axis_sequences()
            for ru in (False, True)
            for a in ("basic", "strongly")]


def qsvm_grid():
    return [{"encoding": e, "repetitions": r}
            for e in ("angle", "z", "zz_a", "zz_b")
            for r in (1, 2, 3)]


def classical_grid():
    cells = [{"model": m} for m in ("logistic", "tree", "forest")]
    cells += [{"model": "svm", "kernel": k}
              for k in ("linear", "poly3", "rbf", "sigmoid")]
    return cells


GRIDS = {"qnn": qnn_grid, "qsvm": qsvm_grid, "classical": classical_grid}


# ----------------------------------------------------------------- records

def metrics_dict(m: Metrics) -> dict:
    return {"tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn,
            "precision": m.precision, "recall": m.recall, "f1": m.f1}


def metrics_from_dict(d) -> Metrics:
    return Metrics(**d) if d is not None else None


@dataclass
class ExperimentRecord:
    dataset: str
    family: str
    k: int
    config: dict
    split_seed: int
    seed: int
    n_parameters: int = 0
    train: Metrics = None
    val: Metrics = None
    test: Metrics = None
    extra: dict = field(default_factory=dict)
    error: str = None
    wall_clock: float = None    # sidecar only, never serialized

    def key(self) -> str:
        return canonical([self.dataset, self.family, self.k, self.config,
                          self.split_seed])

    def to_line(self) -> str:
        return canonical({
            "dataset": self.dataset, "family": self.family, "k": self.k,
            "config": self.config, "split_seed": self.split_seed,
            "seed": self.seed, "n_parameters": self.n_parameters,
            "train": metrics_dict(self.train) if self.train else None,
            "val": metrics_dict(self.val) if self.val else None,
            "test": metrics_dict(self.test) if self.test else None,
            "extra": self.extra, "error": self.error,
        })

    @staticmethod
    def from_line(line: str) -> "ExperimentRecord":
        d = json.loads(line)
        return ExperimentRecord(
            dataset=d["dataset"], family=d["family"], k=d["k"],
            config=d["config"], split_seed=d["split_seed"], seed=d["seed"],
            n_parameters=d["n_parameters"],
            train=metrics_from_dict(d["train"]),
            val=metrics_from_dict(d["val"]),
            test=metrics_from_dict(d["test"]),
            extra=d["extra"], error=d["error"])


class RecordStore:
    """Append-only line store; loading an existing file makes reruns skip
    completed cells."""

    def __init__(self, path):
        self.path = str(path)
        self._records = []
        self._keys = set()
        if os.path.exists(self.path):
            with open(self.path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._append_memory(ExperimentRecord.from_line(line))

    def _append_memory(self, record):
        self._records.append(record)
        self._keys.add(record.key())

    def __len__(self):
        return len(self._records)

    def records(self):
        return list(self._records)

    def has(self, record_key: str) -> bool:
        return record_key in self._keys

    def append(self, record: ExperimentRecord) -> None:
        with open(self.path, "a") as fh:
            fh.write(record.to_line() + "\n")
        if record.wall_clock is not None:
            with open(self.path + ".timings", "a") as fh:
                fh.write(f"{record.key()}\t{record.wall_clock:.3f}\n")
        self._append_memory(record)


# ---------------------------------------------------------------- settings

@dataclass
class RunSettings:
    master_seed: int = 0
    svm_c: float = 1.0
    qnn_epochs: int = 100
    qnn_patience: int = 5
    qnn_learning_rate: float = 0.01
    qnn_batch_size: int = 32
    qnn_start_layers: int = 2
    qnn_max_layers: int = 100
    qnn_stall_limit: int = None
    workers: int = 1

    @staticmethod
    def from_document(path) -> "RunSettings":
        doc = load_document(path)
        known = set(RunSettings.__dataclass_fields__)
        bad = set(doc) - known
        if bad:
            raise UsageError(f"{path}: unknown settings {sorted(bad)}, "
                             f"known: {sorted(known)}")
        return RunSettings(**doc)


# ------------------------------------------------------------------- cells

def _split_arrays(bundle: SplitBundle, k: int):
    return {s: (bundle.features(s, k), bundle.labels(s))
            for s in SplitBundle.SPLITS}


def _svm_eval(gram, ytr, rows_by_split, labels_by_split, c, weights):
    ypm = np.where(ytr == 1, 1, -1)
    model = svm.solve_dual(svm.SvmProblem(gram, ypm, c, weights))
    out = {}
    for split, rows in rows_by_split.items():
        pred = (svm.predict(model, rows) > 0).astype(int)
        out[split] = evaluate(labels_by_split[split], pred)
    extra = {"converged": bool(model.converged), "sweeps": int(model.sweeps)}
    return len(model.support), out, extra


def _tree_nodes(node) -> int:
    if node.is_leaf():
        return 0
    return 1 + _tree_nodes(node.left) + _tree_nodes(node.right)


def run_cell(dataset_key: str, bundle: SplitBundle, family: str,
             config: dict, k: int, seed: int,
             settings: RunSettings) -> ExperimentRecord:
    record = ExperimentRecord(dataset_key, family, k, config,
                              bundle.seed, seed)
    started = time.perf_counter()
    try:
        arrays = _split_arrays(bundle, k)
        (Xtr, ytr) = arrays["train"]
        weights = bundle.class_weights()
        labels_by_split = {s: arrays[s][1] for s in arrays}

        if family == "qsvm":
            enc = EncodingSpec(config["encoding"],
                               repetitions=config["repetitions"])
            gram = gram_matrix(enc, Xtr)
            rows = {"train": gram,
                    "val": cross_gram(enc, arrays["val"][0], Xtr),
                    "test": cross_gram(enc, arrays["test"][0], Xtr)}
            n_par, split_metrics, extra = _svm_eval(
                gram, ytr, rows, labels_by_split, settings.svm_c, weights)

        elif family == "classical":
            model_kind = config["model"]
            if model_kind == "svm":
                kind = config["kernel"]
                gram = svm.kernel_matrix(kind, Xtr, Xtr)
                rows = {"train": gram,
                        "val": svm.kernel_matrix(kind, arrays["val"][0], Xtr),
                        "test": svm.kernel_matrix(kind, arrays["test"][0], Xtr)}
                n_par, split_metrics, extra = _svm_eval(
                    gram, ytr, rows, labels_by_split, settings.svm_c, weights)
            elif model_kind == "logistic":
                model = baselines.fit_logistic(Xtr, ytr, weights)
                split_metrics = {s: evaluate(y, baselines.predict_logistic(model, X))
                                 for s, (X, y) in arrays.items()}
                n_par, extra = k + 1, {}
            elif model_kind == "tree":
                model = baselines.fit_tree(Xtr, ytr, weights)
                split_metrics = {s: evaluate(y, baselines.predict_tree(model, X))
                                 for s, (X, y) in arrays.items()}
                n_par, extra = _tree_nodes(model), {}
            elif model_kind == "forest":
                model = baselines.fit_forest(Xtr, ytr, weights, seed=seed)
                split_metrics = {s: evaluate(y, baselines.predict_forest(model, X))
                                 for s, (X, y) in arrays.items()}
                n_par = sum(_tree_nodes(t) for t in model.trees)
                extra = {}
            else:
                raise UsageError(f"unknown classical model {model_kind!r}")

        elif family == "qnn":
            cfg = qnn.QnnConfig(
                n_features=k,
                encoding_sequence=tuple(config["sequence"]),
                reupload=config["reupload"],
                ansatz=config["ansatz"],
                n_layers=settings.qnn_start_layers,
                seed=seed)
            growth = qnn.grow_layers(
                cfg, weights, arrays["train"], arrays["val"],
                start_layers=settings.qnn_start_layers,
                max_layers=settings.qnn_max_layers,
                stall_limit=settings.qnn_stall_limit,
                epochs=settings.qnn_epochs,
                patience=settings.qnn_patience,
                learning_rate=settings.qnn_learning_rate,
                batch_size=settings.qnn_batch_size)
            best = growth.best_trial()
            model = best.model
            split_metrics = {s: evaluate(y, qnn.predict(model, X))
                             for s, (X, y) in arrays.items()}
            n_par = len(model.parameters)
            extra = {"n_layers": growth.best_n_layers,
                     "layer_trials": len(growth.trials),
                     "best_epoch": best.report.best_epoch}
        else:
            raise UsageError(f"unknown family {family!r}")

        record.n_parameters = int(n_par)
        record.train = split_metrics["train"]
        record.val = split_metrics["val"]
        record.test = split_metrics["test"]
        record.extra = extra
    except Exception as exc:           # cell failures are data, not crashes
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_clock = time.perf_counter() - started
    return record


def variance_record(dataset_key: str, bundle: SplitBundle) -> ExperimentRecord:
    """PCA curve for the split's train covariance, stored alongside model
    cells so reports need nothing but the store."""
    return ExperimentRecord(
        dataset_key, "pca", 0, {}, bundle.seed, 0,
        extra={"cumulative_ratio": [float(v)
                                    for v in bundle.pca.cumulative_ratio]})


def run_grid(dataset_key: str, dataset, store: RecordStore,
             settings: RunSettings, families=FAMILIES,
             feature_range: tuple = None, split_seed: int = None,
             progress=None) -> list:
    """Runs every (k, family, config) cell not already in the store.
    Enumeration order is fixed; with workers > 1 cells are computed
    concurrently but appended in enumeration order."""
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise UsageError(f"unknown families {sorted(unknown)}")
    if split_seed is None:
        split_seed = settings.master_seed
    if feature_range is None:
        feature_range = FEATURE_RANGES.get(
            dataset_key, (2, min(6, dataset.n_features)))
    lo, hi = feature_range
    if not 1 <= lo <= hi <= dataset.n_features:
        raise UsageError(f"bad feature range {feature_range} for "
                         f"{dataset.n_features} features")

    bundle = stratified_split(dataset, split_seed)

    jobs = []
    meta = variance_record(dataset_key, bundle)
    if not store.has(meta.key()):
        jobs.append(("pca", None, 0, meta))
    for k in range(lo, hi + 1):
        for family in (f for f in FAMILIES if f in families):
            for config in GRIDS[family]():
                probe = ExperimentRecord(dataset_key, family, k, config,
                                         split_seed, 0)
                if not store.has(probe.key()):
                    jobs.append((family, config, k, None))

    def compute(job):
        family, config, k, ready = job
        if ready is not None:
            return ready
        seed = cell_seed(settings.master_seed, dataset_key, family, config,
                         split_seed)
        return run_cell(dataset_key, bundle, family, config, k, seed,
                        settings)

    new_records = []
    if settings.workers > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            results = pool.map(compute, jobs)
            for record in results:
                store.append(record)
                new_records.append(record)
    else:
        for job in jobs:
            record = compute(job)
            store.append(record)
            new_records.append(record)
    if progress is not None:
        for record in new_records:
            progress(record)
    return new_records


# --------------------------------------------------------------- selection

@dataclass(frozen=True)
class SelectionPolicy:
    train_f1_threshold: float = 0.5
    # captions describe the train-F1 gate for the QNN sweep only; other
    # families can be opted in
    filter_families: tuple = ("qnn",)


def policy_for(dataset_key: str) -> SelectionPolicy:
    return SelectionPolicy(THRESHOLDS.get(dataset_key, 0.5))


def select_best(records, policy: SelectionPolicy):
    """Argmax validation F1 after the train-F1 gate; ties go to the model
    with fewer parameters, then lexicographically smaller config."""
    survivors = []
    for r in records:
        if r.error is not None or r.val is None:
            continue
        if r.family in policy.filter_families and \
                r.train.f1 < policy.train_f1_threshold:
            continue
        survivors.append(r)
    if not survivors:
        return None
    return min(survivors, key=lambda r: (-r.val.f1, r.n_parameters,
                                         canonical(r.config)))


# ----------------------------------------------------------------- reports

def _fmt(v) -> str:
    return f"{v:.4f}"


def _config_columns(record: ExperimentRecord):
    c = record.config
    if record.family == "qsvm":
        return [ENCODING_LABELS[c["encoding"]], c["repetitions"]]
    if record.family == "qnn":
        return [c["sequence"], "yes" if c["reupload"] else "no", c["ansatz"],
                record.extra.get("n_layers", "")]
    label = MODEL_LABELS.get(c["model"], c["model"])
    if c["model"] == "svm":
        label = f"SVM-{c['kernel']}"
    return [label]


_HEADERS = {
    "qsvm": ["Feat", "Encoding", "Reps"],
    "qnn": ["Feat", "Encoding", "Reupload", "Ansatz", "Layers"],
    "classical": ["Feat", "Model"],
}
_METRIC_COLS = ["TrainP", "TrainR", "ValP", "ValR", "TestP", "TestR"]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def emit_reports(records, out_dir, datasets=None) -> list:
    """Writes, per dataset: one CSV per model family, a best-model
    comparison table (test precision/recall of each family's winner per
    feature count), and the PCA cumulative-variance curve."""
    os.makedirs(out_dir, exist_ok=True)
    if datasets is None:
        datasets = sorted({r.dataset for r in records})
    written = []

    for dataset_key in datasets:
        rows_of = [r for r in records if r.dataset == dataset_key]
        for family in FAMILIES:
            fam = [r for r in rows_of
                   if r.family == family and r.error is None]
            out_rows = []
            for r in fam:
                metric_cells = [_fmt(v) for m in (r.train, r.val, r.test)
                                for v in (m.precision, m.recall)]
                out_rows.append([r.k] + _config_columns(r) + metric_cells)
            path = os.path.join(out_dir, f"{dataset_key}_{family}.csv")
            _write_csv(path, _HEADERS[family] + _METRIC_COLS, out_rows)
            written.append(path)

        policy = policy_for(dataset_key)
        ks = sorted({r.k for r in rows_of if r.family in FAMILIES})
        comp_rows = []
        for k in ks:
            cells = [k]
            for family in FAMILIES:
                winner = select_best(
                    [r for r in rows_of
                     if r.family == family and r.k == k], policy)
                if winner is None:
                    cells += ["", ""]
                else:
                    cells += [_fmt(winner.test.precision),
                              _fmt(winner.test.recall)]
            comp_rows.append(cells)
        path = os.path.join(out_dir, f"{dataset_key}_comparison.csv")
        _write_csv(path, ["Feat", "QnnP", "QnnR", "QsvmP", "QsvmR",
                          "ClassicalP", "ClassicalR"], comp_rows)
        written.append(path)

        curves = [r for r in rows_of if r.family == "pca"]
        curve_rows = []
        if curves:
            ratios = curves[0].extra["cumulative_ratio"]
            curve_rows = [[i + 1, _fmt(v)] for i, v in enumerate(ratios)]
        path = os.path.join(out_dir, f"{dataset_key}_pca_variance.csv")
        _write_csv(path, ["Component", "CumulativeRatio"], curve_rows)
        written.append(path)
    return written
