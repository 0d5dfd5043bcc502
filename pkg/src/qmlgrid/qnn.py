"""Variational quantum classifier with parameter-shift training.

One qubit per feature; qubits 0 and 1 are read out, softmax over
(<Z_0>, <Z_1>) gives the two class probabilities. The loss is class-
weighted cross-entropy. Every trainable parameter appears in exactly one
rotation gate, so the two-point parameter-shift rule

    d<Z_q>/d theta_k = (<Z_q>(theta_k + pi/2) - <Z_q>(theta_k - pi/2)) / 2

is exact; the chain through softmax and the loss is analytic.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import CircuitSpec, qnn_circuit, run_batch
from .errors import ConfigurationError, TrainingDivergedError, UsageError
from .metrics import evaluate
from .statevec import expectation_z_batch

PROB_FLOOR = 1e-12
SHIFT = np.pi / 2.0

_PARAMS_PER_QUBIT = {"basic": 1, "strongly": 3}


@dataclass(frozen=True)
class QnnConfig:
    n_features: int
    encoding_sequence: tuple = ("Y",)
    reupload: bool = False
    ansatz: str = "basic"
    n_layers: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 2:
            raise ConfigurationError("QNN needs at least two features "
                                     "(two readout qubits)")
        if self.ansatz not in _PARAMS_PER_QUBIT:
            raise ConfigurationError(f"unknown ansatz {self.ansatz!r}")
        if self.n_layers < 1:
            raise ConfigurationError("n_layers must be >= 1")

    def n_parameters(self) -> int:
        return _PARAMS_PER_QUBIT[self.ansatz] * self.n_features * self.n_layers


@dataclass
class QnnModel:
    config: QnnConfig
    parameters: np.ndarray
    class_weights: np.ndarray
    circuit: CircuitSpec = field(repr=False, default=None)

    def __post_init__(self):
        if self.circuit is None:
            self.circuit = build_circuit(self.config)
        if self.parameters.shape != (self.config.n_parameters(),):
            raise ConfigurationError(
                f"parameter vector has shape {self.parameters.shape}, "
                f"expected ({self.config.n_parameters()},)")


def build_circuit(config: QnnConfig) -> CircuitSpec:
    return qnn_circuit(config.n_features, config.encoding_sequence,
                       config.reupload, config.ansatz, config.n_layers)


def init_model(config: QnnConfig, class_weights) -> QnnModel:
    rng = np.random.default_rng(config.seed)
    params = rng.uniform(-np.pi, np.pi, config.n_parameters())
    return QnnModel(config, params, np.asarray(class_weights, dtype=np.float64))


def softmax_pair(e: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a (B, 2) array, numerically stable."""
    shifted = e - e.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def expectations(model: QnnModel, X: np.ndarray,
                 parameters: np.ndarray | None = None) -> np.ndarray:
    """(<Z_0>, <Z_1>) per sample, shape (B, 2)."""
    theta = model.parameters if parameters is None else parameters
    amps = run_batch(model.circuit, X, theta)
    n = model.circuit.n_qubits
    return np.stack([expectation_z_batch(amps, n, 0),
                     expectation_z_batch(amps, n, 1)], axis=1)


def forward_batch(model: QnnModel, X: np.ndarray) -> np.ndarray:
    """Class probabilities per sample, shape (B, 2)."""
    return softmax_pair(expectations(model, X))


def forward(model: QnnModel, x) -> np.ndarray:
    return forward_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def predict(model: QnnModel, X: np.ndarray) -> np.ndarray:
    probs = forward_batch(model, X)
    return (probs[:, 1] >= probs[:, 0]).astype(int)


def weighted_cross_entropy(probs, label: int, class_weights) -> float:
    """-w[label] * ln(p[label]), probability clamped away from zero."""
    if label not in (0, 1):
        raise UsageError(f"label must be 0 or 1, got {label}")
    p = max(float(probs[label]), PROB_FLOOR)
    return -float(class_weights[label]) * np.log(p)


def batch_loss(model: QnnModel, X: np.ndarray, y: np.ndarray,
               parameters: np.ndarray | None = None) -> float:
    e = expectations(model, X, parameters)
    probs = softmax_pair(e)
    y = np.asarray(y, dtype=int)
    picked = np.maximum(probs[np.arange(len(y)), y], PROB_FLOOR)
    w = model.class_weights[y]
    return float(np.mean(-w * np.log(picked)))


def parameter_shift_gradient(model: QnnModel, X: np.ndarray,
                             y: np.ndarray) -> np.ndarray:
    """Gradient of batch_loss w.r.t. the parameter vector."""
    y = np.asarray(y, dtype=int)
    batch = len(y)
    e = expectations(model, X)
    probs = softmax_pair(e)
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), y] = 1.0
    # d loss_i / d e_q = w_{y_i} (p_q - [q == y_i]); mean over the batch
    dl_de = (model.class_weights[y][:, None] * (probs - onehot)) / batch

    grad = np.zeros_like(model.parameters)
    for k in range(model.parameters.size):
        hi = model.parameters.copy()
        lo = model.parameters.copy()
        hi[k] += SHIFT
        lo[k] -= SHIFT
        de = 0.5 * (expectations(model, X, hi) - expectations(model, X, lo))
        grad[k] = float(np.sum(dl_de * de))
    return grad


@dataclass
class TrainReport:
    train_loss: list
    val_loss: list
    val_f1: list
    best_epoch: int
    stopped_epoch: int

    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1]


def train(model: QnnModel, train_set, val_set, *, epochs: int = 100,
          patience: int = 5, learning_rate: float = 0.01,
          batch_size: int = 32, beta1: float = 0.9, beta2: float = 0.999,
          adam_eps: float = 1e-8) -> tuple:
    """Mini-batch Adam with early stopping on validation loss.

    Returns (model with the best-epoch parameters, TrainReport). Epochs
    are 1-based in the report. Training stops once validation loss has
    not improved for `patience` consecutive epochs, so a model already at
    a plateau stops exactly `patience` epochs past its best.
    """
    X_tr, y_tr = np.asarray(train_set[0], dtype=np.float64), np.asarray(train_set[1], dtype=int)
    X_va, y_va = np.asarray(val_set[0], dtype=np.float64), np.asarray(val_set[1], dtype=int)
    rng = np.random.default_rng([model.config.seed, 1])

    params = model.parameters.copy()
    work = replace_params(model, params)
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    step = 0

    history = TrainReport([], [], [], best_epoch=0, stopped_epoch=0)
    best_val = np.inf
    best_params = params.copy()
    stale = 0

    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(y_tr))
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            grad = parameter_shift_gradient(work, X_tr[idx], y_tr[idx])
            step += 1
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad ** 2
            m_hat = m / (1 - beta1 ** step)
            v_hat = v / (1 - beta2 ** step)
            params = params - learning_rate * m_hat / (np.sqrt(v_hat) + adam_eps)
            work = replace_params(work, params)

        tr_loss = batch_loss(work, X_tr, y_tr)
        va_loss = batch_loss(work, X_va, y_va)
        if not (np.isfinite(tr_loss) and np.isfinite(va_loss)):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch} "
                f"(train={tr_loss}, val={va_loss})")
        history.train_loss.append(tr_loss)
        history.val_loss.append(va_loss)
        history.val_f1.append(evaluate(y_va, predict(work, X_va)).f1)

        if va_loss < best_val:
            best_val = va_loss
            best_params = params.copy()
            history.best_epoch = epoch
            stale = 0
        else:
            stale += 1
        history.stopped_epoch = epoch
        if stale >= patience:
            break

    return replace_params(model, best_params), history


def replace_params(model: QnnModel, params: np.ndarray) -> QnnModel:
    return QnnModel(model.config, params, model.class_weights, model.circuit)


@dataclass
class LayerTrial:
    n_layers: int
    val_loss: float
    model: QnnModel
    report: TrainReport


@dataclass
class GrowthResult:
    best_n_layers: int
    trials: list

    def best_trial(self) -> LayerTrial:
        return next(t for t in self.trials if t.n_layers == self.best_n_layers)


def grow_layers(config: QnnConfig, class_weights, train_set, val_set, *,
                start_layers: int = 2, max_layers: int = 100,
                stall_limit: int | None = None, **train_kwargs) -> GrowthResult:
    """Incremental layer search: train a fresh model per layer count,
    stop once validation loss has not improved for `stall_limit`
    consecutive counts (default: the qubit count) or the cap is hit."""
    if stall_limit is None:
        stall_limit = config.n_features
    best_val = np.inf
    best_layers = start_layers
    stale = 0
    trials = []
    for n_layers in range(start_layers, max_layers + 1):
        cfg = replace(config, n_layers=n_layers)
        model, report = train(init_model(cfg, class_weights),
                              train_set, val_set, **train_kwargs)
        val = report.best_val_loss()
        trials.append(LayerTrial(n_layers, val, model, report))
        if val < best_val:
            best_val = val
            best_layers = n_layers
            stale = 0
        else:
            stale += 1
        if stale >= stall_limit:
            break
    return GrowthResult(best_layers, trials)
