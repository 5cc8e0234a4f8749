"""Mini-batch first-order baselines: momentum SGD, Adagrad, Adadelta,
RMSProp, Adam.

All methods optimize the same function as the Newton solvers,
F(x) + (lam/2)||x||^2: the batch gradient is the data term scaled by
n/|batch| plus the full lam*x term every step.  Per epoch the rows are
shuffled with a seeded permutation, every row appears in exactly one
batch, and the final partial batch is processed at its true size.
Method constants default to the usual framework values; the learning
rate comes from the caller (typically the 13-point grid 10^k/L,
k = -6..6).
"""

import time
from dataclasses import dataclass

import numpy as np

from . import softmax
from .errors import DataError
from .rng import SHUFFLE_STREAM, stream_rng
from .trace import RunRecord, SolveTrace

METHODS = ("momentum", "adagrad", "adadelta", "rmsprop", "adam")

# a run whose objective exceeds this multiple of the initial value stops
DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class FirstOrderConfig:
    method: str
    learning_rate: float
    batch_size: float = 128  # count, or fraction of n when in (0, 1)
    epochs: int = 100
    seed: int = 0
    momentum: float = 0.9
    adagrad_eps: float = 1e-10
    adagrad_init: float = 0.1
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-8
    rmsprop_decay: float = 0.9
    rmsprop_eps: float = 1e-10
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.learning_rate <= 0:
            raise DataError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size <= 0:
            raise DataError(f"batch_size must be positive, got {self.batch_size}")

    def resolve_batch(self, n):
        b = self.batch_size
        if 0 < b < 1:
            return max(1, int(round(b * n)))
        return min(n, int(b))


class OptimizerState:
    """Per-method accumulators, each shaped like the weight vector."""

    def __init__(self, cfg, d):
        self.step_count = 0
        if cfg.method == "momentum":
            self.velocity = np.zeros(d)
        elif cfg.method == "adagrad":
            self.accumulator = np.full(d, cfg.adagrad_init)
        elif cfg.method == "rmsprop":
            self.accumulator = np.zeros(d)
        elif cfg.method == "adadelta":
            self.grad_sq = np.zeros(d)
            self.update_sq = np.zeros(d)
        elif cfg.method == "adam":
            self.m = np.zeros(d)
            self.v = np.zeros(d)


def step(state, x, g, cfg):
    """Apply one update; mutates state in place, returns the new x."""
    eta = cfg.learning_rate
    if cfg.method == "momentum":
        state.velocity = cfg.momentum * state.velocity - eta * g
        out = x + state.velocity
    elif cfg.method == "adagrad":
        state.accumulator = state.accumulator + g * g
        out = x - eta * g / np.sqrt(state.accumulator + cfg.adagrad_eps)
    elif cfg.method == "rmsprop":
        rho = cfg.rmsprop_decay
        state.accumulator = rho * state.accumulator + (1 - rho) * g * g
        out = x - eta * g / np.sqrt(state.accumulator + cfg.rmsprop_eps)
    elif cfg.method == "adadelta":
        rho, eps = cfg.adadelta_rho, cfg.adadelta_eps
        state.grad_sq = rho * state.grad_sq + (1 - rho) * g * g
        delta = -np.sqrt(state.update_sq + eps) / np.sqrt(state.grad_sq + eps) * g
        state.update_sq = rho * state.update_sq + (1 - rho) * delta * delta
        out = x + eta * delta
    elif cfg.method == "adam":
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        state.step_count += 1
        state.m = b1 * state.m + (1 - b1) * g
        state.v = b2 * state.v + (1 - b2) * g * g
        m_hat = state.m / (1 - b1**state.step_count)
        v_hat = state.v / (1 - b2**state.step_count)
        out = x - eta * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    else:
        raise ValueError(f"unknown method {cfg.method!r}")
    return out


def run_epochs(prob, cfg, x0=None, test_set=None, solver_name=None):
    """Sweep seeded mini-batches for cfg.epochs epochs.

    The full objective and accuracies are recorded once per epoch; the
    run stops with reason "diverged" when the objective turns non-finite
    or exceeds 1e3 times its initial value.
    """
    ds = prob.dataset
    n = ds.n_rows
    if n == 0:
        raise DataError("cannot train on an empty dataset")
    if solver_name is None:
        solver_name = cfg.method
    batch = cfg.resolve_batch(n)
    d = (ds.n_classes - 1) * ds.n_features
    x = softmax.zero_weights(ds.n_features, ds.n_classes) if x0 is None else np.array(x0, dtype=np.float64)
    state = OptimizerState(cfg, d)

    def metrics(x):
        train = softmax.accuracy(ds, x) if np.all(np.isfinite(x)) else float("nan")
        test = (
            softmax.accuracy(test_set, x)
            if test_set is not None and np.all(np.isfinite(x))
            else float("nan")
        )
        return train, test

    t0 = time.perf_counter()
    f_initial = softmax.objective(prob, x)
    train_acc, test_acc = metrics(x)
    records = [RunRecord(solver_name, 0, 0.0, f_initial, train_acc, test_acc, 0.0, 0)]

    reason = "max-iters"
    for epoch in range(1, cfg.epochs + 1):
        perm = stream_rng(cfg.seed, SHUFFLE_STREAM, epoch).permutation(n)
        # overflow in a deliberately divergent run is expected behaviour
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, batch):
                idx = np.sort(perm[start : start + batch])
                view = ds.take(idx)
                g = (n / len(idx)) * softmax.data_gradient(view, x) + prob.lam * x
                x = step(state, x, g, cfg)
                if not np.all(np.isfinite(x)):
                    break
            obj = (
                softmax.objective(prob, x)
                if np.all(np.isfinite(x))
                else float("nan")
            )
        train_acc, test_acc = metrics(x)
        records.append(
            RunRecord(
                solver_name,
                epoch,
                time.perf_counter() - t0,
                obj,
                train_acc,
                test_acc,
                cfg.learning_rate,
                0,
            )
        )
        if not np.isfinite(obj) or obj > DIVERGENCE_FACTOR * f_initial:
            reason = "diverged"
            break
    return SolveTrace(records, x, reason)


def lr_grid(L):
    """The 13 learning rates 10^k / L for k = -6..6."""
    if L <= 0:
        raise DataError(f"Lipschitz estimate must be > 0, got {L}")
    return [10.0**k / L for k in range(-6, 7)]
