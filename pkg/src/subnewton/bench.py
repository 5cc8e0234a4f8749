"""Experiment runner: configuration, Lipschitz estimation, trace CSVs,
summary table and the learning-rate sensitivity sweep.

One trace CSV is written per (solver, setting) plus a summary CSV; all
non-timing columns are deterministic for fixed seeds.  Time-vs-objective
and time-vs-accuracy figures are rendered next to the CSVs unless
disabled.
"""

import os
import csv
from dataclasses import dataclass, field

import numpy as np

from . import plots, softmax
from .cg import CgConfig
from .dataset import load_csv, load_libsvm, normalize_columns, train_test_split
from .errors import DataError
from .firstorder import FirstOrderConfig, lr_grid, run_epochs
from .linesearch import LineSearchConfig
from .newton import NewtonConfig, make_variant, newton_solve
from .rng import POWER_STREAM, stream_rng
from .sampling import SampleConfig
from .softmax import HessianOperator, SoftmaxProblem
from .trace import SolveTrace, format_float, write_trace_csv

# CLI method name -> newton variant name
NEWTON_METHODS = {
    "full-newton": "full",
    "subnewton-100": "subsampled-100",
    "subnewton-20": "subsampled-20",
}
FIRST_ORDER_METHODS = ("momentum", "adagrad", "adadelta", "rmsprop", "adam")

SUMMARY_COLUMNS = (
    "solver",
    "method",
    "learning_rate",
    "iterations",
    "final_objective",
    "best_test_acc",
    "time_to_target_seconds",
    "classification",
    "termination",
)

# sweep classification thresholds: a run is stagnated when its objective
# decrease is below this fraction of the sweep-best decrease
STAGNATION_FRACTION = 0.01
DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class SolverRun:
    """One solver setting: a Newton variant, or a first-order method with
    a literal learning rate or "grid" (the 13-point 10^k/L ladder)."""

    method: str
    learning_rate: object = None  # float | "grid" | None
    batch_size: float = 128
    epochs: int = 100
    cg_tol: float = 1e-4
    cg_max_iters: int = 10
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.method in NEWTON_METHODS:
            return
        if self.method not in FIRST_ORDER_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.learning_rate is None:
            raise ValueError(f"{self.method} requires a learning rate or 'grid'")


@dataclass
class ExperimentSpec:
    dataset_path: str
    fmt: str = "libsvm"
    n_classes: int = 2
    solvers: list = field(default_factory=list)
    normalize: bool = True
    split_fraction: float = 0.8
    seed: int = 0
    lam: float = 1e-3
    out_dir: str = "."
    target_accuracy: float = None
    figures: bool = True
    lipschitz_iters: int = 200
    n_features: int = None

    def __post_init__(self):
        if self.lam < 0:
            raise DataError("lambda must be >= 0")


@dataclass
class RunResult:
    label: str
    method: str
    learning_rate: float  # None for Newton variants
    trace: SolveTrace
    trace_path: str = ""
    classification: str = ""


@dataclass
class ExperimentResult:
    runs: list
    summary_path: str
    figure_paths: list
    lipschitz: float = None


def estimate_lipschitz(prob, iters=200, seed=0):
    """Power-iteration estimate of L, the largest eigenvalue of the
    unregularized Hessian at x = 0.

    Seeds the learning-rate grid and the condition-number over-estimate
    (L + lam) / lam.  Uses the Rayleigh quotient of the final iterate.
    """
    ds = prob.dataset
    if ds.n_rows == 0:
        raise DataError("cannot estimate the Lipschitz constant of an empty dataset")
    d = (ds.n_classes - 1) * ds.n_features
    op = HessianOperator(ds, softmax.zero_weights(ds.n_features, ds.n_classes), lam=0.0)
    v = stream_rng(seed, POWER_STREAM).standard_normal(d)
    v /= np.linalg.norm(v)
    rayleigh = 0.0
    for _ in range(iters):
        w = op(v)
        rayleigh = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
    return rayleigh


def load_dataset(path, fmt, n_classes, n_features=None):
    if fmt == "libsvm":
        return load_libsvm(path, n_classes, n_features=n_features)
    if fmt == "csv":
        return load_csv(path, n_classes)
    raise ValueError(f"unknown dataset format {fmt!r}; expected libsvm or csv")


def prepare_data(spec):
    """Load, optionally normalize, and split per the experiment spec."""
    ds = load_dataset(spec.dataset_path, spec.fmt, spec.n_classes, spec.n_features)
    if spec.normalize:
        ds = normalize_columns(ds)
    train, test = train_test_split(ds, spec.split_fraction, spec.seed)
    return train, test


def execute_run(prob, test_set, run, learning_rate=None):
    """Run one solver setting and return its SolveTrace."""
    if run.method in NEWTON_METHODS:
        cfg = make_variant(
            NEWTON_METHODS[run.method],
            NewtonConfig(
                epsilon=run.epsilon,
                max_outer_iters=run.epochs,
                cg=CgConfig(theta=run.cg_tol, max_iters=run.cg_max_iters),
                ls=LineSearchConfig(),
                samples=SampleConfig(seed=run.seed),
            ),
        )
        return newton_solve(prob, cfg, test_set=test_set, solver_name=run.method)
    cfg = FirstOrderConfig(
        method=run.method,
        learning_rate=learning_rate,
        batch_size=run.batch_size,
        epochs=run.epochs,
        seed=run.seed,
    )
    return run_epochs(prob, cfg, test_set=test_set, solver_name=run.method)


def classify_sweep(traces):
    """Partition sweep runs into diverged / stagnated / progressed.

    Diverged: stopped by the divergence guard, or final objective
    non-finite or above 1e3x the initial value.  Stagnated: objective
    decrease below 1% of the sweep-best decrease.  Progressed: the rest.
    """
    diverged = []
    decreases = []
    for t in traces:
        final = t.final_objective
        bad = (
            t.reason == "diverged"
            or not np.isfinite(final)
            or final > DIVERGENCE_FACTOR * t.initial_objective
        )
        diverged.append(bad)
        decreases.append(t.initial_objective - final if not bad else float("-inf"))
    best = max(decreases)
    labels = []
    for bad, dec in zip(diverged, decreases):
        if bad:
            labels.append("diverged")
        elif best <= 0 or dec < STAGNATION_FRACTION * best:
            labels.append("stagnated")
        else:
            labels.append("progressed")
    return labels


@dataclass
class SweepEntry:
    learning_rate: float
    trace: SolveTrace
    classification: str


def sensitivity_sweep(prob, method, L, test_set=None, batch_size=128, epochs=100, seed=0):
    """Run a first-order method over the 13-point learning-rate grid and
    classify every run."""
    if method not in FIRST_ORDER_METHODS:
        raise ValueError(f"sensitivity sweep needs a first-order method, got {method!r}")
    run = SolverRun(
        method=method,
        learning_rate="grid",
        batch_size=batch_size,
        epochs=epochs,
        seed=seed,
    )
    traces = [execute_run(prob, test_set, run, learning_rate=lr) for lr in lr_grid(L)]
    labels = classify_sweep(traces)
    return [
        SweepEntry(lr, trace, label)
        for lr, trace, label in zip(lr_grid(L), traces, labels)
    ]


def _format_lr(lr):
    return f"{lr:.6g}"


def _summary_row(result, target):
    trace = result.trace
    tta = ""
    if target is not None:
        t = trace.time_to_accuracy(target)
        tta = format_float(t) if t is not None else ""
    return [
        result.label,
        result.method,
        _format_lr(result.learning_rate) if result.learning_rate is not None else "",
        str(trace.iterations),
        format_float(trace.final_objective),
        format_float(trace.best_test_acc),
        tta,
        result.classification,
        trace.reason,
    ]


def write_summary_csv(path, results, target_accuracy=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for result in results:
            writer.writerow(_summary_row(result, target_accuracy))


def run_experiment(spec):
    """Execute every solver setting in the spec.

    Writes one trace CSV per run plus summary.csv into spec.out_dir, and
    (unless spec.figures is false) time-vs-objective, time-vs-accuracy
    and per-method sensitivity figures alongside them.  All non-timing
    output is deterministic for fixed seeds.
    """
    if not spec.solvers:
        raise ValueError("experiment spec needs at least one solver")
    train, test = prepare_data(spec)
    prob = SoftmaxProblem(train, spec.lam)

    lipschitz = None
    results = []
    sweeps = {}  # method -> list of RunResult, for classification + figures
    for run in spec.solvers:
        if run.method in NEWTON_METHODS:
            trace = execute_run(prob, test, run)
            results.append(RunResult(run.method, run.method, None, trace))
        elif run.learning_rate == "grid":
            if lipschitz is None:
                lipschitz = estimate_lipschitz(prob, spec.lipschitz_iters, spec.seed)
            group = []
            for lr in lr_grid(lipschitz):
                trace = execute_run(prob, test, run, learning_rate=lr)
                label = f"{run.method}_lr{_format_lr(lr)}"
                rr = RunResult(label, run.method, lr, trace)
                group.append(rr)
                results.append(rr)
            labels = classify_sweep([rr.trace for rr in group])
            for rr, cls in zip(group, labels):
                rr.classification = cls
            sweeps.setdefault(run.method, []).extend(group)
        else:
            lr = float(run.learning_rate)
            trace = execute_run(prob, test, run, learning_rate=lr)
            label = f"{run.method}_lr{_format_lr(lr)}"
            results.append(RunResult(label, run.method, lr, trace))

    os.makedirs(spec.out_dir, exist_ok=True)
    for result in results:
        result.trace_path = os.path.join(spec.out_dir, f"trace_{result.label}.csv")
        write_trace_csv(result.trace_path, result.trace.records)
    summary_path = os.path.join(spec.out_dir, "summary.csv")
    write_summary_csv(summary_path, results, spec.target_accuracy)

    figure_paths = []
    if spec.figures:
        curves = [(r.label, r.trace.records) for r in results]
        path = os.path.join(spec.out_dir, "objective_vs_time.png")
        plots.plot_time_curves(curves, path, value="objective", ylabel="training objective")
        figure_paths.append(path)
        if test is not None:
            path = os.path.join(spec.out_dir, "test_accuracy_vs_time.png")
            plots.plot_time_curves(curves, path, value="test_acc", ylabel="test accuracy")
            figure_paths.append(path)
        for method, group in sweeps.items():
            path = os.path.join(spec.out_dir, f"sensitivity_{method}.png")
            plots.plot_sensitivity(
                method,
                [(r.learning_rate, r.classification, r.trace.records) for r in group],
                path,
            )
            figure_paths.append(path)

    return ExperimentResult(results, summary_path, figure_paths, lipschitz)
