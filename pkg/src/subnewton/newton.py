"""Inexact Newton driver with sub-sampled gradient/Hessian, CG and Armijo.

Outer loop, per iteration k: draw fresh sample sets, form the sampled
gradient g; stop if ||g|| < epsilon; solve H p = -g approximately with
CG to the relative tolerance theta; back-track from alpha = 1 until the
Armijo test holds (slope = p^T g with the sampled g, objective values
always the full regularized objective); step.  The recorded objective
and accuracies are always computed on the full data.

Variants: full (exact gradient and Hessian), subsampled-100 (full
gradient, 5% Hessian sample), subsampled-20 (20% gradient, 5% Hessian).
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import softmax
from .cg import CgConfig, cg_solve
from .errors import DataError, LineSearchError
from .linesearch import LineSearchConfig, line_search
from .sampling import SampleConfig, SubsampledOracle
from .trace import RunRecord, SolveTrace

VARIANT_FRACTIONS = {
    "full": (1.0, 1.0),
    "subsampled-100": (1.0, 0.05),
    "subsampled-20": (0.2, 0.05),
}


@dataclass(frozen=True)
class NewtonConfig:
    epsilon: float = 1e-8
    max_outer_iters: int = 100
    cg: CgConfig = field(default_factory=CgConfig)
    ls: LineSearchConfig = field(default_factory=LineSearchConfig)
    samples: SampleConfig = field(default_factory=SampleConfig)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DataError(f"epsilon must be > 0, got {self.epsilon}")


def make_variant(name, base=NewtonConfig()):
    """NewtonConfig with the named variant's sample fractions."""
    try:
        f_g, f_h = VARIANT_FRACTIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown variant {name!r}; expected one of {sorted(VARIANT_FRACTIONS)}"
        ) from None
    return replace(
        base,
        samples=replace(base.samples, gradient_fraction=f_g, hessian_fraction=f_h),
    )


def minimize(objective_fn, oracle_factory, x0, cfg, metrics=None, solver_name="newton"):
    """Generic inexact Newton-CG loop.

    oracle_factory(k) must return an object with .gradient(x) and
    .hessian_operator(x); objective_fn(x) is the full objective used by
    the line search and the trace.  metrics(x), if given, returns
    (train_acc, test_acc) for the trace rows.
    """
    x = np.array(x0, dtype=np.float64)
    if metrics is None:
        metrics = lambda _x: (float("nan"), float("nan"))

    t0 = time.perf_counter()
    f_current = objective_fn(x)
    train_acc, test_acc = metrics(x)
    records = [
        RunRecord(solver_name, 0, 0.0, f_current, train_acc, test_acc, 0.0, 0)
    ]

    reason = "max-iters"
    for k in range(cfg.max_outer_iters):
        oracle = oracle_factory(k)
        g = oracle.gradient(x)
        if np.linalg.norm(g) < cfg.epsilon:
            reason = "gradient-converged"
            break
        hess = oracle.hessian_operator(x)
        report = cg_solve(hess, g, cfg.cg)
        p = report.solution
        slope = float(p @ g)
        try:
            alpha, _ = line_search(
                lambda a: objective_fn(x + a * p), f_current, slope, cfg.ls
            )
        except LineSearchError:
            reason = "line-search-failure"
            break
        x = x + alpha * p
        f_current = objective_fn(x)
        train_acc, test_acc = metrics(x)
        records.append(
            RunRecord(
                solver_name,
                k + 1,
                time.perf_counter() - t0,
                f_current,
                train_acc,
                test_acc,
                alpha,
                report.iterations,
            )
        )
    return SolveTrace(records, x, reason)


def newton_solve(prob, cfg, x0=None, test_set=None, solver_name="newton"):
    """Run the sub-sampled Newton method on a SoftmaxProblem.

    x0 defaults to the zero vector.  Per-iteration rows log the full
    (unsampled) objective, train accuracy and, when a test set is
    given, test accuracy.
    """
    ds = prob.dataset
    if ds.n_rows == 0:
        raise DataError("cannot solve on an empty dataset")
    if x0 is None:
        x0 = softmax.zero_weights(ds.n_features, ds.n_classes)

    def metrics(x):
        train = softmax.accuracy(ds, x)
        test = softmax.accuracy(test_set, x) if test_set is not None else float("nan")
        return train, test

    return minimize(
        lambda x: softmax.objective(prob, x),
        lambda k: SubsampledOracle(prob, cfg.samples, k),
        x0,
        cfg,
        metrics=metrics,
        solver_name=solver_name,
    )
