"""End-to-end runs on real data (sklearn's bundled handwritten digits).

Not an acceptance criterion (that one names MNIST, see README), but the
same protocol exercised on a real 10-class image dataset: normalized
columns, 0.8 split, lam = 1e-3, CG tolerance 1e-4 with 10 iterations.
"""

import numpy as np
import pytest

sklearn_datasets = pytest.importorskip("sklearn.datasets")

from subnewton.cg import CgConfig
from subnewton.dataset import DesignMatrix, LabeledDataset, normalize_columns, train_test_split
from subnewton.newton import NewtonConfig, make_variant, newton_solve
from subnewton.sampling import SampleConfig
from subnewton.softmax import SoftmaxProblem


@pytest.fixture(scope="module")
def digits_split():
    X, y = sklearn_datasets.load_digits(return_X_y=True)
    ds = normalize_columns(
        LabeledDataset(DesignMatrix(X.astype(np.float64)), y.astype(np.int64), 10)
    )
    return train_test_split(ds, 0.8, seed=0)


def protocol_config(variant, epochs=100):
    return make_variant(
        variant,
        NewtonConfig(
            epsilon=1e-8,
            max_outer_iters=epochs,
            cg=CgConfig(theta=1e-4, max_iters=10),
            samples=SampleConfig(seed=0),
        ),
    )


def test_subsampled_newton_100_digits_accuracy(digits_split):
    train, test = digits_split
    prob = SoftmaxProblem(train, lam=1e-3)
    trace = newton_solve(prob, protocol_config("subsampled-100"), test_set=test)
    assert trace.best_test_acc >= 0.90, f"only reached {trace.best_test_acc:.4f}"
    assert trace.records[-1].train_acc >= 0.95


def test_full_newton_digits_monotone_and_accurate(digits_split):
    train, test = digits_split
    prob = SoftmaxProblem(train, lam=1e-3)
    trace = newton_solve(prob, protocol_config("full", epochs=30), test_set=test)
    assert np.all(np.diff(trace.objectives) <= 1e-12)
    assert trace.best_test_acc >= 0.90


def test_subsampled_newton_20_digits_progress(digits_split):
    train, test = digits_split
    prob = SoftmaxProblem(train, lam=1e-3)
    trace = newton_solve(prob, protocol_config("subsampled-20", epochs=50), test_set=test)
    # sampled gradient, so the bar is lower, but it must still learn
    assert trace.best_test_acc >= 0.85
