"""Shared fixtures and independent oracles for the test suite.

The oracles here (finite differences, dense Hessian assembly, naive
unstabilized loss, +/-1-label logistic loss) deliberately avoid the
package's own evaluation path so they can vouch for it.
"""

import gzip
import os
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import softmax as sp_softmax

from subnewton.dataset import DesignMatrix, LabeledDataset


def rel_err(approx, exact):
    denom = np.linalg.norm(np.asarray(exact, dtype=np.float64))
    if denom == 0.0:
        return np.linalg.norm(np.asarray(approx, dtype=np.float64))
    return np.linalg.norm(np.asarray(approx) - np.asarray(exact)) / denom


def random_dataset(n, p, n_classes, seed, scale=1.0, storage="dense"):
    rng = np.random.default_rng(seed)
    feats = scale * rng.standard_normal((n, p))
    labels = rng.integers(0, n_classes, size=n)
    if storage == "sparse":
        feats = sp.csr_array(feats)
    return LabeledDataset(DesignMatrix(feats), labels, n_classes)


def random_weights(p, n_classes, seed, scale=1.0):
    rng = np.random.default_rng(seed + 1000)
    return scale * rng.standard_normal((n_classes - 1) * p)


def make_blobs(n, p, n_classes, seed, separation=4.0):
    """Gaussian class blobs around axis-aligned centers `separation`
    apart; separation >> 1 makes the classes linearly separable."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_classes, p))
    for c in range(n_classes):
        centers[c, c % p] = separation * (1 + c // p)
    labels = np.arange(n) % n_classes
    rng.shuffle(labels)
    feats = centers[labels] + rng.standard_normal((n, p))
    return LabeledDataset(DesignMatrix(feats), labels, n_classes)


def fd_step(x):
    return 1e-5 * (1.0 + np.max(np.abs(x), initial=0.0))


def fd_gradient(fun, x, h=None):
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = fd_step(x)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def fd_hess_vec(grad_fun, x, v, h=None):
    """Central finite differences of a gradient along direction v."""
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = fd_step(x)
    return (grad_fun(x + h * v) - grad_fun(x - h * v)) / (2 * h)


def reference_probs(ds, x):
    """Row-wise class probabilities over the C-1 weighted classes,
    computed independently via scipy's softmax with an appended zero
    logit."""
    p, C = ds.n_features, ds.n_classes
    X = np.asarray(x, dtype=np.float64).reshape((p, C - 1), order="F")
    Z = ds.features.toarray() @ X
    full = sp_softmax(np.hstack([Z, np.zeros((ds.n_rows, 1))]), axis=1)
    return full[:, : C - 1]


def dense_hessian(ds, x, lam):
    """Assemble the full d-by-d Hessian from the per-class block
    formulas: diagonal blocks sum_i (h_ic - h_ic^2) a_i a_i^T, off
    diagonal blocks -sum_i h_ic h_ib a_i a_i^T, plus lam I."""
    A = ds.features.toarray()
    p, C = ds.n_features, ds.n_classes
    h = reference_probs(ds, x)
    d = (C - 1) * p
    H = np.zeros((d, d))
    for c in range(C - 1):
        for b in range(C - 1):
            if c == b:
                w = h[:, c] - h[:, c] ** 2
            else:
                w = -h[:, c] * h[:, b]
            H[c * p : (c + 1) * p, b * p : (b + 1) * p] = A.T @ (w[:, None] * A)
    return H + lam * np.eye(d)


def naive_objective(ds, x, dtype=np.float64):
    """Unstabilized loss: log(1 + sum_c exp(<a, x_c>)) summed directly.

    Overflows for large logits; in extended precision at small logit
    scale it serves as an independent oracle.
    """
    p, C = ds.n_features, ds.n_classes
    X = np.asarray(x, dtype=dtype).reshape((p, C - 1), order="F")
    A = ds.features.toarray().astype(dtype)
    Z = A @ X
    total = dtype(0.0)
    for i in range(ds.n_rows):
        total += np.log(dtype(1.0) + np.exp(Z[i]).sum())
        if ds.labels[i] < C - 1:
            total -= Z[i, ds.labels[i]]
    return total


def logistic_loss_pm1(ds, x):
    """Two-class logistic loss with +/-1 labels.

    Label mapping: internal class 0 (which owns the weight block) maps
    to +1, the reference class maps to -1; the loss is
    sum_i log(1 + exp(-b_i <a_i, x>)) evaluated stably.
    """
    assert ds.n_classes == 2
    z = ds.features.toarray() @ np.asarray(x, dtype=np.float64)
    b = np.where(ds.labels == 0, 1.0, -1.0)
    return float(np.logaddexp(0.0, -b * z).sum())


def _read_idx(path):
    with gzip.open(path, "rb") as fh:
        data = fh.read()
    magic = int.from_bytes(data[0:4], "big")
    ndim = magic & 0xFF
    shape = [int.from_bytes(data[4 + 4 * i : 8 + 4 * i], "big") for i in range(ndim)]
    arr = np.frombuffer(data, dtype=np.uint8, offset=4 + 4 * ndim)
    return arr.reshape(shape)


def _mnist_from_idx(directory):
    names = {
        "train_x": "train-images-idx3-ubyte.gz",
        "train_y": "train-labels-idx1-ubyte.gz",
        "test_x": "t10k-images-idx3-ubyte.gz",
        "test_y": "t10k-labels-idx1-ubyte.gz",
    }
    paths = {k: directory / v for k, v in names.items()}
    if not all(p.exists() for p in paths.values()):
        return None
    train_x = _read_idx(paths["train_x"]).reshape(-1, 784).astype(np.float64) / 255.0
    test_x = _read_idx(paths["test_x"]).reshape(-1, 784).astype(np.float64) / 255.0
    train_y = _read_idx(paths["train_y"]).astype(np.int64)
    test_y = _read_idx(paths["test_y"]).astype(np.int64)
    return (
        LabeledDataset(DesignMatrix(train_x), train_y, 10),
        LabeledDataset(DesignMatrix(test_x), test_y, 10),
    )


def _mnist_from_csv(directory):
    from subnewton.dataset import load_csv

    train_p = directory / "mnist_train.csv"
    test_p = directory / "mnist_test.csv"
    if not (train_p.exists() and test_p.exists()):
        return None
    return load_csv(train_p, 10), load_csv(test_p, 10)


def _mnist_from_libsvm(directory):
    from subnewton.dataset import load_libsvm

    train_p = next((directory / n for n in ("mnist.libsvm", "mnist", "mnist.scale")
                    if (directory / n).exists()), None)
    if train_p is None:
        return None
    test_p = next((directory / n for n in ("mnist.t.libsvm", "mnist.t", "mnist.scale.t")
                   if (directory / n).exists()), None)
    train = load_libsvm(train_p, 10, n_features=784)
    if test_p is not None:
        return train, load_libsvm(test_p, 10, n_features=784)
    from subnewton.dataset import train_test_split

    return train_test_split(train, 6.0 / 7.0, seed=0)


def find_mnist():
    """Locate a local MNIST copy, or return None.

    Looks in $SUBNEWTON_MNIST and <repo>/data/mnist for any of: the IDX
    gz quadruple, mnist_train.csv/mnist_test.csv, or libsvm files
    (mnist[.libsvm][.scale], optional .t test file).
    """
    candidates = []
    env = os.environ.get("SUBNEWTON_MNIST")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parent.parent / "data" / "mnist")
    for directory in candidates:
        if not directory.is_dir():
            continue
        for loader in (_mnist_from_idx, _mnist_from_csv, _mnist_from_libsvm):
            found = loader(directory)
            if found is not None:
                return found
    return None


def stratified_subsample(ds, n_rows, seed):
    """Deterministic stratified row subsample preserving class shares."""
    rng = np.random.default_rng(seed)
    picked = []
    for c in range(ds.n_classes):
        idx = np.nonzero(ds.labels == c)[0]
        share = max(1, int(round(n_rows * len(idx) / ds.n_rows)))
        picked.append(rng.choice(idx, size=min(share, len(idx)), replace=False))
    picked = np.sort(np.concatenate(picked))
    return ds.take(picked)
