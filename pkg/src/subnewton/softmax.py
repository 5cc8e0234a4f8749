"""L2-regularized softmax cross-entropy: objective, gradient, Hessian products.

With C classes and p features there are d = (C-1)*p free parameters; the
reference class C-1 has implicit zero weights.  A weight vector x stacks
the per-class columns, x = [x_0; x_1; ...; x_{C-2}], so the matrix view
is X = x.reshape((p, C-1), order="F").

Every exponential is evaluated with a non-positive exponent: per row we
subtract M(a) = max(0, <a, x_0>, ..., <a, x_{C-2}>), and the normalizer
is alpha(a) = exp(-M(a)) + sum_c exp(<a, x_c> - M(a)) >= 1.  Objective,
gradient and Hessian products therefore stay finite for any finite
logits.

Rows are processed in contiguous blocks and partial results are reduced
in block order, so results are reproducible run to run.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError

# rows per block: bounds the size of the n-by-(C-1) temporaries
BLOCK_ROWS = 8192


@dataclass(frozen=True)
class SoftmaxProblem:
    """A labeled dataset together with the regularization coefficient."""

    dataset: object
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise DataError(f"regularization coefficient must be >= 0, got {self.lam}")

    @property
    def dim(self):
        return (self.dataset.n_classes - 1) * self.dataset.n_features


@dataclass
class RowStats:
    """Per-row pieces of the stabilized loss.

    max_part[i]     = M(a_i) >= 0
    sum_exp_part[i] = sum_c exp(<a_i, x_c> - M(a_i)), in (0, C-1]
    linear_part[i]  = <a_i, x_{b_i}> if b_i is a non-reference class else 0
    """

    max_part: np.ndarray
    sum_exp_part: np.ndarray
    linear_part: np.ndarray


def zero_weights(p, n_classes):
    return np.zeros((n_classes - 1) * p, dtype=np.float64)


def weights_as_matrix(x, p, n_classes):
    """View x as the p-by-(C-1) matrix whose column c is the class-c block."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != ((n_classes - 1) * p,):
        raise DimensionError(
            f"weight vector must have length {(n_classes - 1) * p}, got {x.shape}"
        )
    return x.reshape((p, n_classes - 1), order="F")


def matrix_as_weights(X):
    """Inverse of weights_as_matrix: stack columns into a flat vector."""
    return np.asarray(X, dtype=np.float64).ravel(order="F")


def _check_dims(ds, x):
    d = (ds.n_classes - 1) * ds.n_features
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (d,):
        raise DimensionError(f"expected weight vector of length {d}, got {x.shape}")
    return x


def _block_parts(feats, labels, X, n_classes):
    """Stable per-row quantities for one row block.

    Returns (max_part, exp_shifted, alpha, linear_part) where
    exp_shifted[i, c] = exp(<a_i, x_c> - M(a_i)).
    """
    logits = feats.matmat(X)
    max_part = np.maximum(logits.max(axis=1), 0.0)
    exp_shifted = np.exp(logits - max_part[:, None])
    alpha = np.exp(-max_part) + exp_shifted.sum(axis=1)
    linear = np.zeros(len(labels))
    mask = labels < n_classes - 1
    rows = np.nonzero(mask)[0]
    linear[rows] = logits[rows, labels[rows]]
    return max_part, exp_shifted, alpha, linear


def _blocks(n, block_rows=BLOCK_ROWS):
    for i0 in range(0, n, block_rows):
        yield i0, min(i0 + block_rows, n)


def row_stats(ds, x):
    """RowStats for every row of `ds` at weights x."""
    x = _check_dims(ds, x)
    X = weights_as_matrix(x, ds.n_features, ds.n_classes)
    n = ds.n_rows
    max_part = np.empty(n)
    sum_exp = np.empty(n)
    linear = np.empty(n)
    for i0, i1 in _blocks(n):
        m, e, _, lin = _block_parts(
            ds.features.slice_rows(i0, i1), ds.labels[i0:i1], X, ds.n_classes
        )
        max_part[i0:i1] = m
        sum_exp[i0:i1] = e.sum(axis=1)
        linear[i0:i1] = lin
    return RowStats(max_part, sum_exp, linear)


def data_objective(ds, x):
    """Unregularized loss: sum_i (maxPart_i + logPart_i - linearPart_i)."""
    x = _check_dims(ds, x)
    X = weights_as_matrix(x, ds.n_features, ds.n_classes)
    total = 0.0
    for i0, i1 in _blocks(ds.n_rows):
        m, _, alpha, lin = _block_parts(
            ds.features.slice_rows(i0, i1), ds.labels[i0:i1], X, ds.n_classes
        )
        total += float((m + np.log(alpha) - lin).sum())
    return total


def objective(prob, x):
    """Regularized objective F(x) + (lam/2) ||x||^2."""
    x = _check_dims(prob.dataset, x)
    return data_objective(prob.dataset, x) + 0.5 * prob.lam * float(x @ x)


def data_gradient(ds, x):
    """Gradient of the unregularized loss, flat in block order.

    Block c is sum_i (h(a_i, x_c) - 1(b_i = c)) a_i with
    h(a, x_c) = exp(<a, x_c> - M(a)) / alpha(a).
    """
    x = _check_dims(ds, x)
    p, C = ds.n_features, ds.n_classes
    X = weights_as_matrix(x, p, C)
    G = np.zeros((p, C - 1))
    for i0, i1 in _blocks(ds.n_rows):
        feats = ds.features.slice_rows(i0, i1)
        labels = ds.labels[i0:i1]
        _, e, alpha, _ = _block_parts(feats, labels, X, C)
        bind = e / alpha[:, None]
        mask = labels < C - 1
        rows = np.nonzero(mask)[0]
        bind[rows, labels[rows]] -= 1.0
        G += feats.rmatmat(bind)
    return matrix_as_weights(G)


def gradient(prob, x):
    """Gradient of the regularized objective."""
    x = _check_dims(prob.dataset, x)
    return data_gradient(prob.dataset, x) + prob.lam * x


class HessianOperator:
    """Matrix-free map v -> scale * H_data(x) v + lam * v over a row subset.

    The per-row softmax values h(a_i, x_c) are computed once at
    construction and reused for every product, so repeated applications
    (CG, power iteration) cost one pair of feature products each:
    V = A Q, U = V.W - W.((V.W) e) e^T, result = vec(A^T U) + lam v.
    """

    def __init__(self, ds, x, lam, scale=1.0, block_rows=BLOCK_ROWS):
        x = _check_dims(ds, x)
        self.ds = ds
        self.lam = float(lam)
        self.scale = float(scale)
        self.block_rows = block_rows
        self.p, self.C = ds.n_features, ds.n_classes
        self.dim = (self.C - 1) * self.p
        X = weights_as_matrix(x, self.p, self.C)
        self._h = np.empty((ds.n_rows, self.C - 1))
        for i0, i1 in _blocks(ds.n_rows, block_rows):
            _, e, alpha, _ = _block_parts(
                ds.features.slice_rows(i0, i1), ds.labels[i0:i1], X, self.C
            )
            self._h[i0:i1] = e / alpha[:, None]

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise DimensionError(f"expected vector of length {self.dim}, got {v.shape}")
        Q = weights_as_matrix(v, self.p, self.C)
        acc = np.zeros((self.p, self.C - 1))
        for i0, i1 in _blocks(self.ds.n_rows, self.block_rows):
            feats = self.ds.features.slice_rows(i0, i1)
            W = self._h[i0:i1]
            V = feats.matmat(Q)
            VW = V * W
            U = VW - W * VW.sum(axis=1)[:, None]
            acc += feats.rmatmat(U)
        return self.scale * matrix_as_weights(acc) + self.lam * v

    __call__ = apply


def hess_vec(prob, x, v):
    """Hessian-vector product of the regularized objective.

    One-shot convenience; build a HessianOperator directly when many
    products at the same x are needed.
    """
    return HessianOperator(prob.dataset, x, prob.lam).apply(v)


def class_probabilities(ds, x):
    """n-by-C matrix of class probabilities, reference class last."""
    x = _check_dims(ds, x)
    X = weights_as_matrix(x, ds.n_features, ds.n_classes)
    out = np.empty((ds.n_rows, ds.n_classes))
    for i0, i1 in _blocks(ds.n_rows):
        m, e, alpha, _ = _block_parts(
            ds.features.slice_rows(i0, i1), ds.labels[i0:i1], X, ds.n_classes
        )
        out[i0:i1, :-1] = e / alpha[:, None]
        out[i0:i1, -1] = np.exp(-m) / alpha
    return out


def predict(ds, x):
    """Most probable class per row; ties break to the lowest class index."""
    return np.argmax(class_probabilities(ds, x), axis=1)


def accuracy(ds, x):
    """Fraction of rows whose predicted class equals the label."""
    if ds.n_rows == 0:
        raise DataError("accuracy is undefined on an empty dataset")
    return float(np.mean(predict(ds, x) == ds.labels))


def save_weights(path, x, p, n_classes):
    """Serialize a weight vector as text: header line `p,C`, then one
    value per line in block order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != ((n_classes - 1) * p,):
        raise DimensionError("weight vector length does not match header")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{p},{n_classes}\n")
        for v in x:
            fh.write(f"{float(v)!r}\n")


def load_weights(path):
    """Inverse of save_weights; returns (x, p, n_classes)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split(",")
        p, n_classes = int(header[0]), int(header[1])
        x = np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
    if x.shape != ((n_classes - 1) * p,):
        raise DimensionError("weight file length does not match its header")
    return x, p, n_classes
