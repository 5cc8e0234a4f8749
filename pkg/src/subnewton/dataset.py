"""Labeled dataset ingestion, normalization, splitting and addressing.

Feature matrices are stored either dense (row-major float64) or sparse
(CSR); storage is picked automatically from the density of the parsed
data and can be overridden.  All objects are immutable after
construction and safe to share across concurrent readers.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError, DimensionError, ParseError
from .rng import SPLIT_STREAM, stream_rng

# parsed data denser than this is stored as a plain ndarray
DENSE_DENSITY_THRESHOLD = 0.25


class DesignMatrix:
    """n-by-p feature matrix, dense row-major or compressed-sparse-row.

    Row i is the feature vector of data point i.  Both storages expose
    the same product interface; `matvec` results agree to <= 1e-12
    relative error between the two forms of the same data.
    """

    __slots__ = ("_mat", "is_sparse")

    def __init__(self, mat):
        if sp.issparse(mat):
            mat = sp.csr_array(mat, dtype=np.float64)
            self._validate_csr(mat)
            self.is_sparse = True
        else:
            mat = np.ascontiguousarray(mat, dtype=np.float64)
            if mat.ndim != 2:
                raise DimensionError(f"feature matrix must be 2-D, got shape {mat.shape}")
            self.is_sparse = False
        self._mat = mat

    @staticmethod
    def _validate_csr(mat):
        indptr, indices = mat.indptr, mat.indices
        if indptr[0] != 0 or np.any(np.diff(indptr) < 0):
            raise DataError("CSR row offsets must be non-decreasing and start at 0")
        if indptr[-1] != len(mat.data):
            raise DataError("final CSR row offset must equal the number of stored values")
        if len(indices) and (indices.min() < 0 or indices.max() >= mat.shape[1]):
            raise DataError("CSR column index out of range")

    @property
    def n_rows(self):
        return self._mat.shape[0]

    @property
    def n_cols(self):
        return self._mat.shape[1]

    @property
    def shape(self):
        return self._mat.shape

    @property
    def density(self):
        size = self.n_rows * self.n_cols
        if size == 0:
            return 0.0
        nnz = self._mat.nnz if self.is_sparse else np.count_nonzero(self._mat)
        return nnz / size

    def matvec(self, v):
        """A @ v for a length-p vector."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n_cols,):
            raise DimensionError(f"matvec expects length {self.n_cols}, got {v.shape}")
        return self._mat @ v

    def matmat(self, X):
        """Dense A @ X for a p-by-k dense matrix."""
        out = self._mat @ X
        return np.asarray(out)

    def rmatmat(self, U):
        """Dense A.T @ U for an n-by-k dense matrix."""
        out = self._mat.T @ U
        return np.asarray(out)

    def take(self, indices):
        """Row gather.  The identity selection returns self unchanged,
        which keeps full-sample evaluations bit-identical to the
        unsampled code path."""
        indices = np.asarray(indices, dtype=np.intp)
        if len(indices) == self.n_rows and np.array_equal(indices, np.arange(self.n_rows)):
            return self
        return DesignMatrix(self._mat[indices])

    def slice_rows(self, i0, i1):
        """Contiguous row block [i0, i1); a view for both storages."""
        return DesignMatrix(self._mat[i0:i1])

    def column_norms(self):
        if self.is_sparse:
            sq = self._mat.multiply(self._mat).sum(axis=0)
            return np.sqrt(np.asarray(sq).ravel())
        return np.sqrt((self._mat**2).sum(axis=0))

    def scale_columns(self, scale):
        """New matrix with column j multiplied by scale[j]; preserves sparsity."""
        scale = np.asarray(scale, dtype=np.float64)
        if scale.shape != (self.n_cols,):
            raise DimensionError("one scale factor per column required")
        if self.is_sparse:
            scaled = self._mat.copy()
            scaled.data = scaled.data * scale[scaled.indices]
            return DesignMatrix(scaled)
        return DesignMatrix(self._mat * scale)

    def toarray(self):
        if self.is_sparse:
            return self._mat.toarray()
        return np.array(self._mat)

    def to_sparse(self):
        if self.is_sparse:
            return self
        return DesignMatrix(sp.csr_array(self._mat))

    def to_dense(self):
        if self.is_sparse:
            return DesignMatrix(self._mat.toarray())
        return self

    def iter_nonzero(self):
        """Yield (row, col, value) triples of stored entries, row-major."""
        if self.is_sparse:
            m = self._mat
            for i in range(self.n_rows):
                for k in range(m.indptr[i], m.indptr[i + 1]):
                    yield i, int(m.indices[k]), float(m.data[k])
        else:
            for i in range(self.n_rows):
                row = self._mat[i]
                for j in np.nonzero(row)[0]:
                    yield i, int(j), float(row[j])


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus 0-based class labels and a class count C >= 2.

    Treated as immutable everywhere; never mutate `features` or `labels`
    after construction.
    """

    features: DesignMatrix
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        if self.n_classes < 2:
            raise DataError(f"need at least 2 classes, got {self.n_classes}")
        if len(self.labels) != self.features.n_rows:
            raise DimensionError(
                f"{len(self.labels)} labels for {self.features.n_rows} rows"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DataError(f"labels must lie in [0, {self.n_classes})")

    @property
    def n_rows(self):
        return self.features.n_rows

    @property
    def n_features(self):
        return self.features.n_cols

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        feats = self.features.take(indices)
        if feats is self.features:
            return self
        return LabeledDataset(feats, self.labels[indices], self.n_classes)

    def slice_rows(self, i0, i1):
        return LabeledDataset(
            self.features.slice_rows(i0, i1), self.labels[i0:i1], self.n_classes
        )


def _remap_labels(raw, n_classes):
    """Map raw label values onto the contiguous range 0..K-1 by sorted order.

    The highest raw label becomes the highest index, i.e. the reference
    class whose weights are pinned to zero.
    """
    raw = np.asarray(raw, dtype=np.float64)
    distinct = np.unique(raw)
    if len(distinct) > n_classes:
        raise DataError(
            f"found {len(distinct)} distinct labels but only {n_classes} classes declared"
        )
    lookup = {v: i for i, v in enumerate(distinct)}
    return np.array([lookup[v] for v in raw], dtype=np.int64)


def _pick_storage(csr, storage):
    if storage == "sparse":
        return DesignMatrix(csr)
    if storage == "dense":
        return DesignMatrix(csr.toarray())
    if storage != "auto":
        raise ValueError(f"storage must be auto|dense|sparse, got {storage!r}")
    dm = DesignMatrix(csr)
    if dm.density > DENSE_DENSITY_THRESHOLD:
        return dm.to_dense()
    return dm


def load_libsvm(path, n_classes, n_features=None, storage="auto"):
    """Load a LIBSVM/svmlight text file.

    Each line is `<label> <idx>:<val> ...` with 1-based feature indices.
    Labels are remapped to the 0-based contiguous range by sorted raw
    value; the feature dimension is the maximum index seen unless
    `n_features` overrides it.

    Parameters
    ----------
    path : str
        File to read (UTF-8, whitespace separated).
    n_classes : int
        Declared class count C; more than C distinct labels is an error.
    n_features : int, optional
        Fixed feature dimension (useful to align several files).
    storage : {"auto", "dense", "sparse"}
        "auto" densifies when more than 25% of entries are nonzero.
    """
    raw_labels = []
    data, indices, indptr = [], [], [0]
    max_index = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                raw_labels.append(float(parts[0]))
            except ValueError:
                raise ParseError(f"bad label {parts[0]!r}", lineno) from None
            for token in parts[1:]:
                idx, sep, val = token.partition(":")
                if not sep:
                    raise ParseError(f"expected idx:val pair, got {token!r}", lineno)
                try:
                    idx = int(idx)
                    val = float(val)
                except ValueError:
                    raise ParseError(f"bad idx:val pair {token!r}", lineno) from None
                if idx < 1:
                    raise ParseError(f"feature indices are 1-based, got {idx}", lineno)
                indices.append(idx - 1)
                data.append(val)
                max_index = max(max_index, idx)
            indptr.append(len(data))

    p = max_index if n_features is None else int(n_features)
    if n_features is not None and max_index > n_features:
        raise DataError(f"file uses feature index {max_index} > declared {n_features}")
    csr = sp.csr_array(
        (
            np.array(data, dtype=np.float64),
            np.array(indices, dtype=np.int32),
            np.array(indptr, dtype=np.int64),
        ),
        shape=(len(raw_labels), p),
    )
    labels = _remap_labels(raw_labels, n_classes)
    return LabeledDataset(_pick_storage(csr, storage), labels, n_classes)


def save_libsvm(ds, path):
    """Write a dataset in LIBSVM format (1-based indices, 0-based labels).

    Values are written with shortest round-trip formatting, so
    load -> save -> load reproduces the parsed decimals exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        rows = [[] for _ in range(ds.n_rows)]
        for i, j, v in ds.features.iter_nonzero():
            rows[i].append(f"{j + 1}:{v!r}")
        for i in range(ds.n_rows):
            fh.write(" ".join([str(int(ds.labels[i]))] + rows[i]) + "\n")


def load_csv(path, n_classes, storage="dense"):
    """Load a dense CSV file: one row per sample, last column = integer label."""
    try:
        table = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if table.size == 0:
        return LabeledDataset(
            DesignMatrix(np.zeros((0, 0))), np.zeros(0, dtype=np.int64), n_classes
        )
    features = table[:, :-1]
    labels = _remap_labels(table[:, -1], n_classes)
    csr = sp.csr_array(features)
    return LabeledDataset(_pick_storage(csr, storage), labels, n_classes)


def normalize_columns(ds):
    """Scale every column with nonzero norm to unit Euclidean norm.

    Zero columns are left untouched (no stored entries to divide).
    Idempotent up to rounding.
    """
    norms = ds.features.column_norms()
    scale = np.ones_like(norms)
    nz = norms > 0
    scale[nz] = 1.0 / norms[nz]
    return LabeledDataset(ds.features.scale_columns(scale), ds.labels, ds.n_classes)


def train_test_split(ds, train_fraction, seed):
    """Disjoint row partition of sizes (ceil(f*n), n - ceil(f*n)).

    Deterministic for a fixed seed; rows within each part keep their
    original relative order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = ds.n_rows
    if n < 2:
        raise DataError(f"need at least 2 rows to split, got {n}")
    n_train = int(np.ceil(train_fraction * n))
    perm = stream_rng(seed, SPLIT_STREAM).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return ds.take(train_idx), ds.take(test_idx)
