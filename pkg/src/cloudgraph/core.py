"""Core data types: point clouds, CSR adjacency, neighbor lists, smoothing config."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12


class InvariantViolation(Exception):
    """An internal invariant of a constructed object or pipeline stage was broken."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of 3D points with an optional per-point feature matrix.

    The constructor only coerces shapes; content invariants (finite
    coordinates, matching feature rows) are checked by ``validate_cloud``
    so that broken inputs can be reported rather than rejected blindly.
    """

    points: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        object.__setattr__(self, "points", _freeze(pts))
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2:
                raise ValueError(f"features must be 2-D, got ndim={feats.ndim}")
            object.__setattr__(self, "features", _freeze(feats))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def feature_width(self) -> int:
        return 0 if self.features is None else self.features.shape[1]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def validate_cloud(cloud: PointCloud) -> ValidationReport:
    """Report every invariant violation of a cloud; never raises."""
    violations: list[str] = []
    if cloud.n < 1:
        violations.append("cloud has no points (n must be >= 1)")
    bad = ~np.isfinite(cloud.points).all(axis=1)
    for i in np.nonzero(bad)[0]:
        violations.append(f"point {i}: non-finite coordinate {cloud.points[i].tolist()}")
    if cloud.features is not None:
        f = cloud.features
        if f.shape[0] != cloud.n:
            violations.append(
                f"feature matrix has {f.shape[0]} rows for {cloud.n} points"
            )
        if f.shape[1] < 1:
            violations.append("feature matrix must have width >= 1")
        bad = ~np.isfinite(f).all(axis=1)
        for i in np.nonzero(bad)[0]:
            violations.append(f"point {i}: non-finite feature value")
    return ValidationReport(ok=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class SparseAdjacency:
    """Weighted n x n sparse matrix in CSR form.

    Column indices are strictly increasing within each row, stored weights
    are strictly positive (explicit zeros are never kept), and a raised
    ``symmetric`` flag is verified on construction: entry (i, j) must exist
    iff (j, i) exists with weights matching within ``SYMMETRY_TOL``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        n = int(self.n)
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if n < 0:
            raise ValueError("n must be nonnegative")
        if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("malformed indptr")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if len(indices) != len(data):
            raise ValueError("indices/data length mismatch")
        if len(indices):
            if indices.min() < 0 or indices.max() >= n:
                raise ValueError("column index out of range")
            if not np.isfinite(data).all():
                raise ValueError("non-finite weight")
            if np.any(data <= 0.0):
                raise ValueError("weights must be > 0 (explicit zeros are never stored)")
            # strictly increasing columns per row: only row starts may decrease
            step_down = np.nonzero(np.diff(indices) <= 0)[0] + 1
            if len(step_down) and not np.isin(step_down, indptr[1:-1]).all():
                raise ValueError("column indices must be strictly increasing per row")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "indptr", _freeze(indptr))
        object.__setattr__(self, "indices", _freeze(indices))
        object.__setattr__(self, "data", _freeze(data))
        if self.symmetric:
            self._check_symmetric()

    def _transpose_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        order = np.lexsort((rows, self.indices))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.indices, minlength=self.n), out=indptr[1:])
        return indptr, rows[order], self.data[order]

    def _check_symmetric(self):
        tp, ti, tx = self._transpose_arrays()
        if not np.array_equal(tp, self.indptr) or not np.array_equal(ti, self.indices):
            raise InvariantViolation(
                "symmetric flag raised but sparsity pattern is not symmetric"
            )
        err = np.abs(tx - self.data)
        if len(err) and err.max() > SYMMETRY_TOL:
            raise InvariantViolation(
                f"symmetric flag raised but weights mismatch by {err.max():.3e} "
                f"(tolerance {SYMMETRY_TOL})"
            )

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(column indices, weights) of row i."""
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.data[s:e]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.indptr)

    def column_counts(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.n)

    def transpose(self) -> "SparseAdjacency":
        tp, ti, tx = self._transpose_arrays()
        out = SparseAdjacency(self.n, tp, ti, tx, symmetric=False)
        if self.symmetric:  # transposition preserves symmetry; skip re-check
            object.__setattr__(out, "symmetric", True)
        return out

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        for a in (self.indptr, self.indices, self.data):
            h.update(a.tobytes())
        return h.hexdigest()

    @classmethod
    def from_rows(cls, n, rows, symmetric=False) -> "SparseAdjacency":
        """Build from per-row iterables of (column, weight) pairs.

        Pairs within a row may arrive unordered; duplicates are rejected.
        """
        indptr = np.zeros(n + 1, dtype=np.int64)
        cols_all, data_all = [], []
        for i, pairs in enumerate(rows):
            pairs = sorted(pairs)
            cols = np.array([c for c, _ in pairs], dtype=np.int64)
            if len(np.unique(cols)) != len(cols):
                raise ValueError(f"duplicate column in row {i}")
            cols_all.append(cols)
            data_all.append(np.array([w for _, w in pairs], dtype=np.float64))
            indptr[i + 1] = indptr[i] + len(cols)
        indices = np.concatenate(cols_all) if cols_all else np.empty(0, np.int64)
        data = np.concatenate(data_all) if data_all else np.empty(0, np.float64)
        return cls(n, indptr, indices, data, symmetric=symmetric)

    @classmethod
    def from_dense(cls, dense, symmetric=False) -> "SparseAdjacency":
        dense = np.asarray(dense, dtype=np.float64)
        n = dense.shape[0]
        indptr = np.zeros(n + 1, dtype=np.int64)
        cols, data = [], []
        for i in range(n):
            nz = np.nonzero(dense[i])[0]
            cols.append(nz.astype(np.int64))
            data.append(dense[i, nz])
            indptr[i + 1] = indptr[i] + len(nz)
        return cls(
            n,
            indptr,
            np.concatenate(cols) if cols else np.empty(0, np.int64),
            np.concatenate(data) if data else np.empty(0, np.float64),
            symmetric=symmetric,
        )

    @classmethod
    def identity(cls, n) -> "SparseAdjacency":
        return cls(
            n,
            np.arange(n + 1, dtype=np.int64),
            np.arange(n, dtype=np.int64),
            np.ones(n, dtype=np.float64),
            symmetric=True,
        )


DENSE_GUARD = 4096


def dense_of(sparse: SparseAdjacency) -> np.ndarray:
    """Dense n x n copy of a sparse adjacency (test-oracle bridge, n <= 4096)."""
    if sparse.n > DENSE_GUARD:
        raise ValueError(f"dense_of guard: n={sparse.n} exceeds {DENSE_GUARD}")
    out = np.zeros((sparse.n, sparse.n), dtype=np.float64)
    rows = np.repeat(np.arange(sparse.n), np.diff(sparse.indptr))
    out[rows, sparse.indices] = sparse.data
    return out


@dataclass(frozen=True)
class NeighborList:
    """Per-point ordered neighbor index lists (list i belongs to point i).

    Every list is nonempty, contains its own point index, holds no
    duplicates, and is no longer than ``max_size``.
    """

    lists: tuple[np.ndarray, ...]
    max_size: int

    def __post_init__(self):
        lists = tuple(
            _freeze(np.ascontiguousarray(l, dtype=np.int64)) for l in self.lists
        )
        for i, l in enumerate(lists):
            if len(l) == 0:
                raise InvariantViolation(f"neighbor list {i} is empty")
            if i not in l:
                raise InvariantViolation(f"neighbor list {i} does not contain itself")
            if len(np.unique(l)) != len(l):
                raise InvariantViolation(f"neighbor list {i} has duplicates")
            if len(l) > self.max_size:
                raise InvariantViolation(
                    f"neighbor list {i} has {len(l)} entries, max_size={self.max_size}"
                )
        object.__setattr__(self, "lists", lists)

    @property
    def n(self) -> int:
        return len(self.lists)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.lists[i]

    def __len__(self) -> int:
        return len(self.lists)

    def in_selection_counts(self) -> np.ndarray:
        """How many lists each point appears in (self-inclusion counted)."""
        flat = np.concatenate(self.lists)
        return np.bincount(flat, minlength=self.n)


@dataclass(frozen=True)
class SmoothingConfig:
    """Neighborhood and diffusion parameters shared across the pipeline.

    ``k_out`` defaults to ``k``; ``eps`` guards degenerate geometry.
    """

    radius: float
    k: int
    alpha: float = 0.5
    t_order: int = 3
    k_out: int | None = None
    eps: float = 1e-9

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be > 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in the open interval (0, 1)")
        if self.t_order < 0:
            raise ValueError("t_order must be >= 0")
        if self.k_out is None:
            object.__setattr__(self, "k_out", self.k)
        if self.k_out < 1:
            raise ValueError("k_out must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")

    def content_hash(self) -> str:
        text = (
            f"r={self.radius!r};k={self.k};alpha={self.alpha!r};"
            f"T={self.t_order};k_out={self.k_out};eps={self.eps!r}"
        )
        return hashlib.sha256(text.encode()).hexdigest()
