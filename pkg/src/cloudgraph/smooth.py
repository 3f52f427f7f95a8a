"""Symmetric adjacency refinement, degree normalization, truncated von Neumann
smoothing, neighborhood reselection, and the exact-kernel / path-sum oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import InvariantViolation, NeighborList, PointCloud, SmoothingConfig, SparseAdjacency, dense_of

VON_NEUMANN_GUARD = 512
PATH_SUM_N_GUARD = 64
PATH_SUM_T_GUARD = 4


def _require_binary(adj: SparseAdjacency, op: str) -> None:
    if adj.nnz and not np.all(adj.data == 1.0):
        raise ValueError(f"{op} requires a binary adjacency (weights in {{0, 1}})")


def symmetric_refine(adj: SparseAdjacency) -> SparseAdjacency:
    """Keep only mutual edges of a binary adjacency.

    Floored averaging of a binary matrix with its transpose reduces to the
    intersection of (i, j) and (j, i); the intersection is computed directly
    to avoid float-to-int hazards. Self-loops trivially survive.
    """
    _require_binary(adj, "symmetric_refine")
    n = adj.n
    rows = np.repeat(np.arange(n, dtype=np.int64), adj.row_lengths())
    keys = rows * n + adj.indices  # strictly increasing
    tkeys = adj.indices * n + rows
    mutual = np.isin(keys, tkeys, assume_unique=True)
    kept_rows = rows[mutual]
    kept_cols = adj.indices[mutual]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(kept_rows, minlength=n), out=indptr[1:])
    return SparseAdjacency(
        n, indptr, kept_cols, np.ones(len(kept_cols), np.float64), symmetric=True
    )


def symmetric_normalize(adj_sym: SparseAdjacency) -> SparseAdjacency:
    """Reweight a symmetric binary adjacency to 1/sqrt(d_i * d_j).

    Degrees are row nonzero counts (self-loops count); zero-degree rows stay
    empty, so no division by zero can occur.
    """
    if not adj_sym.symmetric:
        raise ValueError("symmetric_normalize requires a symmetric adjacency")
    _require_binary(adj_sym, "symmetric_normalize")
    n = adj_sym.n
    deg = adj_sym.row_lengths().astype(np.float64)
    rows = np.repeat(np.arange(n, dtype=np.int64), adj_sym.row_lengths())
    vals = 1.0 / np.sqrt(deg[rows] * deg[adj_sym.indices])
    return SparseAdjacency(
        n, adj_sym.indptr.copy(), adj_sym.indices.copy(), vals, symmetric=True
    )


@dataclass(frozen=True)
class SmoothedGraph:
    """Finite power-sum diffusion matrix with its construction parameters.

    Invariants checked on construction: symmetry, nonnegative entries, every
    diagonal entry >= 1 (the order-zero identity term), and each diagonal
    dominating its row's off-diagonal entries.
    """

    s_matrix: SparseAdjacency
    order_used: int
    alpha_used: float
    provenance: dict[str, str]

    def __post_init__(self):
        s = self.s_matrix
        if not s.symmetric:
            raise InvariantViolation("smoothed matrix must carry the symmetric flag")
        n = s.n
        rows = np.repeat(np.arange(n, dtype=np.int64), s.row_lengths())
        diag_mask = rows == s.indices
        diag = np.zeros(n)
        diag[rows[diag_mask]] = s.data[diag_mask]
        if np.any(diag < 1.0):
            raise InvariantViolation(
                "smoothed matrix has a diagonal entry below the identity term"
            )
        off_max = np.zeros(n)
        np.maximum.at(off_max, rows[~diag_mask], s.data[~diag_mask])
        worst = (off_max - diag).max() if n else 0.0
        if worst > 1e-12:
            raise InvariantViolation(
                f"off-diagonal exceeds diagonal by {worst:.3e}; "
                "diagonal dominance of the smoothing kernel is broken"
            )

    @property
    def n(self) -> int:
        return self.s_matrix.n


def smooth(
    adj_norm: SparseAdjacency, cfg: SmoothingConfig, prune_below: float = 0.0
) -> SmoothedGraph:
    """Truncated geometric series of the attenuated normalized adjacency.

    Computed by iterated sparse multiply-accumulate: P <- alpha*A_norm @ P,
    S <- S + P, starting from the identity (order zero gives the identity).
    ``prune_below`` is a performance escape hatch that drops entry pairs whose
    values both fall under the threshold; the default keeps everything.
    """
    if not adj_norm.symmetric:
        raise ValueError("smooth requires a symmetric normalized adjacency")
    if not 0.0 < cfg.alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    n = adj_norm.n
    m_data = cfg.alpha * adj_norm.data
    mp, mj = adj_norm.indptr, adj_norm.indices
    sp = np.arange(n + 1, dtype=np.int64)
    sj = np.arange(n, dtype=np.int64)
    sx = np.ones(n, np.float64)
    pp, pj, px = sp, sj, sx
    for _ in range(cfg.t_order):
        pp, pj, px = _kernels.csr_matmul(n, mp, mj, m_data, pp, pj, px)
        keep = px != 0.0  # guard against underflow-to-zero entries
        if not keep.all():
            pp2 = np.zeros(n + 1, np.int64)
            rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(pp))[keep]
            np.cumsum(np.bincount(rows, minlength=n), out=pp2[1:])
            pp, pj, px = pp2, pj[keep], px[keep]
        sp, sj, sx = _kernels.csr_add(n, sp, sj, sx, pp, pj, px)
    if prune_below > 0.0:
        sp, sj, sx = _prune_pairwise(n, sp, sj, sx, prune_below)
    s_matrix = SparseAdjacency(n, sp, sj, sx, symmetric=True)
    return SmoothedGraph(
        s_matrix=s_matrix,
        order_used=cfg.t_order,
        alpha_used=cfg.alpha,
        provenance={
            "adjacency_sha256": adj_norm.content_hash(),
            "config_sha256": cfg.content_hash(),
        },
    )


def _prune_pairwise(n, sp, sj, sx, threshold):
    """Drop (i,j) only when both (i,j) and (j,i) fall below the threshold,
    preserving pattern symmetry."""
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(sp))
    keys = rows * n + sj
    small = sx < threshold
    small_tkeys = sj[small] * n + rows[small]
    both_small = small & np.isin(keys, np.sort(small_tkeys), assume_unique=True)
    keep = ~both_small | (rows == sj)  # never drop the diagonal
    kept_rows = rows[keep]
    sp2 = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(kept_rows, minlength=n), out=sp2[1:])
    return sp2, sj[keep], sx[keep]


def exact_von_neumann(adj_norm: SparseAdjacency, alpha: float) -> np.ndarray:
    """Exact diffusion kernel (I - alpha*A_norm)^-1 via dense solve (test oracle).

    Verifies its own residual and the row-wise diagonal dominance the
    smoothing relies on, failing loudly if either breaks.
    """
    if adj_norm.n > VON_NEUMANN_GUARD:
        raise ValueError(f"exact_von_neumann guard: n={adj_norm.n} > {VON_NEUMANN_GUARD}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    n = adj_norm.n
    a = dense_of(adj_norm)
    system = np.eye(n) - alpha * a
    kernel = np.linalg.solve(system, np.eye(n))
    residual = np.abs(system @ kernel - np.eye(n)).max()
    if residual > 1e-8:
        raise InvariantViolation(f"kernel solve residual {residual:.3e} exceeds 1e-8")
    off = kernel - np.diag(np.diag(kernel))
    worst = (off.max(axis=1) - np.diag(kernel)).max()
    if worst > 1e-12:
        raise InvariantViolation(
            f"kernel diagonal dominance violated by {worst:.3e}"
        )
    return kernel


def path_sum(adj_norm: SparseAdjacency, i: int, j: int, t: int) -> float:
    """Sum of weight products over all walks of exactly length t from i to j
    (combinatorial test oracle; equals the (i, j) entry of the t-th power)."""
    if adj_norm.n > PATH_SUM_N_GUARD:
        raise ValueError(f"path_sum guard: n={adj_norm.n} > {PATH_SUM_N_GUARD}")
    if t > PATH_SUM_T_GUARD:
        raise ValueError(f"path_sum guard: t={t} > {PATH_SUM_T_GUARD}")
    if t < 0:
        raise ValueError("t must be >= 0")
    total = 0.0

    def walk(u: int, depth: int, prod: float) -> None:
        nonlocal total
        if depth == t:
            if u == j:
                total += prod
            return
        cols, vals = adj_norm.row(u)
        for c, v in zip(cols, vals):
            walk(int(c), depth + 1, prod * float(v))

    walk(i, 0, 1.0)
    return total


def reselect_neighborhoods(
    sg: SmoothedGraph, cloud: PointCloud, k_out: int
) -> NeighborList:
    """Top-K entries of each smoothed row as the point's refined neighborhood.

    Ties in weight are broken by smaller Euclidean distance to the query
    point, then by smaller index; output lists are ordered by descending
    weight. The self entry always survives thanks to diagonal dominance.
    """
    if k_out < 1:
        raise ValueError("k_out must be >= 1")
    s = sg.s_matrix
    pts = cloud.points
    lists = []
    for i in range(s.n):
        cols, w = s.row(i)
        d2 = _kernels.squared_dists(pts[cols], pts[i])
        order = np.lexsort((cols, d2, -w))
        lists.append(cols[order[:k_out]])
    return NeighborList(lists=tuple(lists), max_size=k_out)


def boundary_junction_classify(adj: SparseAdjacency, k: int) -> np.ndarray:
    """Label points as boundary-like, junction-like, or interior from degrees.

    Uses row counts as out-degrees and column counts as in-degrees:
    boundary-like iff d_out < d_in <= k, junction-like iff d_out > k and
    d_in == k. For a capped neighbor graph whose rows are query results, the
    row count can never exceed the cap, so the interesting classes live on
    the transposed adjacency; pass ``adj.transpose()`` to classify by how
    often each point is claimed as a neighbor.
    """
    out_deg = adj.row_lengths()
    in_deg = adj.column_counts()
    labels = np.full(adj.n, "interior", dtype="<U13")
    labels[(out_deg < in_deg) & (in_deg <= k)] = "boundary-like"
    labels[(out_deg > k) & (in_deg == k)] = "junction-like"
    return labels
