"""Spatial indexing, capped ball-query neighborhoods, adjacency assembly,
farthest point sampling, and degree diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import NeighborList, PointCloud, SmoothingConfig, SparseAdjacency


@dataclass(frozen=True)
class SpatialIndex:
    """Exact spatial queries over a cloud via a uniform grid.

    Queries match exhaustive search exactly, including the (distance,
    index)-ascending tie-break. Construction is single-writer; queries
    are read-only and safe to run concurrently.
    """

    cloud: PointCloud
    grid: _kernels.Grid

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.cloud.points.min(axis=0), self.cloud.points.max(axis=0)

    def radius_query(self, point, r: float) -> np.ndarray:
        """All indices j with ||p_j - point|| <= r, ordered by (distance, index)."""
        ids, _ = _kernels.radius_candidates(self.grid, point, float(r))
        return ids

    def knn_query(self, point, k: int) -> tuple[np.ndarray, np.ndarray]:
        """The k nearest indices and distances, ties broken by smaller index."""
        point = np.asarray(point, dtype=np.float64)
        n = self.cloud.n
        k = min(int(k), n)
        lo, hi = self.bounds
        diameter = float(np.linalg.norm(hi - lo)) + float(
            np.linalg.norm(point - (lo + hi) / 2.0)
        )
        r = self.grid.cell
        while True:
            ids, d2 = _kernels.radius_candidates(self.grid, point, r)
            if len(ids) >= k or r > 2.0 * diameter + 1.0:
                break
            r *= 2.0
        return ids[:k], np.sqrt(d2[:k])


def build_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud=cloud, grid=_kernels.Grid(cloud.points))


def ball_query(index: SpatialIndex, i: int, cfg: SmoothingConfig) -> np.ndarray:
    """Neighborhood of point i: everything within the radius, capped at the
    k nearest (self always included since its distance is zero).

    Result is ordered by (distance, index) ascending.
    """
    ids, _ = _kernels.radius_candidates(index.grid, index.cloud.points[i], cfg.radius)
    return ids[: cfg.k]


def ball_query_all(index: SpatialIndex, cfg: SmoothingConfig) -> NeighborList:
    """Ball-query neighborhoods of every point at once (hot path)."""
    lengths, ids, _ = _kernels.ball_query_all(index.grid, cfg.radius, cfg.k)
    k = cfg.k
    lists = tuple(
        ids[i * k : i * k + lengths[i]] for i in range(index.cloud.n)
    )
    return NeighborList(lists=lists, max_size=k)


def build_adjacency(cloud: PointCloud, cfg: SmoothingConfig) -> SparseAdjacency:
    """Binary (possibly asymmetric) adjacency with rows given by ball query.

    Row i has entry (j, 1.0) iff j is in i's capped ball; the diagonal is
    always present because every point is its own nearest neighbor.
    """
    index = build_index(cloud)
    neighbors = ball_query_all(index, cfg)
    return adjacency_from_neighbor_list(neighbors)


def adjacency_from_neighbor_list(neighbors: NeighborList) -> SparseAdjacency:
    """Binary adjacency whose row i marks the members of list i."""
    n = neighbors.n
    indptr = np.zeros(n + 1, dtype=np.int64)
    cols = []
    for i in range(n):
        c = np.sort(neighbors[i])
        cols.append(c)
        indptr[i + 1] = indptr[i] + len(c)
    indices = np.concatenate(cols)
    return SparseAdjacency(n, indptr, indices, np.ones(len(indices), np.float64))


@dataclass(frozen=True)
class DegreeReport:
    """Row (out) and column (in) degree distributions of a directed adjacency."""

    out_degree: np.ndarray
    in_degree: np.ndarray
    out_histogram: dict[int, int]
    in_histogram: dict[int, int]
    summary: dict[str, dict[str, float]]


def _summary(deg: np.ndarray) -> dict[str, float]:
    return {
        "min": float(deg.min()),
        "max": float(deg.max()),
        "mean": float(deg.mean()),
        "stddev": float(deg.std()),
    }


def _histogram(deg: np.ndarray) -> dict[int, int]:
    values, counts = np.unique(deg, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def degree_report(adj: SparseAdjacency) -> DegreeReport:
    out_deg = adj.row_lengths().astype(np.int64)
    in_deg = adj.column_counts().astype(np.int64)
    return DegreeReport(
        out_degree=out_deg,
        in_degree=in_deg,
        out_histogram=_histogram(out_deg),
        in_histogram=_histogram(in_deg),
        summary={"out": _summary(out_deg), "in": _summary(in_deg)},
    )


def farthest_point_sample(cloud: PointCloud, m: int, seed_index: int = 0) -> np.ndarray:
    """Greedy max-min subset of m indices; ties resolved to the smaller index."""
    if not 1 <= m <= cloud.n:
        raise ValueError(f"m={m} out of range [1, {cloud.n}]")
    if not 0 <= seed_index < cloud.n:
        raise ValueError(f"seed_index={seed_index} out of range")
    return _kernels.fps(cloud.points, m, seed_index)
