"""Hot numeric kernels with numba-jitted and pure-numpy twins.

The active path is chosen at import time from the ``CLOUDGRAPH_NUMBA``
environment variable ("0"/"false"/"off"/"no" selects the numpy fallback)
and can be switched at runtime with ``set_backend``.  Both paths produce
bitwise-identical results: squared distances are accumulated coordinate by
coordinate in the same order, scatter-adds replay the same accumulation
sequence, and ties are broken by ascending point index everywhere.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "CLOUDGRAPH_NUMBA"


def _env_allows_numba() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in (
        "0",
        "false",
        "off",
        "no",
    )


_njit = None
if _env_allows_numba():
    try:
        from numba import njit as _njit
    except ImportError:  # numba missing: silently fall back
        _njit = None

_BACKEND = "numba" if _njit is not None else "numpy"


def backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Switch between "numba" and "numpy" kernel paths (used by benchmarks/tests)."""
    global _BACKEND, _njit
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and _njit is None:
        from numba import njit as _njit_mod  # raises if numba unavailable

        _njit = _njit_mod
        _compile_numba()
    _BACKEND = name


# ---------------------------------------------------------------------------
# uniform grid over the cloud (shared, numpy)

class Grid:
    """Uniform spatial hash over the points; cells keyed by linearized index."""

    __slots__ = (
        "points",
        "origin",
        "cell",
        "dims",
        "sorted_ids",
        "cell_keys",
        "cell_offsets",
    )

    def __init__(self, points: np.ndarray):
        points = np.ascontiguousarray(points, dtype=np.float64)
        n = len(points)
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        extent = float((hi - lo).max())
        cell = extent / max(1.0, np.ceil((2 * n) ** (1.0 / 3.0))) if extent > 0 else 1.0
        dims = np.maximum(1, np.floor((hi - lo) / cell).astype(np.int64) + 1)
        coords = np.clip(
            np.floor((points - lo) / cell).astype(np.int64), 0, dims - 1
        )
        keys = (coords[:, 0] * dims[1] + coords[:, 1]) * dims[2] + coords[:, 2]
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        uniq, starts = np.unique(sorted_keys, return_index=True)
        self.points = points
        self.origin = lo
        self.cell = cell
        self.dims = dims
        self.sorted_ids = order.astype(np.int64)
        self.cell_keys = uniq.astype(np.int64)
        self.cell_offsets = np.append(starts, n).astype(np.int64)

    def box_candidates(self, q: np.ndarray, r: float) -> np.ndarray:
        """Indices of all points whose cells overlap the r-box around q."""
        lo = np.clip(
            np.floor((q - r - self.origin) / self.cell).astype(np.int64),
            0,
            self.dims - 1,
        )
        hi = np.clip(
            np.floor((q + r - self.origin) / self.cell).astype(np.int64),
            0,
            self.dims - 1,
        )
        cx = np.arange(lo[0], hi[0] + 1)
        cy = np.arange(lo[1], hi[1] + 1)
        cz = np.arange(lo[2], hi[2] + 1)
        keys = (
            (cx[:, None, None] * self.dims[1] + cy[None, :, None]) * self.dims[2]
            + cz[None, None, :]
        ).ravel()
        pos = np.searchsorted(self.cell_keys, keys)
        valid = pos < len(self.cell_keys)
        pos = pos[valid]
        hit = pos[self.cell_keys[pos] == keys[valid]]
        out = [
            self.sorted_ids[self.cell_offsets[p] : self.cell_offsets[p + 1]]
            for p in np.unique(hit)
        ]
        return np.concatenate(out) if out else np.empty(0, np.int64)


def squared_dists(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = points - q
    return (diff * diff).sum(axis=1)


def radius_candidates(grid: Grid, q, r) -> tuple[np.ndarray, np.ndarray]:
    """Exact r-ball around q as (ids sorted by (d2, id), their d2)."""
    cand = grid.box_candidates(np.asarray(q, dtype=np.float64), r)
    cand = np.sort(cand)
    d2 = squared_dists(grid.points[cand], np.asarray(q, dtype=np.float64))
    keep = d2 <= r * r
    cand, d2 = cand[keep], d2[keep]
    order = np.argsort(d2, kind="stable")  # stable: ties stay id-ascending
    return cand[order], d2[order]


# ---------------------------------------------------------------------------
# batch ball query: numba grid scan / numpy brute force

def _nb_ball_query_all_impl(points, sorted_ids, cell_keys, cell_offsets,
                            origin, cell, dims, r, k):
    n = points.shape[0]
    r2 = r * r
    out_ids = np.empty(n * k, np.int64)
    out_d2 = np.empty(n * k, np.float64)
    lengths = np.zeros(n, np.int64)
    ncells = len(cell_keys)
    for i in range(n):
        qx = points[i, 0]
        qy = points[i, 1]
        qz = points[i, 2]
        lo0 = max(0, min(dims[0] - 1, int(np.floor((qx - r - origin[0]) / cell))))
        hi0 = max(0, min(dims[0] - 1, int(np.floor((qx + r - origin[0]) / cell))))
        lo1 = max(0, min(dims[1] - 1, int(np.floor((qy - r - origin[1]) / cell))))
        hi1 = max(0, min(dims[1] - 1, int(np.floor((qy + r - origin[1]) / cell))))
        lo2 = max(0, min(dims[2] - 1, int(np.floor((qz - r - origin[2]) / cell))))
        hi2 = max(0, min(dims[2] - 1, int(np.floor((qz + r - origin[2]) / cell))))
        # upper bound on candidates in the box
        cap = 0
        for cx in range(lo0, hi0 + 1):
            for cy in range(lo1, hi1 + 1):
                for cz in range(lo2, hi2 + 1):
                    key = (cx * dims[1] + cy) * dims[2] + cz
                    p = np.searchsorted(cell_keys, key)
                    if p < ncells and cell_keys[p] == key:
                        cap += cell_offsets[p + 1] - cell_offsets[p]
        ids = np.empty(cap, np.int64)
        cnt = 0
        for cx in range(lo0, hi0 + 1):
            for cy in range(lo1, hi1 + 1):
                for cz in range(lo2, hi2 + 1):
                    key = (cx * dims[1] + cy) * dims[2] + cz
                    p = np.searchsorted(cell_keys, key)
                    if p < ncells and cell_keys[p] == key:
                        for t in range(cell_offsets[p], cell_offsets[p + 1]):
                            j = sorted_ids[t]
                            dx = points[j, 0] - qx
                            dy = points[j, 1] - qy
                            dz = points[j, 2] - qz
                            if dx * dx + dy * dy + dz * dz <= r2:
                                ids[cnt] = j
                                cnt += 1
        ids = np.sort(ids[:cnt])
        d2 = np.empty(cnt, np.float64)
        for t in range(cnt):
            j = ids[t]
            dx = points[j, 0] - qx
            dy = points[j, 1] - qy
            dz = points[j, 2] - qz
            d2[t] = dx * dx + dy * dy + dz * dz
        order = np.argsort(d2, kind="mergesort")
        m = min(k, cnt)
        base = i * k
        for t in range(m):
            out_ids[base + t] = ids[order[t]]
            out_d2[base + t] = d2[order[t]]
        lengths[i] = m
    return lengths, out_ids, out_d2


def _np_ball_query_all(points, r, k):
    n = len(points)
    r2 = r * r
    out_ids = np.empty(n * k, np.int64)
    out_d2 = np.empty(n * k, np.float64)
    lengths = np.zeros(n, np.int64)
    chunk = max(1, int(4_000_000 // max(n, 1)))
    for s in range(0, n, chunk):
        block = points[s : s + chunk]
        diff = block[:, None, :] - points[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        for bi in range(len(block)):
            i = s + bi
            ids = np.nonzero(d2[bi] <= r2)[0]
            dd = d2[bi, ids]
            order = np.argsort(dd, kind="stable")
            m = min(k, len(ids))
            base = i * k
            out_ids[base : base + m] = ids[order[:m]]
            out_d2[base : base + m] = dd[order[:m]]
            lengths[i] = m
    return lengths, out_ids, out_d2


def ball_query_all(grid: Grid, r: float, k: int):
    """Capped r-ball neighborhoods of every point, ordered by (distance, index).

    Returns (lengths, ids, d2) where row i occupies ids[i*k : i*k+lengths[i]].
    """
    if _BACKEND == "numba":
        return _nb_ball_query_all(
            grid.points,
            grid.sorted_ids,
            grid.cell_keys,
            grid.cell_offsets,
            grid.origin,
            grid.cell,
            grid.dims,
            float(r),
            int(k),
        )
    return _np_ball_query_all(grid.points, float(r), int(k))


# ---------------------------------------------------------------------------
# CSR matmul: numba Gustavson / numpy scatter-add

def _nb_csr_matmul_impl(n, Ap, Aj, Ax, Bp, Bj, Bx):
    marker = np.full(n, -1, np.int64)
    Cp = np.zeros(n + 1, np.int64)
    for i in range(n):
        cnt = 0
        for ai in range(Ap[i], Ap[i + 1]):
            kk = Aj[ai]
            for bi in range(Bp[kk], Bp[kk + 1]):
                j = Bj[bi]
                if marker[j] != i:
                    marker[j] = i
                    cnt += 1
        Cp[i + 1] = Cp[i] + cnt
    Cj = np.empty(Cp[n], np.int64)
    Cx = np.empty(Cp[n], np.float64)
    scratch = np.zeros(n, np.float64)
    marker[:] = -1
    for i in range(n):
        head = Cp[i]
        cnt = 0
        for ai in range(Ap[i], Ap[i + 1]):
            kk = Aj[ai]
            av = Ax[ai]
            for bi in range(Bp[kk], Bp[kk + 1]):
                j = Bj[bi]
                scratch[j] += av * Bx[bi]
                if marker[j] != i:
                    marker[j] = i
                    Cj[head + cnt] = j
                    cnt += 1
        cols = np.sort(Cj[head : head + cnt])
        for t in range(cnt):
            j = cols[t]
            Cj[head + t] = j
            Cx[head + t] = scratch[j]
            scratch[j] = 0.0
    return Cp, Cj, Cx


def _np_csr_matmul(n, Ap, Aj, Ax, Bp, Bj, Bx):
    scratch = np.zeros(n, np.float64)
    Cp = np.zeros(n + 1, np.int64)
    cols_out, vals_out = [], []
    for i in range(n):
        ks = Aj[Ap[i] : Ap[i + 1]]
        avs = Ax[Ap[i] : Ap[i + 1]]
        if len(ks) == 0:
            Cp[i + 1] = Cp[i]
            continue
        js = [Bj[Bp[kk] : Bp[kk + 1]] for kk in ks]
        vs = [av * Bx[Bp[kk] : Bp[kk + 1]] for kk, av in zip(ks, avs)]
        js = np.concatenate(js)
        vs = np.concatenate(vs)
        np.add.at(scratch, js, vs)  # sequential, same order as the jit twin
        cols = np.unique(js)
        cols_out.append(cols)
        vals_out.append(scratch[cols].copy())
        scratch[cols] = 0.0
        Cp[i + 1] = Cp[i] + len(cols)
    Cj = np.concatenate(cols_out) if cols_out else np.empty(0, np.int64)
    Cx = np.concatenate(vals_out) if vals_out else np.empty(0, np.float64)
    return Cp, Cj, Cx


def csr_matmul(n, Ap, Aj, Ax, Bp, Bj, Bx):
    if _BACKEND == "numba":
        return _nb_csr_matmul(n, Ap, Aj, Ax, Bp, Bj, Bx)
    return _np_csr_matmul(n, Ap, Aj, Ax, Bp, Bj, Bx)


def csr_add(n, Ap, Aj, Ax, Bp, Bj, Bx):
    """Merge two CSR matrices; at most one duplicate pair per slot."""
    rows = np.concatenate(
        [
            np.repeat(np.arange(n, dtype=np.int64), np.diff(Ap)),
            np.repeat(np.arange(n, dtype=np.int64), np.diff(Bp)),
        ]
    )
    cols = np.concatenate([Aj, Bj])
    vals = np.concatenate([Ax, Bx])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows) == 0:
        return np.zeros(n + 1, np.int64), cols, vals
    dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
    first = np.r_[True, ~dup]
    starts = np.nonzero(first)[0]
    out_vals = vals[starts].copy()
    has_pair = np.r_[dup, False][starts]
    out_vals[has_pair] += vals[starts[has_pair] + 1]
    out_rows = rows[starts]
    out_cols = cols[starts]
    Cp = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(out_rows, minlength=n), out=Cp[1:])
    return Cp, out_cols, out_vals


# ---------------------------------------------------------------------------
# farthest point sampling: numba loop / numpy vectorized greedy

def _nb_fps_impl(points, m, seed_idx):
    # chosen points carry a -1 sentinel so duplicates (distance 0) can
    # never re-select an already-chosen index
    n = points.shape[0]
    chosen = np.empty(m, np.int64)
    chosen[0] = seed_idx
    d2 = np.empty(n, np.float64)
    sx = points[seed_idx, 0]
    sy = points[seed_idx, 1]
    sz = points[seed_idx, 2]
    for i in range(n):
        dx = points[i, 0] - sx
        dy = points[i, 1] - sy
        dz = points[i, 2] - sz
        d2[i] = dx * dx + dy * dy + dz * dz
    d2[seed_idx] = -1.0
    for t in range(1, m):
        best = 0
        bestv = d2[0]
        for i in range(1, n):
            if d2[i] > bestv:
                bestv = d2[i]
                best = i
        chosen[t] = best
        bx = points[best, 0]
        by = points[best, 1]
        bz = points[best, 2]
        for i in range(n):
            dx = points[i, 0] - bx
            dy = points[i, 1] - by
            dz = points[i, 2] - bz
            nd = dx * dx + dy * dy + dz * dz
            if nd < d2[i]:
                d2[i] = nd
        d2[best] = -1.0
    return chosen


def _np_fps(points, m, seed_idx):
    n = len(points)
    chosen = np.empty(m, np.int64)
    chosen[0] = seed_idx
    d2 = squared_dists(points, points[seed_idx])
    d2[seed_idx] = -1.0
    for t in range(1, m):
        best = int(np.argmax(d2))  # first max: ties go to the smaller index
        chosen[t] = best
        d2 = np.minimum(d2, squared_dists(points, points[best]))
        d2[best] = -1.0
    return chosen


def fps(points, m, seed_idx):
    points = np.ascontiguousarray(points, dtype=np.float64)
    if _BACKEND == "numba":
        return _nb_fps(points, int(m), int(seed_idx))
    return _np_fps(points, int(m), int(seed_idx))


# ---------------------------------------------------------------------------

_nb_ball_query_all = None
_nb_csr_matmul = None
_nb_fps = None


def _compile_numba():
    global _nb_ball_query_all, _nb_csr_matmul, _nb_fps
    if _nb_ball_query_all is not None:
        return
    _nb_ball_query_all = _njit(cache=True)(_nb_ball_query_all_impl)
    _nb_csr_matmul = _njit(cache=True)(_nb_csr_matmul_impl)
    _nb_fps = _njit(cache=True)(_nb_fps_impl)


if _njit is not None:
    _compile_numba()
