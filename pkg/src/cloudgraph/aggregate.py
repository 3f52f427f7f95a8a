"""Neighborhood feature aggregation with fixed affine maps, pluggable
activation, and permutation-invariant pooling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NeighborList, PointCloud


def _relu(z):
    return np.maximum(z, 0.0)


def _identity(z):
    return z


ACTIVATIONS = {"relu": _relu, "identity": _identity, "tanh": np.tanh}

POOLS = ("max", "sum", "mean")


@dataclass(frozen=True)
class AggregationSpec:
    """Fixed weights and reducers for the aggregation operators.

    ``mode`` declares the per-neighbor input layout: "baseline" expects
    feature width + 3 relative-position channels, "enhanced" expects three
    additional cylindrical channels plus an eigenvalue branch mapped by
    ``weight_phi``. Weights are plain affine stand-ins for the learned maps.
    """

    mode: str
    weight_psi: np.ndarray
    bias: np.ndarray | None = None
    weight_phi: np.ndarray | None = None
    bias_phi: np.ndarray | None = None
    activation: str = "relu"
    pool: str = "max"

    def __post_init__(self):
        if self.mode not in ("baseline", "enhanced"):
            raise ValueError(f"unknown mode {self.mode!r}")
        w = np.asarray(self.weight_psi, dtype=np.float64)
        if w.ndim != 2 or not np.isfinite(w).all():
            raise ValueError("weight_psi must be a finite 2-D matrix")
        extra = 3 if self.mode == "baseline" else 6
        if w.shape[0] < extra + 1:
            raise ValueError(
                f"weight_psi input width {w.shape[0]} too small for {self.mode} mode"
            )
        object.__setattr__(self, "weight_psi", w)
        if self.bias is not None:
            b = np.asarray(self.bias, dtype=np.float64)
            if b.shape != (w.shape[1],) or not np.isfinite(b).all():
                raise ValueError("bias must be a finite vector of the output width")
            object.__setattr__(self, "bias", b)
        if self.mode == "enhanced":
            if self.weight_phi is None:
                raise ValueError("enhanced mode requires weight_phi")
            wp = np.asarray(self.weight_phi, dtype=np.float64)
            if wp.ndim != 2 or wp.shape[0] != 3 or not np.isfinite(wp).all():
                raise ValueError("weight_phi must be a finite 3 x eta_phi matrix")
            object.__setattr__(self, "weight_phi", wp)
            if self.bias_phi is not None:
                bp = np.asarray(self.bias_phi, dtype=np.float64)
                if bp.shape != (wp.shape[1],) or not np.isfinite(bp).all():
                    raise ValueError("bias_phi must match weight_phi's output width")
                object.__setattr__(self, "bias_phi", bp)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.pool not in POOLS:
            raise ValueError(f"unknown pool {self.pool!r}")

    @property
    def feature_width_in(self) -> int:
        extra = 3 if self.mode == "baseline" else 6
        return self.weight_psi.shape[0] - extra

    @property
    def width_out(self) -> int:
        return self.weight_psi.shape[1]


def _pool_segments(z: np.ndarray, starts: np.ndarray, lengths: np.ndarray, pool: str):
    if pool == "max":
        return np.maximum.reduceat(z, starts, axis=0)
    # order-canonical reduction: sort each segment column-wise before summing
    out = np.empty((len(starts), z.shape[1]))
    for t, (s, ln) in enumerate(zip(starts, lengths)):
        seg = np.sort(z[s : s + ln], axis=0)
        out[t] = seg.sum(axis=0)
        if pool == "mean":
            out[t] /= ln
    return out


def _flatten(neighbors: NeighborList):
    lengths = np.array([len(l) for l in neighbors.lists], dtype=np.int64)
    starts = np.zeros(len(lengths), dtype=np.int64)
    np.cumsum(lengths[:-1], out=starts[1:])
    flat = np.concatenate(neighbors.lists)
    rows = np.repeat(np.arange(neighbors.n, dtype=np.int64), lengths)
    return rows, flat, starts, lengths


def _check_features(cloud: PointCloud, spec: AggregationSpec):
    if cloud.features is None:
        raise ValueError("aggregation requires per-point features on the cloud")
    if cloud.feature_width != spec.feature_width_in:
        raise ValueError(
            f"feature width {cloud.feature_width} does not match "
            f"spec input width {spec.feature_width_in}"
        )


def aggregate_baseline(
    cloud: PointCloud, neighbors: NeighborList, spec: AggregationSpec
) -> np.ndarray:
    """Pool activated affine maps of [neighbor features || relative position]
    over each neighborhood."""
    if spec.mode != "baseline":
        raise ValueError("spec is not in baseline mode")
    _check_features(cloud, spec)
    rows, flat, starts, lengths = _flatten(neighbors)
    inputs = np.hstack(
        [cloud.features[flat], cloud.points[rows] - cloud.points[flat]]
    )
    z = inputs @ spec.weight_psi
    if spec.bias is not None:
        z = z + spec.bias
    z = ACTIVATIONS[spec.activation](z)
    return _pool_segments(z, starts, lengths, spec.pool)


def aggregate_enhanced(
    cloud: PointCloud,
    neighbors: NeighborList,
    frames,
    cyl,
    spec: AggregationSpec,
) -> np.ndarray:
    """Pool activated affine maps of [neighbor features || relative position ||
    cylindrical triple], concatenated with the eigenvalue branch."""
    if spec.mode != "enhanced":
        raise ValueError("spec is not in enhanced mode")
    _check_features(cloud, spec)
    if len(frames) != neighbors.n or len(cyl) != neighbors.n:
        raise ValueError("frames/cylindrical coordinates misaligned with neighbors")
    for i in range(neighbors.n):
        if len(cyl[i].h) != len(neighbors[i]):
            raise ValueError(
                f"cylindrical coordinates of point {i} do not cover its neighborhood"
            )
    rows, flat, starts, lengths = _flatten(neighbors)
    tri = np.concatenate(
        [np.c_[c.h_norm, c.w_norm, c.cos_theta] for c in cyl], axis=0
    )
    inputs = np.hstack(
        [cloud.features[flat], cloud.points[rows] - cloud.points[flat], tri]
    )
    z = inputs @ spec.weight_psi
    if spec.bias is not None:
        z = z + spec.bias
    z = ACTIVATIONS[spec.activation](z)
    pooled = _pool_segments(z, starts, lengths, spec.pool)
    lam = np.stack([f.eigenvalues for f in frames])
    shape_branch = lam @ spec.weight_phi
    if spec.bias_phi is not None:
        shape_branch = shape_branch + spec.bias_phi
    return np.hstack([pooled, shape_branch])
