"""Deterministic synthetic clouds for desk-scale verification.

The labeled fixtures (crossing planes, airplane-like assembly) are what the
junction/boundary diagnostics run against: labels identify the part each
point was sampled from, and ``junction_distance`` gives the exact distance
to the part-intersection locus. Blue-noise spacing comes from oversampling
and farthest-point downsampling, mirroring how scan pipelines resample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .construct import farthest_point_sample
from .core import PointCloud

FIXTURE_NAMES = ("plane", "sphere", "cylinder", "two-planes-cross", "airplane-like")

_OVERSAMPLE = 4

# airplane-like assembly dimensions
_FUS_R = 0.168
_FUS_X = 1.68
_WING = {"x": (-0.168, 0.602), "y": (-1.68, 1.68)}
_TAIL = {"x": (1.288, 1.68), "y": (-0.63, 0.63)}
_FIN = {"x": (1.372, 1.68), "z": (0.168, 0.588)}

_CROSS_HALF = 0.55


@dataclass(frozen=True)
class Fixture:
    name: str
    cloud: PointCloud
    labels: np.ndarray | None = None
    junction_distance: np.ndarray | None = None


def make_fixture(name: str, n: int, seed: int = 0) -> Fixture:
    """Deterministic fixture cloud; labeled variants carry part labels and
    exact distances to the part junction."""
    if n < 8:
        raise ValueError("fixtures need n >= 8")
    rng = np.random.default_rng(seed)
    if name == "plane":
        pts = np.c_[rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), np.zeros(n)]
        return Fixture(name, PointCloud(pts))
    if name == "sphere":
        g = rng.normal(size=(n, 3))
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
        return Fixture(name, PointCloud(pts))
    if name == "cylinder":
        theta = rng.uniform(0, 2 * np.pi, n)
        pts = np.c_[0.5 * np.cos(theta), 0.5 * np.sin(theta), rng.uniform(-1, 1, n)]
        return Fixture(name, PointCloud(pts))
    if name == "two-planes-cross":
        return _two_planes_cross(n, rng)
    if name == "airplane-like":
        return _airplane_like(n, rng)
    raise ValueError(f"unknown fixture {name!r} (choose from {FIXTURE_NAMES})")


def _fps_select(points: np.ndarray, labels: np.ndarray, n: int):
    idx = farthest_point_sample(PointCloud(points), n, seed_index=0)
    return points[idx], labels[idx]


def _two_planes_cross(n: int, rng) -> Fixture:
    h = _CROSS_HALF
    m = _OVERSAMPLE * n
    half = m // 2
    a = np.c_[rng.uniform(-h, h, half), rng.uniform(-h, h, half), np.zeros(half)]
    b = np.c_[np.zeros(m - half), rng.uniform(-h, h, m - half), rng.uniform(-h, h, m - half)]
    pts = np.vstack([a, b])
    lab = np.r_[np.zeros(half, np.int64), np.ones(m - half, np.int64)]
    pts, lab = _fps_select(pts, lab, n)
    jd = np.sqrt(pts[:, 0] ** 2 + pts[:, 2] ** 2)  # distance to the y-axis seam
    return Fixture("two-planes-cross", PointCloud(pts), labels=lab, junction_distance=jd)


def _airplane_like(n: int, rng) -> Fixture:
    m = _OVERSAMPLE * n
    wing_w = _WING["x"][1] - _WING["x"][0]
    tail_w = _TAIL["x"][1] - _TAIL["x"][0]
    fin_w = _FIN["x"][1] - _FIN["x"][0]
    areas = np.array(
        [
            2 * np.pi * _FUS_R * 2 * _FUS_X,
            wing_w * (_WING["y"][1] - _WING["y"][0]),
            tail_w * (_TAIL["y"][1] - _TAIL["y"][0]),
            fin_w * (_FIN["z"][1] - _FIN["z"][0]),
        ]
    )
    counts = np.maximum(1, np.round(m * areas / areas.sum()).astype(int))
    counts[0] += m - counts.sum()
    parts, labels = [], []
    c = counts[0]
    x = rng.uniform(-_FUS_X, _FUS_X, c)
    th = rng.uniform(0, 2 * np.pi, c)
    parts.append(np.c_[x, _FUS_R * np.cos(th), _FUS_R * np.sin(th)])
    labels.append(np.full(c, 0, np.int64))
    c = counts[1]
    parts.append(
        np.c_[rng.uniform(*_WING["x"], c), rng.uniform(*_WING["y"], c), np.zeros(c)]
    )
    labels.append(np.full(c, 1, np.int64))
    c = counts[2]
    parts.append(
        np.c_[rng.uniform(*_TAIL["x"], c), rng.uniform(*_TAIL["y"], c), np.zeros(c)]
    )
    labels.append(np.full(c, 2, np.int64))
    c = counts[3]
    parts.append(
        np.c_[rng.uniform(*_FIN["x"], c), np.zeros(c), rng.uniform(*_FIN["z"], c)]
    )
    labels.append(np.full(c, 3, np.int64))
    pts, lab = _fps_select(np.vstack(parts), np.concatenate(labels), n)
    jd = _root_line_distance(pts)
    return Fixture("airplane-like", PointCloud(pts), labels=lab, junction_distance=jd)


def _root_line_distance(pts: np.ndarray) -> np.ndarray:
    """Distance to the part-root seams where wings/tail/fin meet the fuselage."""
    segments = [
        ((_WING["x"][0], _FUS_R, 0.0), (_WING["x"][1], _FUS_R, 0.0)),
        ((_WING["x"][0], -_FUS_R, 0.0), (_WING["x"][1], -_FUS_R, 0.0)),
        ((_TAIL["x"][0], _FUS_R, 0.0), (_TAIL["x"][1], _FUS_R, 0.0)),
        ((_TAIL["x"][0], -_FUS_R, 0.0), (_TAIL["x"][1], -_FUS_R, 0.0)),
        ((_FIN["x"][0], 0.0, _FUS_R), (_FIN["x"][1], 0.0, _FUS_R)),
    ]
    best = np.full(len(pts), np.inf)
    for a, b in segments:
        a = np.asarray(a)
        b = np.asarray(b)
        ab = b - a
        t = np.clip((pts - a) @ ab / (ab @ ab), 0.0, 1.0)
        proj = a + t[:, None] * ab
        best = np.minimum(best, np.linalg.norm(pts - proj, axis=1))
    return best


def cross_label_fractions(neighbors, labels: np.ndarray) -> np.ndarray:
    """Per point: fraction of non-self neighbors whose label differs."""
    out = np.zeros(len(neighbors))
    for i in range(len(neighbors)):
        others = neighbors[i][neighbors[i] != i]
        if len(others):
            out[i] = float(np.mean(labels[others] != labels[i]))
    return out
