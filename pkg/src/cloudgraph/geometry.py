"""Per-neighborhood covariance frames, eigenvalue shape descriptors, and the
principal-axis cylindrical coordinate transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvariantViolation, PointCloud


@dataclass(frozen=True)
class LocalFrame:
    """Eigen-decomposition of a neighborhood's covariance with a fixed
    orientation convention.

    Eigenvalues are nonnegative and descending; eigenvector columns are
    orthonormal, each oriented so its largest-magnitude component is
    positive. Directions whose eigenvalue falls below ``eps`` are rebuilt
    by deterministic orthogonal completion against the canonical axes;
    ``degenerate_rank`` counts them.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns v1, v2, v3
    centroid: np.ndarray
    degenerate_rank: int
    eps: float

    def __post_init__(self):
        v = self.eigenvectors
        gram = v.T @ v
        if np.abs(gram - np.eye(3)).max() > 1e-9:
            raise InvariantViolation("local frame is not orthonormal within 1e-9")
        lam = self.eigenvalues
        if lam[0] < lam[1] or lam[1] < lam[2] or lam[2] < 0.0:
            raise InvariantViolation("eigenvalues must be descending and nonnegative")


def _orient(v: np.ndarray) -> np.ndarray:
    """Flip sign so the largest-magnitude component is positive (first wins ties)."""
    m = int(np.argmax(np.abs(v)))
    return -v if v[m] < 0 else v


def local_frame(cloud: PointCloud, neighborhood, eps: float = 1e-9) -> LocalFrame:
    """Covariance eigen-frame of the given neighborhood indices.

    The covariance is centered at the neighborhood centroid and divided by
    the member count. A singleton (or otherwise fully degenerate)
    neighborhood yields zero eigenvalues and the canonical identity frame.
    """
    idx = np.asarray(neighborhood, dtype=np.int64)
    if len(idx) == 0:
        raise ValueError("neighborhood must be nonempty")
    pts = cloud.points[idx]
    centroid = pts.mean(axis=0)
    q = pts - centroid
    cov = (q.T @ q) / len(idx)
    lam, vec = np.linalg.eigh(cov)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()
    lam[lam < 0.0] = 0.0
    n_degenerate = int((lam < eps).sum())
    keep = 3 - n_degenerate
    frame = np.empty((3, 3))
    frame[:, :keep] = vec[:, :keep]
    for a in range(keep, 3):
        best_axis, best_norm = 0, -1.0
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = 1.0
            res = e - frame[:, :a] @ (frame[:, :a].T @ e)
            nrm = float(np.linalg.norm(res))
            if nrm > best_norm + 1e-12:
                best_norm, best_axis = nrm, axis
        e = np.zeros(3)
        e[best_axis] = 1.0
        res = e - frame[:, :a] @ (frame[:, :a].T @ e)
        frame[:, a] = res / np.linalg.norm(res)
    for a in range(3):
        frame[:, a] = _orient(frame[:, a])
    out = LocalFrame(
        eigenvalues=lam,
        eigenvectors=frame,
        centroid=centroid,
        degenerate_rank=n_degenerate,
        eps=eps,
    )
    residual = np.abs(cov @ frame - frame * lam[None, :]).max()
    bound = 1e-7 * max(lam[0], eps)
    if residual > bound:
        raise InvariantViolation(
            f"eigen residual {residual:.3e} exceeds {bound:.3e}"
        )
    return out


@dataclass(frozen=True)
class ShapeDescriptors:
    linearity: float
    planarity: float
    sphericity: float
    eigenvalues: np.ndarray


def shape_descriptors(frame: LocalFrame) -> ShapeDescriptors:
    """Classical eigenvalue shape descriptors; all zero when the largest
    eigenvalue is below the frame's tolerance. The three sum to one otherwise."""
    l1, l2, l3 = frame.eigenvalues
    if l1 <= frame.eps:
        return ShapeDescriptors(0.0, 0.0, 0.0, frame.eigenvalues)
    return ShapeDescriptors(
        linearity=(l1 - l2) / l1,
        planarity=(l2 - l3) / l1,
        sphericity=l3 / l1,
        eigenvalues=frame.eigenvalues,
    )


@dataclass(frozen=True)
class CylindricalCoords:
    """Principal-axis cylindrical coordinates of each neighbor, aligned with
    the neighborhood order. Raw axial/radial values are kept for testing;
    normalized values divide by the neighborhood maxima (zero if the maximum
    is below tolerance)."""

    h_norm: np.ndarray
    w_norm: np.ndarray
    cos_theta: np.ndarray
    h: np.ndarray
    w: np.ndarray


def cylindrical_transform(
    cloud: PointCloud,
    i: int,
    neighborhood,
    frame: LocalFrame,
    eps: float = 1e-9,
) -> CylindricalCoords:
    """Project neighbor displacements onto the local frame's principal axes.

    Axial coordinate along the first eigenvector, radial distance in the
    (second, third) eigenvector plane, and the cosine of the in-plane angle
    (defined as 1 for neighbors on the axis, including the query point
    itself). Axial values normalize by the maximum absolute value, radial by
    the maximum.
    """
    idx = np.asarray(neighborhood, dtype=np.int64)
    centroid = cloud.points[idx].mean(axis=0)
    scale = 1.0 + float(np.abs(frame.centroid).max())
    if np.abs(centroid - frame.centroid).max() > 1e-9 * scale:
        raise ValueError("frame was computed from a different neighborhood")
    dp = cloud.points[idx] - cloud.points[i]
    v1, v2, v3 = frame.eigenvectors.T
    xp = dp @ v2
    yp = dp @ v3
    zp = dp @ v1
    h = zp
    w = np.sqrt(xp * xp + yp * yp)
    cos_theta = np.ones_like(w)
    big = w >= eps
    cos_theta[big] = xp[big] / w[big]
    hmax = np.abs(h).max()
    wmax = w.max()
    h_norm = h / hmax if hmax >= eps else np.zeros_like(h)
    w_norm = w / wmax if wmax >= eps else np.zeros_like(w)
    return CylindricalCoords(h_norm=h_norm, w_norm=w_norm, cos_theta=cos_theta, h=h, w=w)


def frames_for_neighbors(cloud, neighbors, eps: float = 1e-9):
    """Local frame of every point's neighborhood (pipeline convenience)."""
    return [local_frame(cloud, neighbors[i], eps) for i in range(len(neighbors))]


def cylindrical_for_neighbors(cloud, neighbors, frames, eps: float = 1e-9):
    """Cylindrical coordinates of every point's neighborhood, frame-aligned."""
    return [
        cylindrical_transform(cloud, i, neighbors[i], frames[i], eps)
        for i in range(len(neighbors))
    ]
