"""Acceptance gate: every criterion prints its own pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from cloudgraph import (
    AggregationSpec,
    NeighborList,
    PointCloud,
    SmoothingConfig,
    aggregate_baseline,
    aggregate_enhanced,
    ball_query_all,
    build_adjacency,
    build_index,
    cross_label_fractions,
    cylindrical_transform,
    dense_of,
    exact_von_neumann,
    local_frame,
    path_sum,
    reselect_neighborhoods,
    smooth,
    symmetric_normalize,
    symmetric_refine,
)
from cloudgraph.pipeline import PipelineConfig, run_pipeline

import oracles

DEFAULTS = SmoothingConfig(radius=0.15, k=32, alpha=0.5, t_order=3)


def verdict(num: int, ok: bool, desc: str) -> None:
    print(f"\nACCEPTANCE {num:02d}: {'PASS' if ok else 'FAIL'} - {desc}", flush=True)
    assert ok, f"acceptance criterion {num} failed: {desc}"


def test_criterion_01_ball_query_oracle_equivalence():
    rng = np.random.default_rng(1)
    ok = True
    for _ in range(50):
        n = int(rng.integers(10, 1001))
        pts = oracles.random_cloud(rng, n, spread=float(rng.uniform(0.3, 1.0)))
        r = float(rng.uniform(0.05, 0.7))
        k = int(rng.integers(1, 64))
        cloud = PointCloud(pts)
        cfg = SmoothingConfig(radius=r, k=k)
        got = ball_query_all(build_index(cloud), cfg)
        for i in range(n):
            want = oracles.brute_ball_query(pts, i, r, k)
            if got[i].tolist() != want.tolist():
                ok = False
                break
        if not ok:
            break
    verdict(1, ok, "50 random clouds: neighborhoods equal exhaustive evaluation")


def test_criterion_02_refine_normalize_oracle():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 257))
        adj = oracles.random_directed_binary(
            rng, n, float(rng.uniform(0.05, 0.5)), self_loops=bool(rng.integers(2))
        )
        refined = symmetric_refine(adj)
        err1 = np.abs(
            dense_of(refined) - oracles.dense_floor_refine(dense_of(adj))
        ).max()
        normed = symmetric_normalize(refined)
        err2 = np.abs(
            dense_of(normed) - oracles.dense_sym_normalize(dense_of(refined))
        ).max()
        worst = max(worst, err1, err2)
    verdict(2, worst <= 1e-12, f"refine/normalize vs dense oracles, worst err {worst:.2e}")


def test_criterion_03_smoothing_power_sum_and_kernel_bound():
    rng = np.random.default_rng(3)
    worst_oracle = 0.0
    bound_ok = True
    for _ in range(5):
        n = int(rng.integers(8, 257))
        normed = symmetric_normalize(
            symmetric_refine(
                oracles.random_directed_binary(rng, n, 0.15, self_loops=True)
            )
        )
        dense = dense_of(normed)
        for alpha in (0.3, 0.5, 0.7):
            kernel = exact_von_neumann(normed, alpha)
            for t in range(1, 7):
                cfg = SmoothingConfig(radius=1.0, k=4, alpha=alpha, t_order=t)
                s = dense_of(smooth(normed, cfg).s_matrix)
                worst_oracle = max(
                    worst_oracle,
                    float(np.abs(s - oracles.dense_power_sum(dense, alpha, t)).max()),
                )
                err = float(np.abs(s - kernel).sum(axis=1).max())
                if err > alpha ** (t + 1) * n / (1.0 - alpha):
                    bound_ok = False
    ok = worst_oracle <= 1e-10 and bound_ok
    verdict(
        3, ok,
        f"S_T vs power-sum oracle (worst {worst_oracle:.2e}) and geometric tail bound",
    )


def test_criterion_04_path_sum_cross_check():
    rng = np.random.default_rng(4)
    worst = 0.0
    for n, t_range in ((8, range(0, 5)), (14, range(0, 5)), (20, range(0, 5))):
        normed = symmetric_normalize(
            symmetric_refine(oracles.random_directed_binary(rng, n, 0.3, self_loops=True))
        )
        dense = dense_of(normed)
        for t in t_range:
            power = np.linalg.matrix_power(dense, t)
            for i in range(n):
                for j in range(n):
                    worst = max(worst, abs(path_sum(normed, i, j, t) - power[i, j]))
    verdict(4, worst <= 1e-10, f"walk enumeration vs matrix powers, worst err {worst:.2e}")


def test_criterion_05_kernel_diagonal_dominance():
    rng = np.random.default_rng(5)
    ok = True
    alphas = (0.3, 0.5, 0.7)
    for trial in range(50):
        n = int(rng.integers(2, 200))
        normed = symmetric_normalize(
            symmetric_refine(
                oracles.random_directed_binary(
                    rng, n, float(rng.uniform(0.05, 0.5)), self_loops=True
                )
            )
        )
        alpha = alphas[trial % 3]
        kernel = exact_von_neumann(normed, alpha)  # raises if dominance breaks
        off = kernel - np.diag(np.diag(kernel))
        if not np.all(off.max(axis=1) <= np.diag(kernel) + 1e-12):
            ok = False
        s = dense_of(
            smooth(normed, SmoothingConfig(radius=1.0, k=4, alpha=alpha, t_order=3)).s_matrix
        )
        s_off = s - np.diag(np.diag(s))
        if not np.all(s_off.max(axis=1) <= np.diag(s) + 1e-12):
            ok = False
    verdict(5, ok, "kernel and finite-sum diagonal dominance on 50 random graphs")


def test_criterion_06_degree_equalization(airplane):
    cloud = airplane.cloud
    raw = ball_query_all(build_index(cloud), DEFAULTS)
    out_deg = np.array([len(l) for l in raw.lists])
    sg = smooth(
        symmetric_normalize(symmetric_refine(build_adjacency(cloud, DEFAULTS))),
        DEFAULTS,
    )
    refined = reselect_neighborhoods(sg, cloud, DEFAULTS.k_out)
    in_counts = refined.in_selection_counts()
    sd_before = out_deg.std()
    sd_after = in_counts.std()
    extreme_before = int(((out_deg < 20) | (out_deg > 35)).sum())
    extreme_after = int(((in_counts < 20) | (in_counts > 35)).sum())
    ok = sd_after < sd_before and extreme_after < extreme_before
    verdict(
        6, ok,
        f"degree equalization: stddev {sd_before:.2f}->{sd_after:.2f}, "
        f"extremes {extreme_before}->{extreme_after}",
    )


def test_criterion_07_junction_decontamination(two_planes):
    cloud = two_planes.cloud
    raw = ball_query_all(build_index(cloud), DEFAULTS)
    sg = smooth(
        symmetric_normalize(symmetric_refine(build_adjacency(cloud, DEFAULTS))),
        DEFAULTS,
    )
    refined = reselect_neighborhoods(sg, cloud, DEFAULTS.k_out)
    band = two_planes.junction_distance <= DEFAULTS.radius
    raw_frac = float(cross_label_fractions(raw, two_planes.labels)[band].mean())
    new_frac = float(cross_label_fractions(refined, two_planes.labels)[band].mean())
    reduction = (raw_frac - new_frac) / raw_frac
    ok = new_frac <= raw_frac and reduction >= 0.10
    verdict(
        7, ok,
        f"junction contamination {raw_frac:.4f}->{new_frac:.4f} "
        f"({100 * reduction:.1f}% relative reduction)",
    )


def test_criterion_08_local_frame_correctness():
    rng = np.random.default_rng(8)
    ok = True
    for _ in range(200):
        m = int(rng.integers(2, 48))
        pts = rng.standard_normal((m, 3)) * float(rng.uniform(0.05, 3.0))
        cloud = PointCloud(pts)
        frame = local_frame(cloud, np.arange(m))
        q = pts - pts.mean(axis=0)
        cov = q.T @ q / m
        residual = np.abs(
            cov @ frame.eigenvectors - frame.eigenvectors * frame.eigenvalues
        ).max()
        if residual > 1e-7 * max(frame.eigenvalues[0], frame.eps):
            ok = False
        gram = frame.eigenvectors.T @ frame.eigenvectors
        if np.abs(gram - np.eye(3)).max() > 1e-9:
            ok = False
        if np.abs(frame.eigenvalues - oracles.eig3_symmetric(cov)).max() > 1e-8:
            ok = False
    # analytically forced degenerate frames
    planar = PointCloud(
        np.c_[rng.uniform(-1, 1, 40), rng.uniform(-1, 1, 40), np.zeros(40)]
    )
    f = local_frame(planar, np.arange(40))
    if not (f.eigenvalues[2] == 0.0 and np.allclose(f.eigenvectors[:, 2], [0, 0, 1])):
        ok = False
    linear = PointCloud(np.c_[np.linspace(0, 1, 25), np.zeros(25), np.zeros(25)])
    f = local_frame(linear, np.arange(25))
    if not (
        f.degenerate_rank == 2
        and np.allclose(f.eigenvectors, np.eye(3))
    ):
        ok = False
    verdict(8, ok, "eigen residuals, orthonormality, cubic-root oracle, forced frames")


def test_criterion_09_cylindrical_identity():
    rng = np.random.default_rng(9)
    ok = True
    for _ in range(200):
        m = int(rng.integers(2, 32))
        pts = rng.standard_normal((m, 3)) * float(rng.uniform(0.1, 2.0))
        cloud = PointCloud(pts)
        nb = np.arange(m)
        i = int(rng.integers(m))
        frame = local_frame(cloud, nb)
        cyl = cylindrical_transform(cloud, i, nb, frame)
        dp = pts - pts[i]
        if np.abs(cyl.h**2 + cyl.w**2 - (dp * dp).sum(axis=1)).max() > 1e-9:
            ok = False
        if np.abs(cyl.h).max() >= frame.eps and abs(np.abs(cyl.h_norm).max() - 1.0) > 1e-12:
            ok = False
        if cyl.w.max() >= frame.eps and abs(cyl.w_norm.max() - 1.0) > 1e-12:
            ok = False
        shift = rng.uniform(-5, 5, 3)
        moved = PointCloud(pts + shift)
        f2 = local_frame(moved, nb)
        c2 = cylindrical_transform(moved, i, nb, f2)
        for field in ("h", "w", "cos_theta", "h_norm", "w_norm"):
            if np.abs(getattr(cyl, field) - getattr(c2, field)).max() > 1e-9:
                ok = False
        s = float(rng.uniform(0.5, 4.0))
        scaled = PointCloud(pts * s)
        f3 = local_frame(scaled, nb)
        c3 = cylindrical_transform(scaled, i, nb, f3)
        for field in ("h_norm", "w_norm", "cos_theta"):
            if np.abs(getattr(cyl, field) - getattr(c3, field)).max() > 1e-9:
                ok = False
    verdict(9, ok, "energy identity, unit maxima, translation/scale invariance")


def test_criterion_10_aggregation_contracts():
    rng = np.random.default_rng(10)
    ok = True
    for _ in range(50):
        n = int(rng.integers(4, 65))
        eta = int(rng.integers(1, 6))
        pts = oracles.random_cloud(rng, n, spread=0.5)
        feats = rng.standard_normal((n, eta))
        cloud = PointCloud(pts, feats)
        cfg = SmoothingConfig(radius=0.6, k=int(rng.integers(2, 10)))
        neighbors = ball_query_all(build_index(cloud), cfg)
        wb = rng.standard_normal((eta + 3, 4))
        bb = rng.standard_normal(4)
        spec_b = AggregationSpec(mode="baseline", weight_psi=wb, bias=bb)
        got = aggregate_baseline(cloud, neighbors, spec_b)
        want = oracles.naive_baseline(
            cloud, neighbors.lists, wb, bb, oracles.relu, oracles.max_pool
        )
        if np.abs(got - want).max() > 1e-10:
            ok = False
        frames = [local_frame(cloud, neighbors[i]) for i in range(n)]
        cyl = [
            cylindrical_transform(cloud, i, neighbors[i], frames[i]) for i in range(n)
        ]
        we = rng.standard_normal((eta + 6, 4))
        wphi = rng.standard_normal((3, 2))
        spec_e = AggregationSpec(mode="enhanced", weight_psi=we, weight_phi=wphi)
        got_e = aggregate_enhanced(cloud, neighbors, frames, cyl, spec_e)
        tri = [np.c_[c.h_norm, c.w_norm, c.cos_theta] for c in cyl]
        lam = [f.eigenvalues for f in frames]
        want_e = oracles.naive_enhanced(
            cloud, neighbors.lists, tri, lam, we, None, wphi, None,
            oracles.relu, oracles.max_pool,
        )
        if np.abs(got_e - want_e).max() > 1e-10:
            ok = False
        # permutation invariance, bitwise
        perms = [rng.permutation(len(l)) for l in neighbors.lists]
        shuffled = NeighborList(
            tuple(l[p] for l, p in zip(neighbors.lists, perms)),
            max_size=neighbors.max_size,
        )
        if not np.array_equal(aggregate_baseline(cloud, shuffled, spec_b), got):
            ok = False
        # neighbor locality
        i = int(rng.integers(n))
        outsiders = np.setdiff1d(np.arange(n), np.r_[neighbors[i], i])
        if len(outsiders):
            feats2 = feats.copy()
            feats2[outsiders] += 50.0
            out2 = aggregate_baseline(PointCloud(pts, feats2), neighbors, spec_b)
            if not np.array_equal(out2[i], got[i]):
                ok = False
    verdict(10, ok, "oracle agreement, bitwise permutation invariance, locality")


def test_criterion_11_end_to_end_determinism(tmp_path):
    cfg = PipelineConfig(
        out_dir=str(tmp_path / "run"),
        smoothing=DEFAULTS,
        fixture="airplane-like",
        n=512,
        seed=7,
    )
    assert run_pipeline(cfg) == 0
    out = Path(cfg.out_dir)
    import hashlib

    first = {
        f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in out.iterdir()
    }
    assert run_pipeline(cfg) == 0
    second = {
        f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in out.iterdir()
    }
    ok = first == second and "manifest.json" in first
    verdict(11, ok, "identical manifest and artifact hashes across reruns")
