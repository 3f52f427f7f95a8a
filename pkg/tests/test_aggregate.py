import numpy as np
import pytest

from cloudgraph import (
    AggregationSpec,
    NeighborList,
    PointCloud,
    aggregate_baseline,
    aggregate_enhanced,
    ball_query_all,
    build_index,
    cylindrical_transform,
    local_frame,
    SmoothingConfig,
)

import oracles


def make_instance(rng, n=40, eta=4, k=8):
    pts = oracles.random_cloud(rng, n, spread=0.5)
    feats = rng.standard_normal((n, eta))
    cloud = PointCloud(pts, feats)
    cfg = SmoothingConfig(radius=0.6, k=k)
    neighbors = ball_query_all(build_index(cloud), cfg)
    return cloud, neighbors


def geometry_inputs(cloud, neighbors):
    frames = [local_frame(cloud, neighbors[i]) for i in range(neighbors.n)]
    cyl = [
        cylindrical_transform(cloud, i, neighbors[i], frames[i])
        for i in range(neighbors.n)
    ]
    return frames, cyl


def self_only(n):
    return NeighborList(tuple(np.array([i]) for i in range(n)), max_size=1)


class TestBaseline:
    def test_self_only_with_position_selector_is_zero(self, rng):
        n, eta = 12, 2
        cloud = PointCloud(rng.standard_normal((n, 3)), rng.standard_normal((n, eta)))
        w = np.zeros((eta + 3, 3))
        w[eta:, :] = np.eye(3)  # pass through the relative-position channels
        spec = AggregationSpec(mode="baseline", weight_psi=w)
        out = aggregate_baseline(cloud, self_only(n), spec)
        assert np.array_equal(out, np.zeros((n, 3)))

    def test_feature_projection_with_max_pool(self, rng):
        n, eta = 15, 3
        cloud, neighbors = make_instance(rng, n=n, eta=eta)
        w = np.zeros((eta + 3, eta))
        w[:eta, :] = np.eye(eta)  # pass through the neighbor features
        spec = AggregationSpec(mode="baseline", weight_psi=w)
        out = aggregate_baseline(cloud, neighbors, spec)
        for i in range(n):
            want = np.maximum(cloud.features[neighbors[i]], 0.0).max(axis=0)
            assert np.array_equal(out[i], want)

    def test_matches_naive_double_loop(self, rng):
        cloud, neighbors = make_instance(rng, n=40, eta=4)
        w = rng.standard_normal((7, 5))
        b = rng.standard_normal(5)
        spec = AggregationSpec(mode="baseline", weight_psi=w, bias=b)
        got = aggregate_baseline(cloud, neighbors, spec)
        want = oracles.naive_baseline(
            cloud, neighbors.lists, w, b, oracles.relu, oracles.max_pool
        )
        assert np.abs(got - want).max() <= 1e-10

    def test_output_width(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        spec = AggregationSpec(mode="baseline", weight_psi=rng.standard_normal((5, 7)))
        assert aggregate_baseline(cloud, neighbors, spec).shape == (10, 7)

    def test_feature_width_mismatch_rejected(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        spec = AggregationSpec(mode="baseline", weight_psi=rng.standard_normal((9, 4)))
        with pytest.raises(ValueError, match="width"):
            aggregate_baseline(cloud, neighbors, spec)

    def test_featureless_cloud_rejected(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        bare = PointCloud(cloud.points)
        spec = AggregationSpec(mode="baseline", weight_psi=rng.standard_normal((5, 4)))
        with pytest.raises(ValueError, match="features"):
            aggregate_baseline(bare, neighbors, spec)

    def test_permutation_invariance_bitwise(self, rng):
        cloud, neighbors = make_instance(rng, n=30, eta=3)
        spec = AggregationSpec(
            mode="baseline", weight_psi=rng.standard_normal((6, 5)),
            bias=rng.standard_normal(5),
        )
        base = aggregate_baseline(cloud, neighbors, spec)
        for _ in range(5):
            shuffled = NeighborList(
                tuple(rng.permutation(l) for l in neighbors.lists),
                max_size=neighbors.max_size,
            )
            assert np.array_equal(aggregate_baseline(cloud, shuffled, spec), base)

    def test_sum_and_mean_pools_are_order_canonical(self, rng):
        cloud, neighbors = make_instance(rng, n=20, eta=3)
        for pool in ("sum", "mean"):
            spec = AggregationSpec(
                mode="baseline", weight_psi=rng.standard_normal((6, 4)), pool=pool
            )
            base = aggregate_baseline(cloud, neighbors, spec)
            shuffled = NeighborList(
                tuple(rng.permutation(l) for l in neighbors.lists),
                max_size=neighbors.max_size,
            )
            assert np.array_equal(aggregate_baseline(cloud, shuffled, spec), base)

    def test_neighbor_locality(self, rng):
        cloud, neighbors = make_instance(rng, n=25, eta=3)
        spec = AggregationSpec(mode="baseline", weight_psi=rng.standard_normal((6, 4)))
        base = aggregate_baseline(cloud, neighbors, spec)
        i = 7
        outsiders = np.setdiff1d(np.arange(25), np.r_[neighbors[i], i])
        feats = cloud.features.copy()
        feats[outsiders] += 100.0
        out = aggregate_baseline(PointCloud(cloud.points, feats), neighbors, spec)
        assert np.array_equal(out[i], base[i])


class TestEnhanced:
    def test_zeroed_psi_isolates_shape_branch(self, rng):
        cloud, neighbors = make_instance(rng, n=12, eta=2)
        frames, cyl = geometry_inputs(cloud, neighbors)
        spec = AggregationSpec(
            mode="enhanced",
            weight_psi=np.zeros((8, 4)),
            weight_phi=np.eye(3),
        )
        out = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        lam = np.stack([f.eigenvalues for f in frames])
        assert np.array_equal(out[:, :4], np.zeros((12, 4)))
        assert np.array_equal(out[:, 4:], lam)

    def test_self_only_closed_form(self, rng):
        n, eta = 10, 3
        cloud = PointCloud(rng.standard_normal((n, 3)), rng.standard_normal((n, eta)))
        neighbors = self_only(n)
        frames, cyl = geometry_inputs(cloud, neighbors)
        w = rng.standard_normal((eta + 6, 5))
        wphi = rng.standard_normal((3, 2))
        spec = AggregationSpec(mode="enhanced", weight_psi=w, weight_phi=wphi)
        out = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        for i in range(n):
            inp = np.concatenate([cloud.features[i], np.zeros(3), [0.0, 0.0, 1.0]])
            want = np.concatenate(
                [np.maximum(inp @ w, 0.0), frames[i].eigenvalues @ wphi]
            )
            assert np.abs(out[i] - want).max() <= 1e-12

    def test_matches_naive_double_loop(self, rng):
        cloud, neighbors = make_instance(rng, n=40, eta=4, k=8)
        frames, cyl = geometry_inputs(cloud, neighbors)
        w = rng.standard_normal((10, 6))
        b = rng.standard_normal(6)
        wphi = rng.standard_normal((3, 3))
        bphi = rng.standard_normal(3)
        spec = AggregationSpec(
            mode="enhanced", weight_psi=w, bias=b, weight_phi=wphi, bias_phi=bphi
        )
        got = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        tri = [np.c_[c.h_norm, c.w_norm, c.cos_theta] for c in cyl]
        lam = [f.eigenvalues for f in frames]
        want = oracles.naive_enhanced(
            cloud, neighbors.lists, tri, lam, w, b, wphi, bphi,
            oracles.relu, oracles.max_pool,
        )
        assert np.abs(got - want).max() <= 1e-10

    def test_output_width(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        frames, cyl = geometry_inputs(cloud, neighbors)
        spec = AggregationSpec(
            mode="enhanced",
            weight_psi=rng.standard_normal((8, 5)),
            weight_phi=rng.standard_normal((3, 4)),
        )
        out = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        assert out.shape == (10, 9)

    def test_permutation_invariance_bitwise(self, rng):
        from cloudgraph import CylindricalCoords

        cloud, neighbors = make_instance(rng, n=20, eta=3)
        frames, cyl = geometry_inputs(cloud, neighbors)
        spec = AggregationSpec(
            mode="enhanced",
            weight_psi=rng.standard_normal((9, 5)),
            weight_phi=rng.standard_normal((3, 2)),
        )
        base = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        perms = [rng.permutation(len(l)) for l in neighbors.lists]
        shuffled = NeighborList(
            tuple(l[p] for l, p in zip(neighbors.lists, perms)),
            max_size=neighbors.max_size,
        )
        cyl_shuffled = [
            CylindricalCoords(
                h_norm=c.h_norm[p], w_norm=c.w_norm[p], cos_theta=c.cos_theta[p],
                h=c.h[p], w=c.w[p],
            )
            for c, p in zip(cyl, perms)
        ]
        out = aggregate_enhanced(cloud, shuffled, frames, cyl_shuffled, spec)
        assert np.array_equal(out, base)

    def test_translation_invariance(self, rng):
        cloud, neighbors = make_instance(rng, n=20, eta=3)
        frames, cyl = geometry_inputs(cloud, neighbors)
        spec = AggregationSpec(
            mode="enhanced",
            weight_psi=rng.standard_normal((9, 5)),
            weight_phi=rng.standard_normal((3, 2)),
        )
        base = aggregate_enhanced(cloud, neighbors, frames, cyl, spec)
        moved = PointCloud(cloud.points + np.array([5.0, -2.0, 1.0]), cloud.features)
        frames2, cyl2 = geometry_inputs(moved, neighbors)
        out = aggregate_enhanced(moved, neighbors, frames2, cyl2, spec)
        assert np.abs(out - base).max() <= 1e-8

    def test_misaligned_cylindrical_rejected(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        frames, cyl = geometry_inputs(cloud, neighbors)
        spec = AggregationSpec(
            mode="enhanced",
            weight_psi=rng.standard_normal((8, 5)),
            weight_phi=rng.standard_normal((3, 4)),
        )
        with pytest.raises(ValueError, match="misaligned"):
            aggregate_enhanced(cloud, neighbors, frames[:-1], cyl, spec)

    def test_mode_mismatch_rejected(self, rng):
        cloud, neighbors = make_instance(rng, n=10, eta=2)
        spec = AggregationSpec(mode="baseline", weight_psi=rng.standard_normal((5, 4)))
        with pytest.raises(ValueError, match="mode"):
            aggregate_enhanced(cloud, neighbors, [], [], spec)


class TestSpecValidation:
    def test_enhanced_requires_weight_phi(self, rng):
        with pytest.raises(ValueError, match="weight_phi"):
            AggregationSpec(mode="enhanced", weight_psi=rng.standard_normal((9, 4)))

    def test_non_finite_weights_rejected(self):
        w = np.full((5, 2), np.nan)
        with pytest.raises(ValueError, match="finite"):
            AggregationSpec(mode="baseline", weight_psi=w)

    def test_bias_shape_checked(self, rng):
        with pytest.raises(ValueError, match="bias"):
            AggregationSpec(
                mode="baseline",
                weight_psi=rng.standard_normal((5, 2)),
                bias=np.zeros(3),
            )

    def test_unknown_activation_rejected(self, rng):
        with pytest.raises(ValueError, match="activation"):
            AggregationSpec(
                mode="baseline",
                weight_psi=rng.standard_normal((5, 2)),
                activation="swish",
            )
