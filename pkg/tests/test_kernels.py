"""The jitted kernels and their pure-numpy twins must agree bitwise."""

import numpy as np
import pytest

from cloudgraph import _kernels

import oracles

needs_numba = pytest.mark.skipif(
    _kernels.backend() != "numba", reason="numba backend not active"
)


@pytest.fixture()
def both_backends():
    original = _kernels.backend()
    yield
    _kernels.set_backend(original)


@needs_numba
class TestBackendAgreement:
    def test_ball_query_all_bitwise(self, rng, both_backends):
        for trial in range(6):
            n = int(rng.integers(1, 400))
            pts = oracles.random_cloud(rng, n, spread=0.5)
            if trial == 5:  # duplicated coordinates are legal
                pts[: n // 2] = pts[0]
            grid = _kernels.Grid(pts)
            r = float(rng.uniform(0.05, 0.6))
            k = int(rng.integers(1, 40))
            _kernels.set_backend("numba")
            ln_a, id_a, d2_a = _kernels.ball_query_all(grid, r, k)
            _kernels.set_backend("numpy")
            ln_b, id_b, d2_b = _kernels.ball_query_all(grid, r, k)
            assert np.array_equal(ln_a, ln_b)
            for i in range(n):
                s = slice(i * k, i * k + ln_a[i])
                assert np.array_equal(id_a[s], id_b[s])
                assert np.array_equal(d2_a[s], d2_b[s])

    def test_csr_matmul_bitwise(self, rng, both_backends):
        for _ in range(8):
            n = int(rng.integers(2, 120))
            a = oracles.random_directed_binary(rng, n, 0.2, self_loops=True)
            bvals = a.data * rng.uniform(0.1, 1.0)
            _kernels.set_backend("numba")
            pa = _kernels.csr_matmul(
                n, a.indptr, a.indices, bvals, a.indptr, a.indices, bvals
            )
            _kernels.set_backend("numpy")
            pb = _kernels.csr_matmul(
                n, a.indptr, a.indices, bvals, a.indptr, a.indices, bvals
            )
            for x, y in zip(pa, pb):
                assert np.array_equal(x, y)

    def test_fps_bitwise(self, rng, both_backends):
        for _ in range(5):
            n = int(rng.integers(2, 500))
            pts = oracles.random_cloud(rng, n)
            m = int(rng.integers(1, n + 1))
            _kernels.set_backend("numba")
            a = _kernels.fps(pts, m, 0)
            _kernels.set_backend("numpy")
            b = _kernels.fps(pts, m, 0)
            assert np.array_equal(a, b)


def test_backend_name_is_valid():
    assert _kernels.backend() in ("numba", "numpy")


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("gpu")


def test_csr_matmul_matches_dense(rng):
    n = 30
    a = oracles.random_directed_binary(rng, n, 0.25, self_loops=True)
    got = _kernels.csr_matmul(n, a.indptr, a.indices, a.data, a.indptr, a.indices, a.data)
    from cloudgraph import SparseAdjacency, dense_of

    dense = dense_of(a)
    want = dense @ dense
    rebuilt = dense_of(SparseAdjacency(n, got[0], got[1], got[2]))
    assert np.abs(rebuilt - want).max() <= 1e-12


def test_csr_add_matches_dense(rng):
    n = 25
    a = oracles.random_directed_binary(rng, n, 0.2, self_loops=True)
    b = oracles.random_directed_binary(rng, n, 0.2, self_loops=False)
    got = _kernels.csr_add(
        n, a.indptr, a.indices, a.data, b.indptr, b.indices, b.data
    )
    from cloudgraph import SparseAdjacency, dense_of

    rebuilt = dense_of(SparseAdjacency(n, got[0], got[1], got[2]))
    assert np.array_equal(rebuilt, dense_of(a) + dense_of(b))
