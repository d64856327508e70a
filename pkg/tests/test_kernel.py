import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coreset_sc import (
    GraphError,
    GraphKernel,
    ImplicitCenter,
    centroids,
    cost_partition,
    cost_points,
    distance_to_center,
    from_coo,
    generate_sbm,
    weighted_centroid_identity,
)
from coreset_sc.kernel import assign_to_centroids, center_norm_sq
from oracles import (
    dense_center_cost,
    dense_kernel,
    dense_partition_cost_sum,
    dense_partition_cost_trace,
    random_labels,
    random_sparse_graph,
)


def path3():
    return from_coo(3, np.array([0, 1]), np.array([1, 2]), np.ones(2))


def triangle():
    return from_coo(3, np.array([0, 0, 1]), np.array([1, 2, 2]), np.ones(3))


class TestDistance:
    def test_zero_on_same_vertex(self):
        kern = GraphKernel(triangle())
        assert kern.distance_sq(1, 1) == 0.0

    def test_triangle_adjacent(self):
        kern = GraphKernel(triangle(), sigma=1.0)
        assert kern.distance_sq(0, 1) == pytest.approx(0.5)

    def test_path_endpoints_nonadjacent(self):
        kern = GraphKernel(path3(), sigma=1.0)
        assert kern.distance_sq(0, 2) == pytest.approx(2.0)

    def test_matches_dense_exhaustively(self):
        rng = np.random.default_rng(7)
        for trial in range(8):
            g = random_sparse_graph(rng, 24, 4, weighted=True, self_loops=True)
            kern = GraphKernel(g, sigma=1.0)
            k_mat = dense_kernel(g, 1.0)
            diag = np.diag(k_mat)
            for u in range(g.n):
                for v in range(g.n):
                    want = diag[u] + diag[v] - 2 * k_mat[u, v] if u != v else 0.0
                    assert kern.distance_sq(u, v) == pytest.approx(
                        max(want, 0.0), abs=1e-10
                    )

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_symmetric_and_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        g = random_sparse_graph(rng, 16, 3, weighted=True)
        kern = GraphKernel(g, sigma=1.0)
        u, v = rng.integers(0, g.n, size=2)
        d = kern.distance_sq(int(u), int(v))
        assert d >= 0.0
        assert d == kern.distance_sq(int(v), int(u))

    def test_distances_vector_matches_scalar(self):
        rng = np.random.default_rng(1)
        g = random_sparse_graph(rng, 20, 4, weighted=True)
        kern = GraphKernel(g)
        for v in (0, 5, 19):
            vec = kern.distances_sq_to(v)
            for u in range(g.n):
                assert vec[u] == pytest.approx(kern.distance_sq(u, v), abs=1e-12)


class TestMinSelfAffinity:
    def test_path(self):
        kern = GraphKernel(path3(), sigma=1.0)
        assert kern.min_self_affinity() == (1, 0.5)

    def test_regular_graph_tie_goes_low(self):
        kern = GraphKernel(triangle(), sigma=1.0)
        assert kern.min_self_affinity()[0] == 0

    def test_sigma_zero_simple_graph(self):
        kern = GraphKernel(path3(), sigma=0.0)
        v, val = kern.min_self_affinity()
        assert (v, val) == (0, 0.0)


class TestCenters:
    def test_distance_to_own_point_is_zero(self):
        kern = GraphKernel(triangle())
        c = ImplicitCenter.point(1)
        assert distance_to_center(kern, 1, c) == 0.0

    def test_singleton_centroid_equals_pair_distance(self):
        kern = GraphKernel(path3())
        c = ImplicitCenter.point(2)
        assert distance_to_center(kern, 0, c) == pytest.approx(
            kern.distance_sq(0, 2), abs=1e-12
        )

    def test_random_coefficients_match_dense(self):
        rng = np.random.default_rng(5)
        g = random_sparse_graph(rng, 6, 2, weighted=True)
        kern = GraphKernel(g)
        k_mat = dense_kernel(g, 1.0)
        for _ in range(20):
            support = np.sort(rng.choice(6, size=3, replace=False))
            coeffs = rng.normal(size=3)
            c = ImplicitCenter(support=support, coeffs=coeffs)
            alpha = np.zeros(6)
            alpha[support] = coeffs
            for u in range(6):
                want = k_mat[u, u] - 2 * (k_mat[u] @ alpha) + alpha @ k_mat @ alpha
                got = distance_to_center(kern, u, c)
                assert got == pytest.approx(max(want, 0.0), abs=1e-10)

    def test_empty_support_rejected(self):
        with pytest.raises(GraphError):
            ImplicitCenter(support=np.array([], dtype=np.int64), coeffs=np.array([]))


class TestCentroids:
    def test_singleton_clusters(self):
        g = triangle()
        kern = GraphKernel(g)
        cs = centroids(kern, np.arange(3), kern.weights, np.arange(3), 3)
        assert np.allclose(cs.norms_sq, kern.self_affinity)

    def test_nonadjacent_pair_equal_weights(self):
        kern = GraphKernel(path3())
        cs = centroids(kern, np.array([0, 2]), np.ones(2), np.zeros(2, dtype=int), 1)
        want = (kern.self_affinity[0] + kern.self_affinity[2]) / 4
        assert cs.norms_sq[0] == pytest.approx(want, abs=1e-12)

    def test_matches_dense_gram(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_sparse_graph(rng, 8, 3, weighted=True, self_loops=True)
            kern = GraphKernel(g)
            k_mat = dense_kernel(g, 1.0)
            labels = random_labels(rng, 8, 3)
            w = rng.uniform(0.5, 2.0, size=8)
            cs = centroids(kern, np.arange(8), w, labels, 3)
            for j in range(3):
                sel = labels == j
                wj = w[sel]
                want = wj @ k_mat[np.ix_(sel, sel)] @ wj / wj.sum() ** 2
                assert cs.norms_sq[j] == pytest.approx(want, rel=1e-10, abs=1e-12)
                assert center_norm_sq(kern, cs.center(j)) == pytest.approx(
                    cs.norms_sq[j], rel=1e-9, abs=1e-12
                )

    def test_empty_cluster_error_names_id(self):
        kern = GraphKernel(triangle())
        with pytest.raises(GraphError, match="cluster 2"):
            centroids(kern, np.arange(3), np.ones(3), np.array([0, 0, 1]), 3)


class TestCosts:
    def test_center_at_every_point_costs_zero(self):
        kern = GraphKernel(triangle())
        centers = [ImplicitCenter.point(v) for v in range(3)]
        assert cost_points(kern, np.arange(3), kern.weights, centers) == 0.0

    def test_six_vertex_dense_oracle(self):
        rng = np.random.default_rng(9)
        g = random_sparse_graph(rng, 6, 2, weighted=True)
        kern = GraphKernel(g)
        k_mat = dense_kernel(g, 1.0)
        for _ in range(10):
            alphas = []
            centers = []
            for _ in range(2):
                support = np.sort(rng.choice(6, size=2, replace=False))
                coeffs = rng.normal(size=2)
                centers.append(ImplicitCenter(support=support, coeffs=coeffs))
                a = np.zeros(6)
                a[support] = coeffs
                alphas.append(a)
            w = rng.uniform(0.5, 2.0, size=6)
            got = cost_points(kern, np.arange(6), w, centers)
            want = dense_center_cost(k_mat, w, alphas)
            assert got == pytest.approx(max(want, 0.0), rel=1e-9, abs=1e-9)

    def test_partition_cost_singletons_zero(self):
        g = triangle()
        kern = GraphKernel(g)
        got = cost_partition(kern, np.arange(3), kern.weights, np.arange(3), 3)
        assert got == pytest.approx(0.0, abs=1e-12)

    def test_triangle_against_dense_trace(self):
        g = triangle()
        kern = GraphKernel(g, sigma=1.0)
        labels = np.array([0, 0, 1])
        got = cost_partition(kern, np.arange(3), kern.weights, labels, 2)
        want = dense_partition_cost_trace(
            dense_kernel(g, 1.0), g.degrees, labels, 2
        )
        assert got == pytest.approx(want, abs=1e-10)

    def test_trace_equivalence_random(self):
        rng = np.random.default_rng(4)
        for _ in range(15):
            n = int(rng.integers(6, 32))
            g = random_sparse_graph(rng, n, 4, weighted=True, self_loops=True)
            k = int(rng.integers(2, 5))
            labels = random_labels(rng, n, k)
            kern = GraphKernel(g, sigma=1.0)
            got = cost_partition(kern, np.arange(n), kern.weights, labels, k)
            k_mat = dense_kernel(g, 1.0)
            trace = dense_partition_cost_trace(k_mat, g.degrees, labels, k)
            assert got == pytest.approx(trace, rel=1e-9, abs=1e-9)
            assert got == pytest.approx(
                dense_partition_cost_sum(k_mat, g.degrees, labels, k),
                rel=1e-9, abs=1e-9,
            )

    def test_sigma_shift_adds_exactly(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            n = int(rng.integers(8, 40))
            g = random_sparse_graph(rng, n, 3, weighted=True)
            k = int(rng.integers(2, 5))
            labels = random_labels(rng, n, k)
            kern0 = GraphKernel(g, sigma=0.0)
            kern2 = GraphKernel(g, sigma=2.0)
            c0 = cost_partition(kern0, np.arange(n), g.degrees, labels, k)
            c2 = cost_partition(kern2, np.arange(n), g.degrees, labels, k)
            assert c2 - c0 == pytest.approx(2.0 * (n - k), rel=1e-9)

    def test_shift_preserves_argmin_over_candidates(self):
        rng = np.random.default_rng(8)
        g = random_sparse_graph(rng, 20, 3, weighted=True)
        candidates = [random_labels(rng, 20, 3) for _ in range(12)]
        costs0 = [
            cost_partition(GraphKernel(g, 0.0), np.arange(20), g.degrees, lab, 3)
            for lab in candidates
        ]
        costs2 = [
            cost_partition(GraphKernel(g, 2.0), np.arange(20), g.degrees, lab, 3)
            for lab in candidates
        ]
        assert int(np.argmin(costs0)) == int(np.argmin(costs2))
        for a, b in zip(costs0, costs2):
            assert b - a == pytest.approx(2.0 * (20 - 3), rel=1e-9)


class TestCentroidIdentity:
    def _kern(self):
        rng = np.random.default_rng(12)
        g = random_sparse_graph(rng, 10, 3, weighted=True)
        return GraphKernel(g), rng

    def test_z_at_centroid(self):
        kern, rng = self._kern()
        pts = [ImplicitCenter.point(v) for v in (0, 3, 7)]
        w = np.array([1.0, 2.0, 0.5])
        total = w.sum()
        support = np.array([0, 3, 7])
        z = ImplicitCenter(support=support, coeffs=w / total)
        lhs, rhs = weighted_centroid_identity(kern, pts, w, z)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)

    def test_single_point(self):
        kern, _ = self._kern()
        pts = [ImplicitCenter.point(2)]
        z = ImplicitCenter.point(5)
        lhs, rhs = weighted_centroid_identity(kern, pts, np.array([3.0]), z)
        assert lhs == pytest.approx(3.0 * kern.distance_sq(2, 5), abs=1e-10)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_duplicate_points_refute_size_factor(self):
        # two copies of the same point: the identity holds without any |S|
        # factor on the displacement term; with it the rhs would double
        kern, _ = self._kern()
        pts = [ImplicitCenter.point(4), ImplicitCenter.point(4)]
        w = np.ones(2)
        z = ImplicitCenter.point(9)
        lhs, rhs = weighted_centroid_identity(kern, pts, w, z)
        d = kern.distance_sq(4, 9)
        assert lhs == pytest.approx(2.0 * d, abs=1e-10)
        assert rhs == pytest.approx(2.0 * d, abs=1e-10)
        sized_rhs = rhs + (len(pts) - 1) * w.sum() * d  # the printed variant
        assert sized_rhs == pytest.approx(4.0 * d, abs=1e-10)
        assert abs(sized_rhs - lhs) > 1e-6

    def test_random_weighted_sets(self):
        rng = np.random.default_rng(33)
        g = random_sparse_graph(rng, 12, 3, weighted=True)
        kern = GraphKernel(g)
        for _ in range(30):
            m = int(rng.integers(1, 5))
            pts = []
            for _ in range(m):
                support = np.sort(
                    rng.choice(12, size=int(rng.integers(1, 4)), replace=False)
                )
                pts.append(
                    ImplicitCenter(support=support, coeffs=rng.normal(size=support.size))
                )
            w = rng.uniform(0.1, 3.0, size=m)
            zsup = np.sort(rng.choice(12, size=2, replace=False))
            z = ImplicitCenter(support=zsup, coeffs=rng.normal(size=2))
            lhs, rhs = weighted_centroid_identity(kern, pts, w, z)
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


class TestAssign:
    def test_assignment_matches_bruteforce(self):
        rng = np.random.default_rng(21)
        g = random_sparse_graph(rng, 30, 4, weighted=True)
        kern = GraphKernel(g)
        labels = random_labels(rng, 30, 4)
        w = rng.uniform(0.5, 2.0, size=30)
        cset = centroids(kern, np.arange(30), w, labels, 4)
        got = assign_to_centroids(kern, cset)
        for u in range(30):
            dists = [
                distance_to_center(kern, u, cset.center(j), cset.norms_sq[j])
                for j in range(4)
            ]
            assert got[u] == int(np.argmin(dists))
