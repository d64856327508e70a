import numpy as np
import pytest

from coreset_sc import (
    GraphKernel,
    ImplicitCenter,
    SamplingTree,
    centroids,
    cost_points,
    fast_d2_sample,
    from_coo,
    generate_sbm,
    make_rng,
    naive_d2_sample,
)
from coreset_sc.kernel import assign_to_centroids
from coreset_sc.rng import child_seeds
from oracles import random_sparse_graph, replay_centers


def path3_kernel():
    g = from_coo(3, np.array([0, 1]), np.array([1, 2]), np.ones(2))
    return GraphKernel(g, sigma=1.0)


class TestFast:
    def test_k_equals_n_covers_everything(self):
        rng = np.random.default_rng(0)
        g = random_sparse_graph(rng, 12, 3)
        kern = GraphKernel(g)
        res = fast_d2_sample(kern, 12, seed=5)
        assert res.early_stop
        assert sorted(res.centers.tolist()) == list(range(12))
        assert res.final_cost == pytest.approx(0.0, abs=1e-12)

    def test_path3_k1_contains_x_star(self):
        kern = path3_kernel()
        res = fast_d2_sample(kern, 1, seed=9)
        assert 1 in res.centers.tolist()  # x* is the middle vertex
        assert res.x_star == 1
        assert len(res.centers) <= 3

    def test_cost_trace_matches_naive_replay(self):
        rng = np.random.default_rng(2)
        for seed in range(8):
            g = random_sparse_graph(rng, 40, 4, weighted=True)
            kern = GraphKernel(g)
            res = fast_d2_sample(kern, 5, seed=seed)
            # replay the exact center sequence through the flat oracle
            oracle = replay_centers(kern, res.centers)
            for t, delta in enumerate(oracle):
                want = float(kern.weights @ delta)
                assert res.cost_trace[t] == pytest.approx(want, rel=1e-10, abs=1e-12)
            assert np.array_equal(res.final_deltas, oracle[-1])

    def test_trace_nonincreasing(self):
        rng = np.random.default_rng(3)
        g = random_sparse_graph(rng, 60, 4)
        kern = GraphKernel(g)
        for seed in range(10):
            res = fast_d2_sample(kern, 10, seed=seed)
            assert (np.diff(res.cost_trace) <= 1e-9).all()

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        g = random_sparse_graph(rng, 50, 4)
        kern = GraphKernel(g)
        a = fast_d2_sample(kern, 6, seed=77)
        b = fast_d2_sample(kern, 6, seed=77)
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.cost_trace, b.cost_trace)

    def test_neighbour_check_budget(self):
        rng = np.random.default_rng(5)
        g = random_sparse_graph(rng, 200, 6)
        kern = GraphKernel(g)
        res = fast_d2_sample(kern, 30, seed=1)
        assert res.neighbour_checks <= g.n * g.d_avg + 30 + g.n


class TestNaive:
    def test_k1_single_uniform_draw(self):
        kern = path3_kernel()
        res = naive_d2_sample(kern, 1, seed=3)
        assert len(res.centers) == 1
        assert len(res.cost_trace) == 1

    def test_lockstep_deltas_with_tree(self):
        # inserting one shared center sequence keeps the tree's leaves and the
        # naive Delta array exactly equal at every step
        rng = np.random.default_rng(6)
        for _ in range(10):
            n = int(rng.integers(10, 100))
            g = random_sparse_graph(rng, n, 5, weighted=True)
            kern = GraphKernel(g)
            x_star = kern.min_self_affinity()[0]
            tree = SamplingTree(kern, kern.min_self_affinity()[1])
            seq = np.concatenate([[x_star], rng.permutation(n)[:6]])
            oracle = replay_centers(kern, seq)
            for c, want in zip(seq, oracle):
                tree.repair(int(c))
                assert np.array_equal(tree.leaf_deltas(), want)

    def test_trace_nonincreasing_many_seeds(self):
        rng = np.random.default_rng(7)
        g = random_sparse_graph(rng, 30, 3)
        kern = GraphKernel(g)
        for seed in range(100):
            res = naive_d2_sample(kern, 5, seed=seed)
            assert (np.diff(res.cost_trace) <= 1e-9).all()

    def test_weighted_subset_support(self):
        rng = np.random.default_rng(8)
        g = random_sparse_graph(rng, 40, 4)
        kern = GraphKernel(g)
        support = np.sort(rng.choice(40, size=15, replace=False))
        weights = rng.uniform(0.5, 3.0, size=15)
        res = naive_d2_sample(kern, 4, seed=2, support=support, weights=weights)
        assert set(res.centers.tolist()) <= set(support.tolist())
        assert len(res.cost_trace) == 4


class TestDistributionEquivalence:
    def test_shared_inverse_cdf_harness(self):
        # both samplers step with the same uniform variate through the same
        # inverse CDF over identically ordered points; the center sequences
        # must coincide exactly
        g, _ = generate_sbm(4, 60, 0.4, 0.02, seed=13)
        kern = GraphKernel(g)
        n = g.n
        x_star, c_star = kern.min_self_affinity()

        tree = SamplingTree(kern, c_star)
        delta = kern.self_affinity + c_star  # naive mirror

        def naive_insert(c):
            cand = kern.self_affinity + kern.self_affinity[c]
            cols, vals = g.row(c)
            keep = cols != c
            cols, vals = cols[keep], vals[keep]
            cand[cols] -= 2.0 * vals * (kern._inv_deg[c] * kern._inv_deg[cols])
            np.maximum(cand, 0.0, out=cand)
            np.minimum(delta, cand, out=delta)
            delta[c] = 0.0

        rng = make_rng(99)
        u0 = int(rng.integers(n))
        tree.repair(x_star)
        naive_insert(x_star)
        tree.repair(u0)
        naive_insert(u0)
        for _ in range(8):
            u = rng.random()
            tree_masses = tree.leaf_contributions()
            naive_masses = kern.weights * delta
            pick_tree = int(
                np.searchsorted(np.cumsum(tree_masses), u * tree_masses.sum(), side="right")
            )
            pick_naive = int(
                np.searchsorted(np.cumsum(naive_masses), u * naive_masses.sum(), side="right")
            )
            assert pick_tree == pick_naive
            tree.repair(pick_tree)
            naive_insert(pick_naive)
            assert np.array_equal(tree.leaf_deltas(), delta)


class TestQualityBand:
    def test_median_cost_within_band_of_planted_centers(self):
        g, truth = generate_sbm(8, 64, 0.5, 0.01, seed=21)
        kern = GraphKernel(g)
        # oracle centers: the data point nearest each planted-cluster centroid
        cset = centroids(kern, np.arange(g.n), kern.weights, truth, 8)
        reps = []
        for j in range(8):
            c = cset.center(j)
            best, best_d = None, np.inf
            for u in range(g.n):
                d = (
                    kern.self_affinity[u]
                    - 2.0
                    * sum(
                        a * kern.entry(u, int(s))
                        for s, a in zip(c.support, c.coeffs)
                    )
                    + cset.norms_sq[j]
                )
                if d < best_d:
                    best, best_d = u, d
            reps.append(best)
        ref_cost = cost_points(
            kern,
            np.arange(g.n),
            kern.weights,
            [ImplicitCenter.point(r) for r in reps],
        )
        finals = []
        for seed in range(50):
            res = fast_d2_sample(kern, 8, seed=seed)
            finals.append(res.final_cost)
        assert float(np.median(finals)) <= 4.0 * ref_cost
