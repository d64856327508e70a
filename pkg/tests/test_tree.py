import numpy as np
import pytest
from scipy.stats import chisquare

from coreset_sc import GraphError, GraphKernel, SamplingTree, from_coo, make_rng
from oracles import random_sparse_graph, replay_centers


def path3_kernel():
    g = from_coo(3, np.array([0, 1]), np.array([1, 2]), np.ones(2))
    return GraphKernel(g, sigma=1.0)


def tree_for(kern):
    return SamplingTree(kern, kern.min_self_affinity()[1])


def path_probability(tree, leaf: int) -> float:
    """Product of branch probabilities along the root-to-leaf walk."""
    prob = 1.0
    node = leaf
    while tree.parent[node] >= 0:
        parent = tree.parent[node]
        cl = tree.contribution[tree.left[parent]]
        cr = tree.contribution[tree.right[parent]]
        if cl + cr <= 0.0:  # dead subtree: unreachable from a live root
            return 0.0
        own = cl if tree.left[parent] == node else cr
        prob *= own / (cl + cr)
        node = parent
    return prob


class TestConstruct:
    def test_single_leaf(self):
        g = from_coo(1, np.array([0]), np.array([0]), np.array([2.0]))
        kern = GraphKernel(g, sigma=1.0)
        tree = SamplingTree(kern, kern.min_self_affinity()[1])
        assert tree.root == 0
        want = kern.weights[0] * (kern.self_affinity[0] + kern.self_affinity[0])
        assert tree.root_contribution == pytest.approx(want)

    def test_path3_root_contribution(self):
        tree = tree_for(path3_kernel())
        assert tree.root_contribution == pytest.approx(5.0, abs=1e-12)

    def test_root_equals_bruteforce_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            g = random_sparse_graph(rng, int(rng.integers(2, 60)), 3, weighted=True)
            kern = GraphKernel(g)
            c_star = kern.min_self_affinity()[1]
            tree = SamplingTree(kern, c_star)
            want = float(kern.weights @ (kern.self_affinity + c_star))
            assert tree.root_contribution == pytest.approx(want, rel=1e-10)

    def test_depth_bound(self):
        rng = np.random.default_rng(1)
        for n in (1, 2, 3, 5, 17, 64, 200, 321):
            g = random_sparse_graph(rng, n, 3) if n > 1 else from_coo(
                1, np.array([0]), np.array([0]), np.ones(1)
            )
            tree = SamplingTree(GraphKernel(g), 0.5)
            assert tree.depth <= int(np.ceil(np.log2(max(n, 2)))) + 1


class TestRepair:
    def test_first_center_semantics(self):
        kern = path3_kernel()
        tree = tree_for(kern)
        x_star = kern.min_self_affinity()[0]
        tree.repair(x_star)
        deltas = tree.leaf_deltas()
        assert deltas[x_star] == 0.0
        for x in (0, 2):
            assert deltas[x] == pytest.approx(kern.distance_sq(x, x_star), abs=1e-12)
            assert deltas[x] <= kern.self_affinity[x] + kern.min_self_affinity()[1]

    def test_unrelated_insertion_touches_only_own_leaf(self):
        g = from_coo(4, np.array([0, 2]), np.array([1, 3]), np.ones(2))
        kern = GraphKernel(g)
        tree = tree_for(kern)
        before = tree.leaf_deltas()
        tree.repair(0)
        tree.repair(1)  # neighbour 0 already at 0; no neighbour improvement
        after = tree.leaf_deltas()
        assert after[0] == 0.0 and after[1] == 0.0
        assert after[2] == before[2] and after[3] == before[3]

    def test_reinsert_is_noop(self):
        kern = path3_kernel()
        tree = tree_for(kern)
        tree.repair(1)
        snap_delta = tree.leaf_deltas()
        snap_contrib = tree.contribution.copy()
        tree.repair(1)
        assert np.array_equal(tree.leaf_deltas(), snap_delta)
        assert np.array_equal(tree.contribution, snap_contrib)

    def test_matches_naive_replay_exactly(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(5, 120))
            g = random_sparse_graph(rng, n, 4, weighted=True)
            kern = GraphKernel(g)
            x_star = kern.min_self_affinity()[0]
            tree = tree_for(kern)
            extra = rng.permutation(n)[: min(8, n)]
            centers = np.concatenate([[x_star], extra])
            oracle = replay_centers(kern, centers)
            for c, want in zip(centers, oracle):
                tree.repair(int(c))
                got = tree.leaf_deltas()
                assert np.array_equal(got, want), "leaf deltas diverged from replay"

    def test_delta_monotone(self):
        rng = np.random.default_rng(3)
        g = random_sparse_graph(rng, 50, 4, weighted=True)
        kern = GraphKernel(g)
        tree = tree_for(kern)
        prev = tree.leaf_deltas()
        for c in rng.permutation(50)[:20]:
            tree.repair(int(c))
            cur = tree.leaf_deltas()
            assert (cur <= prev + 1e-15).all()
            prev = cur

    def test_internal_consistency_after_repairs(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(10, 200))
            g = random_sparse_graph(rng, n, 5, weighted=True)
            kern = GraphKernel(g)
            tree = tree_for(kern)
            for c in rng.permutation(n)[: n // 2]:
                tree.repair(int(c))
            tree.check_consistency(rel_tol=1e-7)

    def test_work_accounting(self):
        rng = np.random.default_rng(5)
        g = random_sparse_graph(rng, 100, 6)
        kern = GraphKernel(g)
        tree = tree_for(kern)
        k = 20
        inserted = rng.permutation(100)[:k]
        for c in inserted:
            tree.repair(int(c))
        bound = sum(np.diff(g.row_ptr)[inserted]) + k
        assert tree.neighbour_checks <= bound
        assert tree.neighbour_checks <= g.n * g.d_avg + k + g.n


class TestSample:
    def test_all_mass_on_one_leaf(self):
        kern = path3_kernel()
        tree = tree_for(kern)
        tree.repair(1)
        tree.repair(0)
        rng = make_rng(0)
        draws = {tree.sample(rng) for _ in range(50)}
        assert draws == {2}

    def test_error_when_everything_covered(self):
        kern = path3_kernel()
        tree = tree_for(kern)
        for v in (0, 1, 2):
            tree.repair(v)
        with pytest.raises(GraphError, match="covered"):
            tree.sample(make_rng(0))

    def test_two_leaves_quarter_three_quarters(self):
        g = from_coo(2, np.array([0]), np.array([1]), np.array([1.0]))
        kern = GraphKernel(g, sigma=1.0)
        tree = SamplingTree(kern, kern.min_self_affinity()[1])
        # force contributions 1 and 3 through the leaves directly
        tree.contribution[0] = 1.0
        tree.contribution[1] = 3.0
        tree.rebuild()
        rng = make_rng(1234)
        counts = np.zeros(2)
        n_draws = 100_000
        for _ in range(n_draws):
            counts[tree.sample(rng)] += 1
        stat, pvalue = chisquare(counts, np.array([0.25, 0.75]) * n_draws)
        assert pvalue > 0.01

    def test_path_probability_audit(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(2, 80))
            g = random_sparse_graph(rng, n, 4, weighted=True)
            kern = GraphKernel(g)
            tree = tree_for(kern)
            for c in rng.permutation(n)[: n // 3]:
                tree.repair(int(c))
            root = tree.root_contribution
            leaf_contrib = tree.leaf_contributions()
            for leaf in range(n):
                want = leaf_contrib[leaf] / root
                assert path_probability(tree, leaf) == pytest.approx(
                    want, rel=1e-12, abs=1e-15
                )

    def test_rebuild_preserves_root(self):
        rng = np.random.default_rng(8)
        g = random_sparse_graph(rng, 64, 4, weighted=True)
        kern = GraphKernel(g)
        tree = tree_for(kern)
        for c in range(30):
            tree.repair(c)
        before = tree.root_contribution
        tree.rebuild()
        assert tree.root_contribution == pytest.approx(before, rel=1e-9)
