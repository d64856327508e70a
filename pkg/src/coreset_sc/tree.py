"""Balanced contribution tree for proportional sampling with sparse repairs.

Leaves hold one data point each with its current squared distance to the
growing center set; internal nodes aggregate w(x) * delta(x) over their
subtree. Sampling walks root to leaf choosing children proportional to
contribution; adding a center repairs only the center's leaf and its
neighbours' leaves, each with an O(log n) root-path update.
"""

from __future__ import annotations

import numpy as np

from .graph import GraphError
from .kernel import GraphKernel

__all__ = ["SamplingTree"]


class SamplingTree:
    """Static-shape binary tree over the vertices of a kernel's graph.

    Construction pairs consecutive nodes level by level, promoting the odd
    node, so depth is at most ceil(log2 n) + 1 levels. Covered points keep
    zero-contribution leaves; nodes are never removed. Mutation requires
    exclusive ownership (no internal locking).
    """

    def __init__(self, kern: GraphKernel, c_star: float):
        g = kern.graph
        n = g.n
        if n < 1:
            raise GraphError("need at least one point")
        self.kern = kern
        self.c_star = float(c_star)
        self.n = n
        self.weights = kern.weights
        # leaf deltas start at <phi(x), phi(x)> + c*
        self.delta = kern.self_affinity + self.c_star

        n_nodes = 2 * n - 1
        self._scratch = n_nodes  # padding slot absorbing path updates
        self.left = np.full(n_nodes, -1, dtype=np.int64)
        self.right = np.full(n_nodes, -1, dtype=np.int64)
        parent = np.full(n_nodes, -1, dtype=np.int64)
        self.contribution = np.zeros(n_nodes + 1)
        self.contribution[:n] = self.weights * self.delta

        levels: list[np.ndarray] = []
        current = np.arange(n, dtype=np.int64)
        next_id = n
        while current.shape[0] > 1:
            m = current.shape[0] // 2
            lefts = current[0: 2 * m: 2]
            rights = current[1: 2 * m: 2]
            ids = np.arange(next_id, next_id + m, dtype=np.int64)
            self.left[ids] = lefts
            self.right[ids] = rights
            parent[lefts] = ids
            parent[rights] = ids
            self.contribution[ids] = self.contribution[lefts] + self.contribution[rights]
            levels.append(ids)
            next_id += m
            if current.shape[0] % 2 == 1:
                current = np.concatenate([ids, current[-1:]])
            else:
                current = ids
        self.root = int(current[0])
        self.parent = parent
        self._levels = levels
        self.depth = len(levels)  # edges on the longest root-leaf path

        # per-leaf ancestor paths (padded with the scratch slot) let repairs
        # propagate with a single scattered add
        paths = np.full((n, self.depth), self._scratch, dtype=np.int64)
        cur = parent[np.arange(n)] if n > 1 else np.full(1, -1, dtype=np.int64)
        for lvl in range(self.depth):
            alive = cur >= 0
            paths[alive, lvl] = cur[alive]
            nxt = parent[np.maximum(cur, 0)]
            cur = np.where(alive, nxt, -1)
        self._paths = paths

        self.inserts = 0
        self.neighbour_checks = 0
        self._rebuild_every = max(1024, n // 8)
        self._since_rebuild = 0

    @property
    def root_contribution(self) -> float:
        return float(self.contribution[self.root])

    def leaf_deltas(self) -> np.ndarray:
        return self.delta.copy()

    def leaf_contributions(self) -> np.ndarray:
        return self.contribution[: self.n].copy()

    def _apply_leaf_updates(self, leaves: np.ndarray, new_delta: np.ndarray) -> None:
        new_contrib = self.weights[leaves] * new_delta
        diffs = self.contribution[leaves] - new_contrib
        self.delta[leaves] = new_delta
        self.contribution[leaves] = new_contrib
        if self.depth:
            np.add.at(
                self.contribution,
                self._paths[leaves].ravel(),
                -np.repeat(diffs, self.depth),
            )

    def repair(self, y: int) -> None:
        """Account for vertex ``y`` joining the center set.

        Zeroes y's own leaf and lowers each neighbour x whose distance to y
        beats its stored delta; every change is propagated along the root
        path. Re-inserting a covered point is a no-op.
        """
        kern = self.kern
        g = kern.graph
        if self.delta[y] != 0.0:
            self._apply_leaf_updates(np.array([y], dtype=np.int64), np.zeros(1))
        cols, vals = g.row(y)
        keep = cols != y
        cols, vals = cols[keep], vals[keep]
        self.neighbour_checks += int(cols.shape[0]) + 1
        if cols.shape[0]:
            saff = kern.self_affinity
            cand = (saff[cols] + saff[y]) - 2.0 * vals * (
                kern._inv_deg[y] * kern._inv_deg[cols]
            )
            if kern.sigma >= 1.0:
                np.maximum(cand, 0.0, out=cand)
            imp = cand < self.delta[cols]
            if imp.any():
                self._apply_leaf_updates(cols[imp], cand[imp])
        self.inserts += 1
        self._since_rebuild += 1
        if self._since_rebuild > self._rebuild_every:
            self.rebuild()

    def rebuild(self) -> None:
        """Recompute internal sums bottom-up from the exact leaf contributions."""
        for ids in self._levels:
            self.contribution[ids] = (
                self.contribution[self.left[ids]] + self.contribution[self.right[ids]]
            )
        self._since_rebuild = 0

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one leaf with probability contribution(leaf) / contribution(root)."""
        if self.root_contribution <= 0.0:
            raise GraphError("all points covered: root contribution is not positive")
        node = self.root
        if self.n == 1:
            return 0
        us = rng.random(self.depth)
        i = 0
        n = self.n
        contrib = self.contribution
        left, right = self.left, self.right
        while node >= n:
            l, r = left[node], right[node]
            cl, cr = contrib[l], contrib[r]
            total = cl + cr
            if total <= 0.0:  # float drift corner; prefer the heavier child
                node = int(l if cl >= cr else r)
            else:
                node = int(l if us[i] * total < cl else r)
            i += 1
        return int(node)

    def check_consistency(self, rel_tol: float = 1e-7) -> None:
        """Assert every internal node equals the sum over its leaves."""
        expect = self.contribution[: self.n].copy()
        acc = np.zeros(self.contribution.shape[0])
        acc[: self.n] = expect
        for ids in self._levels:
            acc[ids] = acc[self.left[ids]] + acc[self.right[ids]]
        scale = max(abs(acc[self.root]), 1.0)
        internals = np.concatenate(self._levels) if self._levels else np.empty(0, dtype=np.int64)
        if internals.size:
            err = np.abs(self.contribution[internals] - acc[internals]).max()
            if err > rel_tol * scale:
                raise AssertionError(f"tree drift {err} exceeds {rel_tol} * {scale}")
