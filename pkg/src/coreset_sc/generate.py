"""Synthetic graph generators: stochastic block models and k-NN graphs."""

from __future__ import annotations

import numpy as np

from .graph import GraphError, SparseGraph, from_coo
from .rng import make_rng

__all__ = ["generate_sbm", "knn_graph"]


def _sample_pairs(rng, num_pairs: int, p: float) -> np.ndarray:
    """Indices of the present pairs in a block of ``num_pairs`` candidates."""
    if p <= 0.0 or num_pairs == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(num_pairs, dtype=np.int64)
    m = rng.binomial(num_pairs, p)
    if m == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(num_pairs, size=m, replace=False).astype(np.int64)


def _triu_decode(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map flat indices over {(i,j): i<j<n} to coordinate pairs."""
    # row i owns n-1-i pairs; invert the cumulative count with a search
    starts = np.concatenate([[0], np.cumsum(np.arange(n - 1, 0, -1))]).astype(np.int64)
    i = np.searchsorted(starts, idx, side="right") - 1
    j = idx - starts[i] + i + 1
    return i, j


def generate_sbm(
    k: int,
    cluster_size: int,
    p: float,
    q: float,
    seed: int = 0,
    *,
    add_self_loops: bool = False,
) -> tuple[SparseGraph, np.ndarray]:
    """Sample a stochastic block model with ``k`` planted clusters.

    Within-cluster pairs appear independently with probability ``p``,
    between-cluster pairs with probability ``q``. Returns the undirected
    simple graph (unit weights) and the ground-truth labelling. Deterministic
    for a fixed seed.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise GraphError("probabilities must lie in [0, 1]")
    n = k * cluster_size
    if n < 2:
        raise GraphError("need at least two vertices")
    rng = make_rng(seed)
    labels = np.repeat(np.arange(k, dtype=np.int64), cluster_size)

    us, vs = [], []
    pairs_in = cluster_size * (cluster_size - 1) // 2
    for b in range(k):
        idx = _sample_pairs(rng, pairs_in, p)
        if idx.size:
            i, j = _triu_decode(idx, cluster_size)
            us.append(i + b * cluster_size)
            vs.append(j + b * cluster_size)
    if q > 0.0 and k > 1:
        # between-cluster pairs, block by cluster pair: sizes are uniform so a
        # flat cluster_size x cluster_size grid per (a, b) block is exact
        block_pairs = cluster_size * cluster_size
        for a in range(k):
            for b in range(a + 1, k):
                idx = _sample_pairs(rng, block_pairs, q)
                if idx.size:
                    us.append(idx // cluster_size + a * cluster_size)
                    vs.append(idx % cluster_size + b * cluster_size)

    if us:
        u = np.concatenate(us)
        v = np.concatenate(vs)
    else:
        u = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.int64)
    g = from_coo(n, u, v, np.ones(u.shape[0]), add_self_loops=add_self_loops)
    return g, labels


def knn_graph(points: np.ndarray, neighbours: int) -> SparseGraph:
    """Symmetrised k-nearest-neighbour graph under Euclidean distance.

    An edge (u, v) is present iff v is among u's ``neighbours`` nearest
    points or vice versa; all edges get weight 1. Distance ties are broken
    towards the lower index, so the construction is fully deterministic.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise GraphError("points must be an n x d matrix")
    if not np.isfinite(pts).all():
        raise GraphError("point coordinates must be finite")
    n = pts.shape[0]
    if neighbours < 1 or n <= neighbours:
        raise GraphError("need n > neighbours >= 1")

    sq = np.einsum("ij,ij->i", pts, pts)
    block = max(1, min(n, 8_388_608 // max(n, 1) + 1))
    nbr = np.empty((n, neighbours), dtype=np.int64)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * pts[lo:hi] @ pts.T
        np.maximum(d2, 0.0, out=d2)
        rows = np.arange(lo, hi)
        d2[rows - lo, rows] = np.inf  # exclude self
        # (distance, index) lexicographic: stable argsort on distance suffices
        order = np.argsort(d2, axis=1, kind="stable")
        nbr[lo:hi] = order[:, :neighbours]

    u = np.repeat(np.arange(n, dtype=np.int64), neighbours)
    v = nbr.ravel()
    # dedupe mutual pairs so every edge keeps weight exactly 1
    lo_idx = np.minimum(u, v)
    hi_idx = np.maximum(u, v)
    order = np.lexsort((hi_idx, lo_idx))
    lo_idx, hi_idx = lo_idx[order], hi_idx[order]
    keep = np.empty(lo_idx.shape, dtype=bool)
    keep[0] = True
    keep[1:] = (lo_idx[1:] != lo_idx[:-1]) | (hi_idx[1:] != hi_idx[:-1])
    return from_coo(n, lo_idx[keep], hi_idx[keep], np.ones(int(keep.sum())))
