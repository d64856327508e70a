"""Importance-sampled coresets for kernel k-means and coreset graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError, SparseGraph, from_coo
from .kernel import GraphKernel, _rows_of
from .rng import child_seeds, make_rng
from .seeding import SeedingResult, fast_d2_sample, naive_d2_sample

__all__ = [
    "Coreset",
    "CoresetGraph",
    "identity_coreset",
    "importance_sample",
    "construct_coreset",
    "build_coreset_graph",
]


@dataclass(frozen=True)
class Coreset:
    """Sorted distinct vertex indices with strictly positive weights."""

    indices: np.ndarray
    weights: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        wts = np.asarray(self.weights, dtype=np.float64)
        if idx.shape != wts.shape:
            raise GraphError("indices and weights must have equal length")
        if idx.size and (np.diff(idx) <= 0).any():
            raise GraphError("coreset indices must be sorted and distinct")
        if wts.size and wts.min() <= 0:
            raise GraphError("coreset weights must be strictly positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", wts)

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])


@dataclass(frozen=True)
class CoresetGraph:
    """Weighted coreset adjacency A_H = W' K(V') W' plus the vertex back-map."""

    graph: SparseGraph  # A_H over coreset positions, degrees = D_H
    vertices: np.ndarray  # position -> original vertex id
    weights: np.ndarray  # coreset weights w'


def identity_coreset(kern: GraphKernel) -> Coreset:
    """The whole vertex set with its original weights (the eps = 0 coreset)."""
    return Coreset(
        indices=np.arange(kern.n, dtype=np.int64),
        weights=kern.weights.copy(),
        source={"kind": "identity", "sigma": kern.sigma},
    )


def _nearest_centers(
    kern: GraphKernel,
    support: np.ndarray,
    centers: np.ndarray,
) -> np.ndarray:
    """For each support point, the slot of its closest center (ties: lowest id).

    Exploits sparsity: Delta(x, c) = K(x,x) + s(c) with s(c) = K(c,c) - 2K(x,c),
    and the cross term only differs from zero for neighbours of c, so each
    center costs O(deg c) after a single O(|support|) baseline pass.
    """
    g = kern.graph
    saff = kern.self_affinity
    inv_deg = kern._inv_deg
    size = support.shape[0]
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[support] = np.arange(size)

    order = np.argsort(centers, kind="stable")
    sorted_centers = centers[order]
    # baseline: the non-neighbour score is K(c,c); pick its (value, id) minimum
    base_slot = int(np.lexsort((sorted_centers, saff[sorted_centers]))[0])
    best = np.full(size, saff[sorted_centers[base_slot]])
    assign = np.full(size, sorted_centers[base_slot], dtype=np.int64)

    for c in sorted_centers:
        c = int(c)
        cols, vals = g.row(c)
        keep = (cols != c) & (pos[cols] >= 0)
        cc, vv = cols[keep], vals[keep]
        slots = pos[cc]
        s = saff[c] - 2.0 * vv * (inv_deg[c] * inv_deg[cc])
        better = (s < best[slots]) | ((s == best[slots]) & (c < assign[slots]))
        if better.any():
            upd = slots[better]
            best[upd] = s[better]
            assign[upd] = c
        j = pos[c]
        if j >= 0:
            s_self = -saff[c]
            if s_self < best[j] or (s_self == best[j] and c < assign[j]):
                best[j] = s_self
                assign[j] = c
    slot_of = np.full(g.n, -1, dtype=np.int64)
    slot_of[sorted_centers] = np.arange(sorted_centers.shape[0])
    return slot_of[assign]


def _default_draw_count(
    k: int, eps: float, size: int, c_s: float, eps_exponent: float
) -> int:
    raw = c_s * k * k * math.log(k + 1) ** 2 * math.log(max(size, 2)) / eps**eps_exponent
    return max(1, min(size, math.ceil(raw)))


def importance_sample(
    kern: GraphKernel,
    k: int,
    eps: float,
    seed,
    *,
    size_override: int | None = None,
    support: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    c_s: float = 0.2,
    eps_exponent: float = 4.0,
    sensitivity: str = "global",
    seeding: SeedingResult | None = None,
) -> Coreset:
    """One round of sensitivity-based importance sampling.

    Runs a D^2-sampling pass (the tree sampler on the full graph, the naive
    sampler on an explicit weighted support), converts per-point
    sensitivities into a distribution, draws N i.i.d. points, and merges
    duplicates by summing their estimator weights w(x) / (p_x N).

    ``sensitivity`` picks the second term: "global" (default) adds
    w(x)/w(X); "standard" adds w(x) over the weight of x's nearest-center
    cluster. On degree-normalised graph kernels the nearest-center partition
    degenerates (self-affinity differences dominate single-point distances),
    which makes the per-cluster term waste most of its mass on singleton
    clusters; the global term keeps the distribution flat enough to cover
    every planted cluster at practical sample counts.
    """
    if not (0.0 < eps < 1.0):
        raise GraphError("eps must lie in (0, 1)")
    if k < 1:
        raise GraphError("k must be at least 1")
    full = support is None and weights is None
    if support is None:
        support = np.arange(kern.n, dtype=np.int64)
    else:
        support = np.asarray(support, dtype=np.int64)
    if weights is None:
        weights = kern.weights[support]
    else:
        weights = np.asarray(weights, dtype=np.float64)
    size = support.shape[0]

    seeds = child_seeds(seed, 2)
    if seeding is not None:
        result = seeding
    elif full:
        result = fast_d2_sample(kern, min(k, size), seeds[0])
    else:
        result = naive_d2_sample(
            kern, min(k, size), seeds[0], support=support, weights=weights
        )
    cost = result.final_cost
    deltas = result.final_deltas

    src = {
        "kind": "importance",
        "sigma": kern.sigma,
        "graph": kern.graph.fingerprint(),
        "k": k,
        "eps": eps,
        "seed": repr(seed),
        "sensitivity": sensitivity,
    }
    if cost <= 0.0:
        # C* already covers every point: the set itself is the only unbiased answer
        keep = weights > 0
        src["kind"] = "identity"
        return Coreset(indices=support[keep], weights=weights[keep], source=src)

    sens = weights * deltas / cost
    if sensitivity == "standard":
        assign = _nearest_centers(kern, support, result.centers)
        cluster_w = np.zeros(result.centers.shape[0])
        np.add.at(cluster_w, assign, weights)
        sens = sens + weights / cluster_w[assign]
    elif sensitivity == "global":
        sens = sens + weights / float(weights.sum())
    else:
        raise GraphError(f"unknown sensitivity variant: {sensitivity!r}")

    p = sens / sens.sum()
    n_draws = (
        int(size_override)
        if size_override is not None
        else _default_draw_count(k, eps, size, c_s, eps_exponent)
    )
    if n_draws < 1:
        raise GraphError("draw count must be positive")
    rng = make_rng(seeds[1])
    draws = rng.choice(size, size=n_draws, replace=True, p=p)
    picked, merged = merge_draws(weights, p, draws)
    src["n_draws"] = n_draws
    return Coreset(indices=support[picked], weights=merged, source=src)


def merge_draws(
    weights: np.ndarray, p: np.ndarray, draws: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Merge repeated draws: each draw of slot x carries w(x)/(p_x N).

    Returns (distinct sorted slots, summed weights); the total equals the sum
    of the per-draw estimator weights exactly.
    """
    n_draws = draws.shape[0]
    picked, inv = np.unique(draws, return_inverse=True)
    merged = np.zeros(picked.shape[0])
    np.add.at(merged, inv, weights[draws] / (p[draws] * n_draws))
    return picked, merged


def _iterated_log(x: float, i: int) -> float | None:
    v = float(x)
    for _ in range(i):
        if v <= 1.0:
            return None
        v = math.log(v)
    return v if v > 1e-12 else None


def construct_coreset(
    kern: GraphKernel,
    k: int,
    eps: float,
    seed,
    max_rounds: int = 1,
    **kwargs,
) -> Coreset:
    """Iterate importance sampling with the shrinking eps_i schedule.

    Round i uses eps_i = eps / (log^(i) n)^(1/4) (iterated natural log of the
    original support size). Stops when the support stops shrinking, the
    schedule is exhausted, or after ``max_rounds`` rounds (default 1).
    """
    if max_rounds < 1:
        raise GraphError("max_rounds must be at least 1")
    n0 = kern.n
    seeds = child_seeds(seed, max_rounds)
    cs: Coreset | None = None
    support = None
    weights = None
    for i in range(1, max_rounds + 1):
        il = _iterated_log(n0, i)
        if il is None:
            break
        eps_i = eps / il**0.25
        nxt = importance_sample(
            kern, k, eps_i, seeds[i - 1], support=support, weights=weights, **kwargs
        )
        prev_size = n0 if cs is None else cs.size
        cs = nxt
        support, weights = cs.indices, cs.weights
        if cs.size >= prev_size:
            break
    assert cs is not None
    return cs


def build_coreset_graph(
    kern: GraphKernel, cs: Coreset, *, isolated: str = "error"
) -> CoresetGraph:
    """Materialise A_H = W' K(V') W' over the coreset vertices.

    Diagonal entries carry the sigma shift (w'_i^2 (sigma/deg + A_ii/deg^2)),
    so D_H row sums include that mass once. A coreset vertex with no kernel
    affinity to the rest of the coreset has a zero row at sigma = 0;
    ``isolated`` chooses between raising (default) and patching such vertices
    with a unit self-loop.
    """
    if cs.size < 2:
        raise GraphError("coreset graph needs at least two vertices")
    g = kern.graph
    inv_deg = kern._inv_deg
    verts = cs.indices
    w = cs.weights
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(cs.size)

    rows, cols, vals = _rows_of(g, verts)
    keep = pos[cols] >= 0
    ri = pos[rows[keep]]
    ci = pos[cols[keep]]
    av = vals[keep] * (inv_deg[rows[keep]] * inv_deg[cols[keep]]) * (w[ri] * w[ci])
    if kern.sigma:
        di = np.arange(cs.size, dtype=np.int64)
        dv = w * w * (kern.sigma * inv_deg[verts])
        ri = np.concatenate([ri, di])
        ci = np.concatenate([ci, di])
        av = np.concatenate([av, dv])
    try:
        g_h = from_coo(
            cs.size, ri, ci, av, symmetrise=False,
            add_self_loops=(isolated == "self-loop"),
        )
    except GraphError as exc:
        raise GraphError(
            f"coreset graph has an isolated vertex ({exc}); use sigma >= 1"
        ) from exc
    return CoresetGraph(graph=g_h, vertices=verts.copy(), weights=w.copy())
