"""Coreset spectral clustering: backends, label transfer, pipeline, baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .coreset import (
    Coreset,
    CoresetGraph,
    _nearest_centers,
    build_coreset_graph,
    construct_coreset,
)
from .graph import GraphError, SparseGraph, ncut_average
from .kernel import (
    GraphKernel,
    _cross_terms,
    assign_to_centroids,
    centroids,
    cost_partition,
)
from .rng import child_seeds, make_rng
from .seeding import naive_d2_sample

__all__ = [
    "CscReport",
    "spectral_cluster_dense",
    "spectral_cluster_fast",
    "label_full_graph",
    "csc",
    "coreset_kernel_kmeans",
]

_DENSE_GUARD = 20_000


def _kmeans_once(points: np.ndarray, k: int, rng: np.random.Generator,
                 max_iter: int, tol: float) -> tuple[np.ndarray, float]:
    n = points.shape[0]
    # k-means++ seeding
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = np.square(points - centers[0]).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = points[int(rng.integers(n))]
            continue
        u = rng.random()
        idx = int(np.searchsorted(np.cumsum(d2), u * total, side="right"))
        centers[j] = points[min(idx, n - 1)]
        np.minimum(d2, np.square(points - centers[j]).sum(axis=1), out=d2)

    labels = np.zeros(n, dtype=np.int64)
    prev_inertia = np.inf
    for _ in range(max_iter):
        # squared distances to all centers
        dists = (
            np.square(points).sum(axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.square(centers).sum(axis=1)[None, :]
        )
        labels = np.argmin(dists, axis=1)
        inertia = float(dists[np.arange(n), labels].sum())
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(dists[np.arange(n), labels]))
            labels[far] = j
            counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        centers = sums / np.maximum(counts, 1)[:, None]
        if prev_inertia - inertia <= tol * max(abs(prev_inertia), 1.0):
            break
        prev_inertia = inertia
    dists = (
        np.square(points).sum(axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.square(centers).sum(axis=1)[None, :]
    )
    labels = np.argmin(dists, axis=1).astype(np.int64)
    inertia = float(dists[np.arange(n), labels].sum())
    return labels, inertia


def _kmeans(points: np.ndarray, k: int, seed, *, restarts: int = 10,
            max_iter: int = 100, tol: float = 1e-6) -> np.ndarray:
    best_labels, best_inertia = None, np.inf
    for ss in child_seeds(seed, restarts):
        labels, inertia = _kmeans_once(points, k, make_rng(ss), max_iter, tol)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _as_graph(g) -> SparseGraph:
    return g.graph if isinstance(g, CoresetGraph) else g


def _cluster_embedding(emb: np.ndarray, k: int, seed) -> np.ndarray:
    """k-means with the empty-cluster retry policy (5 sub-seeds, then error)."""
    for attempt, ss in enumerate(child_seeds(seed, 5)):
        labels = _kmeans(emb, k, ss)
        if np.bincount(labels, minlength=k).min() > 0:
            return labels
    raise GraphError(f"k-means produced an empty cluster in 5 attempts (k={k})")


def spectral_cluster_dense(g, k: int, seed) -> np.ndarray:
    """Reference backend: dense top-k eigenvectors of D^-1/2 A D^-1/2.

    Rows of the eigenvector matrix are scaled by D^-1/2 before k-means.
    Guarded to graphs small enough for a dense eigensolve.
    """
    g = _as_graph(g)
    n = g.n
    if n > _DENSE_GUARD:
        raise GraphError(f"dense backend limited to {_DENSE_GUARD} vertices, got {n}")
    if k < 1 or k > n:
        raise GraphError("need 1 <= k <= n")
    inv_sqrt = 1.0 / np.sqrt(g.degrees)
    m = np.zeros((n, n))
    rows = g._row_of_entry()
    m[rows, g.col_idx] = g.values * inv_sqrt[rows] * inv_sqrt[g.col_idx]
    _, vecs = scipy.linalg.eigh(m, subset_by_index=[n - k, n - 1])
    emb = vecs * inv_sqrt[:, None]
    return _cluster_embedding(emb, k, seed)


def spectral_cluster_fast(g, k: int, seed, power_steps: int | None = None) -> np.ndarray:
    """Scalable backend: power-iteration smoothing of O(log k) random vectors.

    t = ceil(log2 k) + 1 Gaussian vectors are smoothed by ``power_steps``
    applications of (I + D^-1/2 A D^-1/2)/2 (default 10 * ceil(ln n)),
    orthonormalised, D^-1/2-scaled, then clustered with k-means.
    """
    g = _as_graph(g)
    n = g.n
    if k < 1 or k > n:
        raise GraphError("need 1 <= k <= n")
    t = int(np.ceil(np.log2(k))) + 1 if k > 1 else 1
    p = power_steps if power_steps is not None else 10 * int(np.ceil(np.log(n)))
    inv_sqrt = 1.0 / np.sqrt(g.degrees)
    rows = g._row_of_entry()
    m_hat = scipy.sparse.csr_matrix(
        (g.values * inv_sqrt[rows] * inv_sqrt[g.col_idx], g.col_idx, g.row_ptr),
        shape=(n, n),
    )
    seeds = child_seeds(seed, 2)
    rng = make_rng(seeds[0])
    y = rng.standard_normal((n, t))
    for _ in range(p):
        y = 0.5 * (y + m_hat @ y)
    q, _ = np.linalg.qr(y)
    emb = q * inv_sqrt[:, None]
    return _cluster_embedding(emb, k, seeds[1])


def label_full_graph(
    kern: GraphKernel, cs: Coreset, coreset_labels: np.ndarray, k: int
) -> np.ndarray:
    """Assign every vertex of the full graph to its nearest coreset centroid.

    Centroids come from the weighted coreset partition; coreset vertices are
    relabelled by the same nearest-centroid rule rather than keeping their
    input labels. Ties go to the lowest cluster id.
    """
    cset = centroids(
        kern, cs.indices, cs.weights, coreset_labels, k, provenance="coreset"
    )
    return assign_to_centroids(kern, cset)


@dataclass
class CscReport:
    """Everything one pipeline run produced, for serialisation and audits."""

    labels_coreset: np.ndarray
    labels_full: np.ndarray
    ncut_coreset: float
    ncut_full: float
    k: int
    seed: object
    coreset_size: int
    params: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "coreset_size": self.coreset_size,
            "ncut_coreset": self.ncut_coreset,
            "ncut_full": self.ncut_full,
            "params": self.params,
            "timings_ms": self.timings_ms,
            "labels_coreset": self.labels_coreset.tolist(),
            "labels": self.labels_full.tolist(),
        }


def csc(
    g: SparseGraph,
    k: int,
    eps: float = 0.2,
    seed=0,
    backend: str = "dense",
    coreset_frac: float | None = None,
    *,
    sigma: float = 1.0,
    clustering_sigma: float = 0.0,
    max_rounds: int = 1,
    coreset: Coreset | None = None,
    power_steps: int | None = None,
    **coreset_kwargs,
) -> CscReport:
    """Full coreset spectral clustering pipeline.

    kernel -> coreset -> coreset graph -> spectral backend -> full labelling.
    ``coreset_frac`` overrides the sample-count formula with frac * n draws;
    ``coreset`` skips construction entirely (used for identity-coreset runs).
    Failures carry the pipeline stage in their message.

    ``sigma`` (the PSD shift) applies to the sampling machinery only; the
    spectral step and the centroid labelling solve the unshifted problem
    (``clustering_sigma``, default 0). The shift is exactly what makes the
    kernel a Hilbert-space inner product for sampling, but baking it into a
    reweighted coreset graph rescales volumes per-vertex and buries the cut
    structure under self-loop mass, and its centroid-norm contribution does
    not cancel across clusters when coreset weights differ from degrees.
    Cut objectives are shift-independent, so clustering at 0 is the solution
    the shift was meant to preserve.
    """
    if k < 2:
        raise GraphError("csc needs k >= 2")
    timings: dict[str, float] = {}
    seeds = child_seeds(seed, 3)

    def staged(name, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:
            raise GraphError(f"stage '{name}' failed: {exc}") from exc
        timings[name] = (time.perf_counter() - t0) * 1e3
        return out

    kern = staged("kernel", lambda: GraphKernel(g, sigma=sigma))
    if coreset is None:
        size_override = None
        if coreset_frac is not None:
            size_override = max(2, int(round(coreset_frac * g.n)))
        cs = staged(
            "coreset",
            lambda: construct_coreset(
                kern, k, eps, seeds[0], max_rounds=max_rounds,
                size_override=size_override, **coreset_kwargs,
            ),
        )
    else:
        cs = coreset
        timings["coreset"] = 0.0
    kern_c = kern if clustering_sigma == sigma else GraphKernel(g, sigma=clustering_sigma)
    ch = staged(
        "coreset_graph",
        lambda: build_coreset_graph(kern_c, cs, isolated="self-loop"),
    )
    if backend == "dense":
        labels_h = staged(
            "spectral", lambda: spectral_cluster_dense(ch, k, seeds[1])
        )
    elif backend == "fast":
        labels_h = staged(
            "spectral",
            lambda: spectral_cluster_fast(ch, k, seeds[1], power_steps=power_steps),
        )
    else:
        raise GraphError(f"unknown backend {backend!r}")
    labels_full = staged(
        "labelling", lambda: label_full_graph(kern_c, cs, labels_h, k)
    )
    ncut_h = staged("eval", lambda: ncut_average(ch.graph, labels_h, k))
    ncut_g = ncut_average(g, labels_full, k)
    return CscReport(
        labels_coreset=labels_h,
        labels_full=labels_full,
        ncut_coreset=ncut_h,
        ncut_full=ncut_g,
        k=k,
        seed=seed,
        coreset_size=cs.size,
        params={
            "eps": eps,
            "sigma": sigma,
            "clustering_sigma": clustering_sigma,
            "backend": backend,
            "coreset_frac": coreset_frac,
            "max_rounds": max_rounds,
            "k": k,
        },
        timings_ms=timings,
    )


def coreset_kernel_kmeans(
    kern: GraphKernel,
    cs: Coreset,
    k: int,
    seed,
    max_iters: int = 100,
    transfer_sigma: float = 0.0,
) -> tuple[np.ndarray, dict]:
    """Lloyd's algorithm in kernel space on the weighted coreset (baseline).

    D^2-seeded; iterates exact centroid updates and nearest-centroid
    reassignment until a label fixpoint or ``max_iters``. Empty clusters are
    reseeded at the point of maximum distance. The coreset labelling is then
    extended to the whole graph by nearest-centroid labelling (at
    ``transfer_sigma``, like the spectral pipeline, so the comparison
    isolates the Lloyd loop rather than the transfer step). The Lloyd loop
    itself runs at the kernel's own shift, which is what makes it reluctant
    to move points between clusters on sparse kernels.
    """
    if k > cs.size:
        raise GraphError("k cannot exceed the coreset size")
    seeds = child_seeds(seed, 2)
    seed_result = naive_d2_sample(
        kern, k, seeds[0], support=cs.indices, weights=cs.weights
    )
    centers = seed_result.centers[:k]
    labels = _nearest_centers(kern, cs.indices, centers)
    # seeding may produce fewer than k distinct occupied slots; patch by
    # spreading unassigned ids over the largest clusters' farthest points
    labels = _fix_empty(kern, cs, labels, k)

    objective: list[float] = []
    iters = 0
    for iters in range(1, max_iters + 1):
        cset = centroids(kern, cs.indices, cs.weights, labels, k)
        new_labels = assign_to_centroids(kern, cset, restrict_to=cs.indices)
        new_labels = _fix_empty(kern, cs, new_labels, k)
        objective.append(cost_partition(kern, cs.indices, cs.weights, new_labels, k))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    kern_t = (
        kern
        if transfer_sigma == kern.sigma
        else GraphKernel(kern.graph, sigma=transfer_sigma)
    )
    labels_full = label_full_graph(kern_t, cs, labels, k)
    info = {
        "iterations": iters,
        "objective_trace": objective,
        "labels_coreset": labels,
    }
    return labels_full, info


def _fix_empty(kern: GraphKernel, cs: Coreset, labels: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=k)
    missing = np.flatnonzero(counts == 0)
    if missing.size == 0:
        return labels
    labels = labels.copy()
    cset = None
    for j in missing:
        cset = centroids(  # distances to the current nonempty clusters
            kern,
            cs.indices,
            cs.weights,
            np.unique(labels, return_inverse=True)[1],
            int(np.unique(labels).shape[0]),
        )
        # farthest point from its own centroid, by kernel distance; points in
        # singleton clusters stay put so the donor cluster cannot empty out
        assign = assign_to_centroids(kern, cset, restrict_to=cs.indices)
        d = _distances_to_assigned(kern, cs, cset, assign)
        counts_now = np.bincount(labels, minlength=k)
        d[counts_now[labels] <= 1] = -np.inf
        far = int(np.argmax(d))
        labels[far] = j
    return labels


def _distances_to_assigned(kern, cs, cset, assign) -> np.ndarray:
    saff = kern.self_affinity[cs.indices]
    out = np.empty(cs.size)
    for j in range(cset.k):
        sel = assign == j
        if not sel.any():
            continue
        cross = _cross_terms(kern, cs.indices[sel], cset.center(j))
        out[sel] = saff[sel] - 2.0 * cross + cset.norms_sq[j]
    return out
