"""Implicit graph kernel K = D^-1 A D^-1 + sigma * D^-1 with weights w = deg.

The kernel matrix is never materialised: entries, rows, squared feature-space
distances, centroid norms, and partition costs are all computed from sparse
row scans of the underlying graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphError, SparseGraph

__all__ = [
    "GraphKernel",
    "ImplicitCenter",
    "CentroidSet",
    "centroids",
    "distance_to_center",
    "cost_points",
    "cost_partition",
    "weighted_centroid_identity",
]

# distances this far below zero trip the round-off assertion instead of the clamp
_CLAMP_TOL = 1e-9


class GraphKernel:
    """Kernel view of a graph: K(u,v) = A(u,v)/(deg u * deg v) + sigma*[u=v]/deg u.

    With sigma >= 1 the scaled matrix sigma*I + D^{-1/2} A D^{-1/2} is PSD
    (normalised-adjacency eigenvalues lie in [-1, 1]), so all pairwise squared
    distances are nonnegative. Point weights are w(u) = deg(u). Immutable.
    """

    def __init__(self, graph: SparseGraph, sigma: float = 1.0):
        if sigma < 0:
            raise GraphError("sigma must be nonnegative")
        self.graph = graph
        self.sigma = float(sigma)
        self.weights = graph.degrees
        inv_deg = 1.0 / graph.degrees
        self._inv_deg = inv_deg
        # K(u,u) = A(u,u)/deg^2 + sigma/deg
        diag_a = np.zeros(graph.n)
        rows = graph._row_of_entry()
        loops = rows == graph.col_idx
        diag_a[rows[loops]] = graph.values[loops]
        self.self_affinity = diag_a * inv_deg * inv_deg + self.sigma * inv_deg
        self.self_affinity.flags.writeable = False

    @property
    def n(self) -> int:
        return self.graph.n

    def entry(self, u: int, v: int) -> float:
        val = self.graph.weight(u, v) * (self._inv_deg[u] * self._inv_deg[v])
        if u == v:
            val += self.sigma * self._inv_deg[u]
        return float(val)

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero kernel entries of row u, diagonal included."""
        cols, vals = self.graph.row(u)
        kvals = vals * (self._inv_deg[u] * self._inv_deg[cols])
        j = np.searchsorted(cols, u)
        if j < cols.shape[0] and cols[j] == u:
            kvals = kvals.copy()
            kvals[j] += self.sigma * self._inv_deg[u]
            return cols, kvals
        cols = np.insert(cols, j, u)
        kvals = np.insert(kvals, j, self.sigma * self._inv_deg[u])
        return cols, kvals

    def distance_sq(self, u: int, v: int) -> float:
        """Squared feature-space distance K(u,u) + K(v,v) - 2 K(u,v)."""
        if u == v:
            return 0.0
        d = self.self_affinity[u] + self.self_affinity[v] - 2.0 * (
            self.graph.weight(u, v) * (self._inv_deg[u] * self._inv_deg[v])
        )
        # only PSD kernels (sigma >= 1) may clamp: negatives there are round-off
        return _clamp(float(d)) if self.sigma >= 1.0 else float(d)

    def distances_sq_to(self, v: int) -> np.ndarray:
        """Delta(x, v) for every vertex x, as one dense vector."""
        d = self.self_affinity + self.self_affinity[v]
        cols, vals = self.graph.row(v)
        d[cols] -= 2.0 * vals * (self._inv_deg[v] * self._inv_deg[cols])
        d[v] = 0.0
        return np.maximum(d, 0.0) if self.sigma >= 1.0 else d

    def min_self_affinity(self) -> tuple[int, float]:
        """Vertex of minimum K(u,u); ties go to the lowest index."""
        u = int(np.argmin(self.self_affinity))
        return u, float(self.self_affinity[u])


def _clamp(d: float) -> float:
    if d < 0.0:
        assert d > -_CLAMP_TOL, f"distance {d} below round-off tolerance"
        return 0.0
    return d


def _rows_of(g: SparseGraph, vertices: np.ndarray):
    """CSR entries of the given rows as flat (row, col, val) arrays."""
    if vertices.shape[0] == g.n:
        return g._row_of_entry(), g.col_idx, g.values
    counts = np.diff(g.row_ptr)[vertices]
    rows = np.repeat(vertices, counts)
    total = int(counts.sum())
    if total == 0:
        return rows, np.empty(0, dtype=np.int64), np.empty(0)
    # flat slice gather: segment start + within-segment offset
    seg_starts = np.repeat(g.row_ptr[vertices], counts)
    run_starts = np.repeat(np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    take = seg_starts + (np.arange(total, dtype=np.int64) - run_starts)
    return rows, g.col_idx[take], g.values[take]


@dataclass(frozen=True)
class ImplicitCenter:
    """A feature-space point sum(alpha_i * phi(x_i)) over a sorted support."""

    support: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if support.size == 0:
            raise GraphError("implicit center needs a nonempty support")
        if support.shape != coeffs.shape:
            raise GraphError("support and coeffs must have equal length")
        if not np.isfinite(coeffs).all():
            raise GraphError("coefficients must be finite")
        if (np.diff(support) <= 0).any():
            order = np.argsort(support, kind="stable")
            support, coeffs = support[order], coeffs[order]
            if (np.diff(support) == 0).any():
                raise GraphError("support indices must be distinct")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def point(cls, v: int) -> "ImplicitCenter":
        return cls(support=np.array([v]), coeffs=np.array([1.0]))


def center_inner(kern: GraphKernel, a: ImplicitCenter, b: ImplicitCenter) -> float:
    """<a, b> = alpha^T K(support_a, support_b) beta via sparse row scans."""
    pos = {int(v): i for i, v in enumerate(b.support)}
    acc = 0.0
    for v, alpha in zip(a.support, a.coeffs):
        cols, kvals = kern.row(int(v))
        for c, kv in zip(cols, kvals):
            j = pos.get(int(c))
            if j is not None:
                acc += alpha * b.coeffs[j] * kv
    return float(acc)


def center_norm_sq(kern: GraphKernel, c: ImplicitCenter) -> float:
    return center_inner(kern, c, c)


def point_center_inner(kern: GraphKernel, u: int, c: ImplicitCenter) -> float:
    """<phi(u), c>, touching only row(u) entries intersected with the support."""
    cols, kvals = kern.row(u)
    idx = np.searchsorted(c.support, cols)
    idx_ok = (idx < c.support.shape[0])
    hit = np.zeros(cols.shape[0], dtype=bool)
    hit[idx_ok] = c.support[idx[idx_ok]] == cols[idx_ok]
    return float(np.dot(kvals[hit], c.coeffs[idx[hit]]))


def distance_to_center(
    kern: GraphKernel, u: int, c: ImplicitCenter, norm_sq: float | None = None
) -> float:
    """Delta(phi(u), c) with the cached ||c||^2 if the caller has one."""
    if norm_sq is None:
        norm_sq = center_norm_sq(kern, c)
    d = float(kern.self_affinity[u]) - 2.0 * point_center_inner(kern, u, c) + norm_sq
    return _clamp(d) if kern.sigma >= 1.0 else d


@dataclass(frozen=True)
class CentroidSet:
    """Cluster centroids of a weighted labelled subset, with cached norms."""

    k: int
    members: list  # per cluster: vertex index array
    member_weights: list  # per cluster: weight array
    total_weights: np.ndarray  # s_j
    norms_sq: np.ndarray  # ||m_j||^2
    provenance: str = "unspecified"

    def center(self, j: int) -> ImplicitCenter:
        return ImplicitCenter(
            support=self.members[j],
            coeffs=self.member_weights[j] / self.total_weights[j],
        )


def centroids(
    kern: GraphKernel,
    vertices: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
    k: int,
    *,
    provenance: str = "unspecified",
) -> CentroidSet:
    """Weighted centroids m_j = sum w(x) phi(x) / s_j for each cluster.

    ||m_j||^2 is accumulated by scanning the kernel rows of the members, so
    the cost is O(sum_{y in pi_j} deg(y)) per cluster and K is never formed.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= k:
        raise GraphError("labels must lie in [0, k)")
    totals = np.zeros(k)
    np.add.at(totals, labels, weights)
    if (totals <= 0).any():
        bad = int(np.flatnonzero(totals <= 0)[0])
        raise GraphError(f"cluster {bad} has no weight")

    g = kern.graph
    inv_deg = kern._inv_deg
    # label lookup over the whole vertex range; -1 marks "not in the subset"
    lab_of = np.full(g.n, -1, dtype=np.int64)
    lab_of[vertices] = labels
    w_of = np.zeros(g.n)
    w_of[vertices] = weights

    norms = np.zeros(k)
    # adjacency part: every stored entry (y, z) with both endpoints in the same
    # cluster contributes w_y w_z A(y,z) / (deg y deg z)
    sub_rows, sub_cols, sub_vals = _rows_of(g, vertices)
    same = lab_of[sub_cols] == lab_of[sub_rows]
    if same.any():
        yy, zz, aa = sub_rows[same], sub_cols[same], sub_vals[same]
        contrib = w_of[yy] * w_of[zz] * aa * inv_deg[yy] * inv_deg[zz]
        np.add.at(norms, lab_of[yy], contrib)
    # sigma part of the diagonal: w_y^2 * sigma / deg_y
    if kern.sigma:
        np.add.at(norms, labels, weights * weights * kern.sigma * inv_deg[vertices])
    norms /= totals * totals

    members = [vertices[labels == j] for j in range(k)]
    member_weights = [weights[labels == j] for j in range(k)]
    return CentroidSet(
        k=k,
        members=members,
        member_weights=member_weights,
        total_weights=totals,
        norms_sq=norms,
        provenance=provenance,
    )


def assign_to_centroids(
    kern: GraphKernel, cs: CentroidSet, *, restrict_to: np.ndarray | None = None
) -> np.ndarray:
    """Nearest-centroid label for every vertex (or a subset), ties to lowest j.

    Vectorised over all stored edges: the cross term <phi(u), m_j> only
    receives contributions from row(u) entries whose endpoint lies in pi_j.
    """
    g = kern.graph
    inv_deg = kern._inv_deg
    n = g.n
    lab_of = np.full(n, -1, dtype=np.int64)
    w_over_s = np.zeros(n)
    for j in range(cs.k):
        lab_of[cs.members[j]] = j
        w_over_s[cs.members[j]] = cs.member_weights[j] / cs.total_weights[j]

    if restrict_to is None:
        targets = np.arange(n, dtype=np.int64)
    else:
        targets = np.asarray(restrict_to, dtype=np.int64)

    # cross[u, j] = <phi(u), m_j>, assembled edge-wise
    cross = np.zeros((targets.shape[0], cs.k))
    pos = np.full(n, -1, dtype=np.int64)
    pos[targets] = np.arange(targets.shape[0])
    t_rows, t_cols, t_vals = _rows_of(g, targets)
    in_set = lab_of[t_cols] >= 0
    if in_set.any():
        uu, vv, aa = t_rows[in_set], t_cols[in_set], t_vals[in_set]
        np.add.at(
            cross,
            (pos[uu], lab_of[vv]),
            aa * inv_deg[uu] * inv_deg[vv] * w_over_s[vv],
        )
    if kern.sigma:
        # diagonal sigma/deg contribution for targets that are members
        m = lab_of[targets] >= 0
        if m.any():
            tu = targets[m]
            cross[pos[tu], lab_of[tu]] += kern.sigma * inv_deg[tu] * w_over_s[tu]

    scores = cs.norms_sq[None, :] - 2.0 * cross
    return np.argmin(scores, axis=1).astype(np.int64)


def cost_points(
    kern: GraphKernel,
    vertices: np.ndarray,
    weights: np.ndarray,
    centers: list[ImplicitCenter],
) -> float:
    """sum_x w(x) * min_c Delta(phi(x), c) over the given weighted subset."""
    if not centers:
        raise GraphError("need at least one center")
    vertices = np.asarray(vertices, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    best = np.full(vertices.shape[0], np.inf)
    for c in centers:
        norm = center_norm_sq(kern, c)
        cross = _cross_terms(kern, vertices, c)
        d = kern.self_affinity[vertices] - 2.0 * cross + norm
        np.minimum(best, d, out=best)
    if kern.sigma >= 1.0:
        np.maximum(best, 0.0, out=best)
    return float(np.dot(weights, best))


def _cross_terms(kern: GraphKernel, vertices: np.ndarray, c: ImplicitCenter) -> np.ndarray:
    """<phi(u), c> for each u in ``vertices`` (vectorised over the support)."""
    g = kern.graph
    inv_deg = kern._inv_deg
    coeff_of = np.zeros(g.n)
    coeff_of[c.support] = c.coeffs
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[vertices] = np.arange(vertices.shape[0])
    out = np.zeros(vertices.shape[0])
    # scan support rows once: entry (s, u) contributes alpha_s K(u, s)
    for s, alpha in zip(c.support, c.coeffs):
        cols, vals = g.row(int(s))
        hit = pos[cols] >= 0
        if hit.any():
            uu = cols[hit]
            out[pos[uu]] += alpha * vals[hit] * inv_deg[uu] * inv_deg[s]
    if kern.sigma:
        inside = pos[c.support] >= 0
        if inside.any():
            ss = c.support[inside]
            out[pos[ss]] += c.coeffs[inside] * kern.sigma * inv_deg[ss]
    return out


def cost_partition(
    kern: GraphKernel,
    vertices: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
    k: int,
) -> float:
    """Partition objective: each point pays its own cluster's centroid.

    Expanded as sum_x w(x) K(x,x) - sum_j s_j ||m_j||^2, which is exact for
    indefinite kernels too (no clamping is involved).
    """
    cs = centroids(kern, vertices, weights, labels, k)
    vertices = np.asarray(vertices, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    total_self = float(np.dot(weights, kern.self_affinity[vertices]))
    return total_self - float(np.dot(cs.total_weights, cs.norms_sq))


def weighted_centroid_identity(
    kern: GraphKernel,
    points: list[ImplicitCenter],
    weights: np.ndarray,
    z: ImplicitCenter,
) -> tuple[float, float]:
    """Both sides of the centroid displacement identity, for test assertions.

    lhs = sum w(x) ||x - z||^2;
    rhs = sum w(x) ||x - c(S)||^2 + (sum w(x)) ||c(S) - z||^2.
    """
    weights = np.asarray(weights, dtype=np.float64)
    total = float(weights.sum())
    if total <= 0:
        raise GraphError("total weight must be positive")
    # centroid as one implicit center over the union support
    support = np.unique(np.concatenate([p.support for p in points]))
    coeff = np.zeros(support.shape[0])
    for w, p in zip(weights, points):
        coeff[np.searchsorted(support, p.support)] += (w / total) * p.coeffs
    c_s = ImplicitCenter(support=support, coeffs=coeff)

    def dist_sq(a: ImplicitCenter, b: ImplicitCenter) -> float:
        return (
            center_norm_sq(kern, a)
            - 2.0 * center_inner(kern, a, b)
            + center_norm_sq(kern, b)
        )

    lhs = float(sum(w * dist_sq(p, z) for w, p in zip(weights, points)))
    spread = float(sum(w * dist_sq(p, c_s) for w, p in zip(weights, points)))
    rhs = spread + total * dist_sq(c_s, z)
    return lhs, rhs
