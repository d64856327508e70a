"""Sparse symmetric graphs in CSR form plus cut/volume/conductance primitives."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphError",
    "SparseGraph",
    "PartitionStats",
    "from_coo",
    "from_csr",
    "conductance",
    "partition_stats",
    "ncut_average",
]


class GraphError(ValueError):
    """Raised for invalid graphs, subsets, or partitions."""


@dataclass(frozen=True)
class SparseGraph:
    """Symmetric weighted adjacency stored in CSR.

    Both (u, v) and (v, u) are stored; column indices are strictly increasing
    within each row and edge weights are nonnegative. Every vertex must have
    positive degree (the inverse degree matrix is used throughout). Instances
    are immutable and safe to share across threads.
    """

    n: int
    row_ptr: np.ndarray  # uint64-compatible offsets, length n+1
    col_idx: np.ndarray  # int64 neighbour indices, length nnz
    values: np.ndarray  # float64 edge weights, length nnz
    degrees: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.degrees is None:
            rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))
            deg = np.bincount(rows, weights=self.values, minlength=self.n)
            object.__setattr__(self, "degrees", deg)
        for arr in (self.row_ptr, self.col_idx, self.values, self.degrees):
            try:
                arr.flags.writeable = False
            except ValueError:
                pass  # view of an already-locked buffer

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    @property
    def num_edges(self) -> int:
        """Undirected edge count: off-diagonal pairs once, self-loops once."""
        loops = int(np.count_nonzero(self.col_idx == self._row_of_entry()))
        return (self.nnz - loops) // 2 + loops

    @property
    def d_avg(self) -> float:
        """Average number of stored entries per row."""
        return self.nnz / self.n

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = int(self.row_ptr[u]), int(self.row_ptr[u + 1])
        return self.col_idx[lo:hi], self.values[lo:hi]

    def weight(self, u: int, v: int) -> float:
        cols, vals = self.row(u)
        j = np.searchsorted(cols, v)
        if j < cols.shape[0] and cols[j] == v:
            return float(vals[j])
        return 0.0

    def _row_of_entry(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.row_ptr.tobytes())
        h.update(self.col_idx.tobytes())
        h.update(self.values.tobytes())
        return h.hexdigest()[:16]

    def volume(self, s: np.ndarray) -> float:
        return float(self.degrees[s].sum())

    def total_volume(self) -> float:
        return float(self.degrees.sum())


def from_coo(
    n: int,
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    *,
    symmetrise: bool = True,
    add_self_loops: bool = False,
) -> SparseGraph:
    """Build a SparseGraph from COO entries.

    Duplicate (u, v) entries sum their weights. With ``symmetrise`` each input
    entry contributes to both directions (self-loops once). Vertices that end
    up with zero degree raise GraphError unless ``add_self_loops`` is set, in
    which case they receive a unit self-loop.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    if u.shape != v.shape or u.shape != w.shape:
        raise GraphError("COO arrays must have equal length")
    if n <= 0:
        raise GraphError("graph must have at least one vertex")
    if u.size and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
        raise GraphError("vertex index out of range")
    if w.size and (not np.isfinite(w).all() or w.min() < 0):
        raise GraphError("edge weights must be finite and nonnegative")
    return _from_coo_plain(n, u, v, w, symmetrise=symmetrise, add_self_loops=add_self_loops)


def _from_coo_plain(n, u, v, w, *, symmetrise, add_self_loops):
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    if symmetrise:
        off = u != v
        uu = np.concatenate([u, v[off]])
        vv = np.concatenate([v, u[off]])
        ww = np.concatenate([w, w[off]])
    else:
        uu, vv, ww = u, v, w

    order = np.lexsort((vv, uu))
    uu, vv, ww = uu[order], vv[order], ww[order]
    if uu.size:
        keep = np.empty(uu.shape, dtype=bool)
        keep[0] = True
        keep[1:] = (uu[1:] != uu[:-1]) | (vv[1:] != vv[:-1])
        group = np.cumsum(keep) - 1
        sums = np.zeros(int(group[-1]) + 1)
        np.add.at(sums, group, ww)
        uu, vv, ww = uu[keep], vv[keep], sums
    if not symmetrise and uu.size:
        _check_symmetric(n, uu, vv, ww)

    counts = np.bincount(uu, minlength=n).astype(np.int64)
    deg = np.zeros(n)
    np.add.at(deg, uu, ww)
    dead = deg <= 0.0
    if dead.any():
        if not add_self_loops:
            bad = int(np.flatnonzero(dead)[0])
            raise GraphError(f"vertex {bad} has zero degree (pass add_self_loops to patch)")
        extra = np.flatnonzero(dead).astype(np.int64)
        uu = np.concatenate([uu, extra])
        vv = np.concatenate([vv, extra])
        ww = np.concatenate([ww, np.ones(extra.shape[0])])
        order = np.lexsort((vv, uu))
        uu, vv, ww = uu[order], vv[order], ww[order]
        counts = np.bincount(uu, minlength=n).astype(np.int64)

    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return SparseGraph(n=n, row_ptr=row_ptr, col_idx=vv, values=ww)


def from_csr(n: int, row_ptr, col_idx, values) -> SparseGraph:
    """Validate raw CSR arrays and wrap them in a SparseGraph.

    This is the boundary used by external callers handing us prebuilt arrays:
    every invariant is checked and violations raise GraphError naming the
    offending entry.
    """
    row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
    col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if n <= 0:
        raise GraphError("graph must have at least one vertex")
    if row_ptr.shape[0] != n + 1:
        raise GraphError(f"row_ptr must have length n+1 = {n + 1}, got {row_ptr.shape[0]}")
    if row_ptr[0] != 0 or (np.diff(row_ptr) < 0).any() or row_ptr[-1] != col_idx.shape[0]:
        raise GraphError("row_ptr must be nondecreasing from 0 to nnz")
    if col_idx.shape != values.shape:
        raise GraphError("col_idx and values must have equal length")
    if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= n):
        bad = int(np.flatnonzero((col_idx < 0) | (col_idx >= n))[0])
        raise GraphError(f"column index out of range at entry {bad}: {int(col_idx[bad])}")
    if values.size and (not np.isfinite(values).all() or values.min() < 0):
        bad = int(np.flatnonzero(~np.isfinite(values) | (values < 0))[0])
        raise GraphError(f"invalid edge weight at entry {bad}: {values[bad]}")
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(row_ptr))
    same_row = rows[1:] == rows[:-1]
    if same_row.size and (col_idx[1:][same_row] <= col_idx[:-1][same_row]).any():
        j = int(np.flatnonzero(same_row & (col_idx[1:] <= col_idx[:-1]))[0])
        raise GraphError(
            f"row {int(rows[j])}: column indices must be strictly increasing "
            f"(entries {int(col_idx[j])}, {int(col_idx[j + 1])})"
        )
    g = SparseGraph(n=n, row_ptr=row_ptr, col_idx=col_idx, values=values)
    dead = g.degrees <= 0
    if dead.any():
        raise GraphError(f"vertex {int(np.flatnonzero(dead)[0])} has zero degree")
    # symmetry: transpose must reproduce the same triple exactly
    order_t = np.lexsort((rows, col_idx))
    if not (
        np.array_equal(rows, col_idx[order_t])
        and np.array_equal(col_idx, rows[order_t])
        and np.array_equal(values, values[order_t])
    ):
        for a, b, c in zip(rows, col_idx, values):
            if g.weight(int(b), int(a)) != float(c):
                raise GraphError(
                    f"asymmetric entry ({int(a)}, {int(b)}): weight {float(c)} "
                    f"but reverse is {g.weight(int(b), int(a))}"
                )
        raise GraphError("adjacency is not symmetric")
    return g


def _check_symmetric(n, uu, vv, ww):
    order_t = np.lexsort((uu, vv))
    if not (
        np.array_equal(uu, vv[order_t])
        and np.array_equal(vv, uu[order_t])
        and np.array_equal(ww, ww[order_t])
    ):
        # find a concrete offender for the error message
        fwd = {(int(a), int(b)): float(c) for a, b, c in zip(uu, vv, ww)}
        for (a, b), c in fwd.items():
            if fwd.get((b, a)) != c:
                raise GraphError(f"asymmetric entry ({a}, {b}): {c} vs {fwd.get((b, a))}")
        raise GraphError("adjacency is not symmetric")


@dataclass(frozen=True)
class PartitionStats:
    """Per-cluster cut weights and volumes for a k-partition."""

    cut_weights: np.ndarray
    volumes: np.ndarray
    k: int

    @property
    def conductances(self) -> np.ndarray:
        return self.cut_weights / self.volumes


def _subset_mask(g: SparseGraph, s) -> np.ndarray:
    s = np.asarray(s)
    if s.dtype == bool:
        if s.shape[0] != g.n:
            raise GraphError("boolean subset mask has wrong length")
        return s
    mask = np.zeros(g.n, dtype=bool)
    mask[s.astype(np.int64)] = True
    return mask


def conductance(g: SparseGraph, s) -> float:
    """Cut weight leaving ``s`` divided by vol(s).

    ``s`` is an index array or boolean mask; it must be a nonempty proper
    subset of the vertex set.
    """
    mask = _subset_mask(g, s)
    size = int(mask.sum())
    if size == 0 or size == g.n:
        raise GraphError("conductance needs a nonempty proper vertex subset")
    vol = float(g.degrees[mask].sum())
    if vol <= 0:
        raise GraphError("subset has zero volume")
    rows = g._row_of_entry()
    crossing = mask[rows] & ~mask[g.col_idx]
    cut = float(g.values[crossing].sum())
    return cut / vol


def partition_stats(g: SparseGraph, labels: np.ndarray, k: int) -> PartitionStats:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != g.n:
        raise GraphError("labels length must equal vertex count")
    if labels.min() < 0 or labels.max() >= k:
        raise GraphError("labels must lie in [0, k)")
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise GraphError(f"cluster {int(empty[0])} is empty")
    volumes = np.zeros(k)
    np.add.at(volumes, labels, g.degrees)
    rows = g._row_of_entry()
    crossing = labels[rows] != labels[g.col_idx]
    cuts = np.zeros(k)
    np.add.at(cuts, labels[rows[crossing]], g.values[crossing])
    return PartitionStats(cut_weights=cuts, volumes=volumes, k=k)


def ncut_average(g: SparseGraph, labels: np.ndarray, k: int) -> float:
    """Average conductance over the k clusters of ``labels``."""
    stats = partition_stats(g, labels, k)
    if (stats.volumes <= 0).any():
        bad = int(np.flatnonzero(stats.volumes <= 0)[0])
        raise GraphError(f"cluster {bad} has zero volume")
    return float(np.mean(stats.conductances))
