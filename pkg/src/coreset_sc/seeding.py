"""Kernel-space D^2-sampling: tree-accelerated and naive reference samplers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError
from .kernel import GraphKernel
from .rng import make_rng
from .tree import SamplingTree

__all__ = ["SeedingResult", "fast_d2_sample", "naive_d2_sample"]


@dataclass
class SeedingResult:
    """Centers in insertion order plus per-step cost trace and counters."""

    centers: np.ndarray
    cost_trace: np.ndarray
    k: int
    seed: object
    x_star: int | None = None
    early_stop: bool = False
    neighbour_checks: int = 0
    wall_time_s: float = 0.0
    final_deltas: np.ndarray | None = field(default=None, repr=False)

    @property
    def final_cost(self) -> float:
        return float(self.cost_trace[-1])


def fast_d2_sample(kern: GraphKernel, k: int, seed) -> SeedingResult:
    """Tree-based D^2-sampling over the whole vertex set.

    Seeds with the minimum-self-affinity point x* and one uniform draw, then
    draws k more points proportional to w(x) * Delta(x, C), repairing the
    tree after every insertion. Work per insertion is O((deg + 1) log n).
    """
    n = kern.n
    if k < 1:
        raise GraphError("k must be at least 1")
    if n < k:
        raise GraphError("need at least k points")
    t0 = time.perf_counter()
    x_star, c_star = kern.min_self_affinity()
    tree = SamplingTree(kern, c_star)
    rng = make_rng(seed)
    x0 = int(rng.integers(n))

    centers: list[int] = []
    trace: list[float] = []

    def insert(v: int) -> None:
        if v not in seen:
            seen.add(v)
            centers.append(v)
        tree.repair(v)
        trace.append(tree.root_contribution)

    seen: set[int] = set()
    insert(x_star)
    insert(x0)
    early = False
    for _ in range(k):
        if tree.root_contribution <= 0.0:
            early = True
            break
        insert(tree.sample(rng))

    return SeedingResult(
        centers=np.array(centers, dtype=np.int64),
        cost_trace=np.array(trace),
        k=k,
        seed=seed,
        x_star=x_star,
        early_stop=early,
        neighbour_checks=tree.neighbour_checks,
        wall_time_s=time.perf_counter() - t0,
        final_deltas=tree.leaf_deltas(),
    )


def naive_d2_sample(
    kern: GraphKernel,
    k: int,
    seed,
    *,
    support: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    include_min_affinity: bool = False,
) -> SeedingResult:
    """Reference D^2-sampling keeping a dense Delta array (O(size * k) work).

    Operates on a weighted subset when ``support``/``weights`` are given
    (defaults: all vertices, w = deg). ``include_min_affinity`` mirrors the
    fast sampler's seeding (x* plus a uniform draw, then k proportional
    draws); otherwise the classic form runs one uniform draw then k - 1
    proportional draws.
    """
    if k < 1:
        raise GraphError("k must be at least 1")
    g = kern.graph
    if support is None:
        support = np.arange(g.n, dtype=np.int64)
    else:
        support = np.asarray(support, dtype=np.int64)
    if weights is None:
        weights = kern.weights[support]
    else:
        weights = np.asarray(weights, dtype=np.float64)
    size = support.shape[0]
    if size < 1 or size < k:
        raise GraphError("need at least k points in the support")

    t0 = time.perf_counter()
    rng = make_rng(seed)
    saff = kern.self_affinity
    inv_deg = kern._inv_deg
    saff_sub = saff[support]
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[support] = np.arange(size)

    delta = np.full(size, np.inf)
    centers: list[int] = []
    trace: list[float] = []
    seen: set[int] = set()
    checks = 0

    def insert(c: int) -> None:
        nonlocal checks
        cand = saff_sub + saff[c]
        cols, vals = g.row(c)
        keep = cols != c
        cols, vals = cols[keep], vals[keep]
        sel = pos[cols] >= 0
        if sel.any():
            cc, vv = cols[sel], vals[sel]
            cand[pos[cc]] -= 2.0 * vv * (inv_deg[c] * inv_deg[cc])
        if kern.sigma >= 1.0:
            np.maximum(cand, 0.0, out=cand)
        np.minimum(delta, cand, out=delta)
        j = pos[c]
        if j >= 0:
            delta[j] = 0.0
        checks += size
        if c not in seen:
            seen.add(c)
            centers.append(c)
        trace.append(float(np.dot(weights, delta)))

    def draw_proportional() -> int:
        cum = np.cumsum(weights * delta)
        total = cum[-1]
        if total <= 0.0:
            raise GraphError("all points covered")
        u = rng.random()
        j = int(np.searchsorted(cum, u * total, side="right"))
        return int(support[min(j, size - 1)])

    early = False
    if include_min_affinity:
        x_star = int(support[np.argmin(saff_sub)])
        # pre-insertion deltas mirror the tree initialisation
        delta = saff_sub + saff[x_star]
        insert(x_star)
        insert(int(support[rng.integers(size)]))
        remaining = k
    else:
        x_star = None
        insert(int(support[rng.integers(size)]))
        remaining = k - 1
    for _ in range(remaining):
        if float(np.dot(weights, delta)) <= 0.0:
            early = True
            break
        insert(draw_proportional())

    return SeedingResult(
        centers=np.array(centers, dtype=np.int64),
        cost_trace=np.array(trace),
        k=k,
        seed=seed,
        x_star=x_star,
        early_stop=early,
        neighbour_checks=checks,
        wall_time_s=time.perf_counter() - t0,
        final_deltas=delta.copy(),
    )
