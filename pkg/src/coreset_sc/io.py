"""Text file formats: edge lists, label files, MatrixMarket, coreset files."""

from __future__ import annotations

import numpy as np

from .graph import GraphError, SparseGraph, from_coo

__all__ = [
    "LoadError",
    "load_edge_list",
    "save_edge_list",
    "load_labels",
    "save_labels",
    "load_matrix_market",
    "save_coreset",
    "load_coreset",
    "save_coreset_graph",
    "load_coreset_graph",
]


class LoadError(ValueError):
    """Parse failure; message carries the offending line number."""


def load_edge_list(path, *, add_self_loops: bool = False) -> SparseGraph:
    """Read a whitespace-separated "u v [w]" edge list.

    Lines starting with '#' are comments; an optional header "%n <count>"
    pins the vertex count (otherwise max index + 1 is used). Duplicate lines
    sum their weights and the graph is symmetrised. Weights default to 1.
    """
    us, vs, ws = [], [], []
    n_header = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("%n"):
                try:
                    n_header = int(line.split()[1])
                except (IndexError, ValueError):
                    raise LoadError(f"{path}:{lineno}: malformed %n header")
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise LoadError(f"{path}:{lineno}: expected 'u v [w]'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise LoadError(f"{path}:{lineno}: vertex indices must be integers")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise LoadError(f"{path}:{lineno}: malformed weight")
            if u < 0 or v < 0:
                raise LoadError(f"{path}:{lineno}: negative vertex index")
            if not np.isfinite(w) or w < 0:
                raise LoadError(f"{path}:{lineno}: negative or non-finite weight")
            us.append(u)
            vs.append(v)
            ws.append(w)
    if not us and n_header is None:
        raise LoadError(f"{path}: empty edge list and no %n header")
    n = n_header if n_header is not None else max(max(us), max(vs)) + 1
    try:
        return from_coo(
            n,
            np.array(us, dtype=np.int64),
            np.array(vs, dtype=np.int64),
            np.array(ws),
            add_self_loops=add_self_loops,
        )
    except GraphError as exc:
        raise LoadError(f"{path}: {exc}") from exc


def save_edge_list(path, g: SparseGraph) -> None:
    """Write each undirected edge once (u <= v), with '%n' header."""
    rows = g._row_of_entry()
    keep = rows <= g.col_idx
    with open(path, "w") as fh:
        fh.write(f"%n {g.n}\n")
        for u, v, w in zip(rows[keep], g.col_idx[keep], g.values[keep]):
            fh.write(f"{int(u)} {int(v)} {float(w)!r}\n")


def load_labels(path) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise LoadError(f"{path}:{lineno}: labels must be integers")
    return np.array(out, dtype=np.int64)


def save_labels(path, labels: np.ndarray) -> None:
    with open(path, "w") as fh:
        for x in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(x)}\n")


def load_matrix_market(path, *, add_self_loops: bool = False) -> SparseGraph:
    """Read a MatrixMarket coordinate file (symmetric or general).

    Pattern entries get weight 1. The matrix must be square and, for general
    storage, symmetric.
    """
    from scipy.io import mmread

    mat = mmread(path).tocoo()
    if mat.shape[0] != mat.shape[1]:
        raise LoadError(f"{path}: matrix is not square: {mat.shape}")
    data = mat.data if mat.data.size else np.ones(mat.row.shape[0])
    keep = mat.row <= mat.col  # one triangle; from_coo symmetrises
    try:
        return from_coo(
            mat.shape[0],
            mat.row[keep].astype(np.int64),
            mat.col[keep].astype(np.int64),
            np.asarray(data)[keep].astype(np.float64),
            add_self_loops=add_self_loops,
        )
    except GraphError as exc:
        raise LoadError(f"{path}: {exc}") from exc


def save_coreset_graph(graph_path, sidecar_path, ch) -> None:
    """Write a coreset graph as an edge list plus a 'vertex weight' sidecar.

    The sidecar maps coreset positions back to original vertex ids and
    carries the coreset weights, one "orig_vertex weight" line per position.
    """
    save_edge_list(graph_path, ch.graph)
    save_coreset(sidecar_path, ch.vertices, ch.weights)


def load_coreset_graph(graph_path, sidecar_path):
    from .coreset import CoresetGraph  # local: coreset.py is a heavier import

    g = load_edge_list(graph_path)
    vertices, weights = load_coreset(sidecar_path)
    if vertices.shape[0] != g.n:
        raise LoadError(
            f"{sidecar_path}: sidecar has {vertices.shape[0]} rows for a "
            f"{g.n}-vertex graph"
        )
    return CoresetGraph(graph=g, vertices=vertices, weights=weights)


def save_coreset(path, indices: np.ndarray, weights: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v, w in zip(indices, weights):
            fh.write(f"{int(v)} {float(w)!r}\n")


def load_coreset(path) -> tuple[np.ndarray, np.ndarray]:
    idx, wts = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise LoadError(f"{path}:{lineno}: expected 'vertex weight'")
            try:
                idx.append(int(parts[0]))
                wts.append(float(parts[1]))
            except ValueError:
                raise LoadError(f"{path}:{lineno}: malformed coreset line")
    return np.array(idx, dtype=np.int64), np.array(wts)
