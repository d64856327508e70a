"""Coreset spectral clustering toolkit for sparse graphs.

Builds small weighted coresets for the kernel k-means problem equivalent to
normalised cut, clusters the coreset graph spectrally, and transfers the
labelling back to the full graph.
"""

from .coreset import (
    Coreset,
    CoresetGraph,
    build_coreset_graph,
    construct_coreset,
    identity_coreset,
    importance_sample,
)
from .clustering import (
    CscReport,
    coreset_kernel_kmeans,
    csc,
    label_full_graph,
    spectral_cluster_dense,
    spectral_cluster_fast,
)
from .generate import generate_sbm, knn_graph
from .graph import (
    GraphError,
    PartitionStats,
    SparseGraph,
    conductance,
    from_coo,
    from_csr,
    ncut_average,
    partition_stats,
)
from .io import (
    LoadError,
    load_coreset,
    load_edge_list,
    load_labels,
    load_coreset_graph,
    load_matrix_market,
    save_coreset,
    save_coreset_graph,
    save_edge_list,
    save_labels,
)
from .kernel import (
    CentroidSet,
    GraphKernel,
    ImplicitCenter,
    centroids,
    cost_partition,
    cost_points,
    distance_to_center,
    weighted_centroid_identity,
)
from .metrics import EvalRecord, ari, evaluate, ncut_trace
from .rng import make_rng
from .seeding import SeedingResult, fast_d2_sample, naive_d2_sample
from .tree import SamplingTree

__version__ = "0.1.0"

__all__ = [
    "Coreset",
    "CoresetGraph",
    "CentroidSet",
    "CscReport",
    "EvalRecord",
    "GraphError",
    "GraphKernel",
    "ImplicitCenter",
    "LoadError",
    "PartitionStats",
    "SamplingTree",
    "SeedingResult",
    "SparseGraph",
    "ari",
    "build_coreset_graph",
    "centroids",
    "conductance",
    "construct_coreset",
    "coreset_kernel_kmeans",
    "cost_partition",
    "cost_points",
    "csc",
    "distance_to_center",
    "evaluate",
    "fast_d2_sample",
    "from_coo",
    "from_csr",
    "generate_sbm",
    "identity_coreset",
    "importance_sample",
    "knn_graph",
    "label_full_graph",
    "load_coreset",
    "load_coreset_graph",
    "load_edge_list",
    "load_labels",
    "load_matrix_market",
    "make_rng",
    "naive_d2_sample",
    "ncut_average",
    "ncut_trace",
    "partition_stats",
    "save_coreset",
    "save_coreset_graph",
    "save_edge_list",
    "save_labels",
    "spectral_cluster_dense",
    "spectral_cluster_fast",
    "weighted_centroid_identity",
]
