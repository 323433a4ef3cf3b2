"""Spectral clustering through commute-time embeddings.

The scalable pipeline embeds a similarity graph by random projection plus
Laplacian solves, so that squared distances in the embedding approximate
commute times, then clusters with k-means. Exact eigenvector pipelines
(spectral clustering and the exact commute embedding) ship alongside as
references.
"""

from ._accel import BACKEND
from .data import (
    EdgeList,
    FeatureMatrix,
    load_edge_list,
    load_features,
    standardize,
    synth_shapes,
    write_edge_list,
)
from .embedding import (
    Embedding,
    ProjectionMatrix,
    SolverReport,
    approx_commute,
    build_embedding,
    laplacian_solve,
    sample_projection,
)
from .errors import (
    CtclusterError,
    DataFormatError,
    DegenerateDataError,
    GraphDisconnectedError,
    SolverError,
)
from .evaluation import RunReport, hungarian_accuracy
from .exact import (
    EigenPair,
    commute_matrix,
    commute_pinv,
    exact_commute_embedding,
    hitting_times,
    spectral_cluster_exact,
    spectral_embedding,
)
from .graph import (
    IncidenceFactor,
    SimilarityGraph,
    build_graph,
    edge_graph,
    incidence_factorization,
    laplacian,
    largest_component,
    normalized_laplacian,
    to_edge_list,
)
from .kmeans import ClusterAssignment, KMeansConfig, kmeans_cluster, plusplus_init

__version__ = "0.1.0"
