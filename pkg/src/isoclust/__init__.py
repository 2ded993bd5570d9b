"""Cluster-analysis engine: K-Means, deterministic seeding, ISODATA-style
split/merge with an automatically generated merge factor, and silhouette
validation for gene-expression-style matrices."""

from .datamodel import (AlgoParams, Clustering, DataMatrix, euclidean_distance,
                        make_matrix, recompute_sse)
from .enhanced_init import InitCentroids, init_centroids, shift_nonnegative
from .ingest import (EmptyDataError, ParseError, RawTable, drop_missing_rows,
                     load_matrix, parse_table, write_table, zscore_rows)
from .isodata_agmfi import (OuterState, compute_merge_factor, discard_small,
                            merge_pass, run_agmfi, run_eagmfi, split_pass)
from .kmeans import (KMeansState, assign_points, random_init, run_kmeans,
                     update_centroids)
from .quality import QualityReport, SilhouetteResult, quality_report, silhouette
from .synth import BlobSpec, generate_blobs

__version__ = "0.1.0"

__all__ = [
    "AlgoParams", "BlobSpec", "Clustering", "DataMatrix", "EmptyDataError",
    "InitCentroids", "KMeansState", "OuterState", "ParseError", "QualityReport",
    "RawTable", "SilhouetteResult", "assign_points", "compute_merge_factor",
    "discard_small", "drop_missing_rows", "euclidean_distance", "generate_blobs",
    "init_centroids", "load_matrix", "make_matrix", "merge_pass", "parse_table",
    "quality_report", "random_init", "recompute_sse", "run_agmfi", "run_eagmfi",
    "run_kmeans", "shift_nonnegative", "silhouette", "split_pass",
    "update_centroids", "write_table", "zscore_rows",
]
