"""Correlation-network analysis toolkit.

Builds filtered graphs (minimum spanning tree, planar maximally filtered
graph) from weighted correlation matrices, clusters assets by the directed
bubble hierarchy of the planar graph, and tracks how the cluster structure
of a rolling window evolves over time.
"""

__version__ = "0.1.0"

from .compare import (
    adjusted_rand_index,
    contingency_table,
    hypergeometric_pvalue,
    match_similar_clusters,
)
from .dbht import (
    BubbleTree,
    Clustering,
    DirectedBubbleTree,
    assign_clusters,
    dbht_cluster,
    decompose_bubbles,
    direct_bubble_tree,
)
from .estimator import (
    correlation_to_distance,
    detrend_market_mode,
    exponential_weights,
    metacorrelation,
    weighted_correlation,
)
from .filtergraph import FilteredGraph, build_mst, build_pmfg, is_planar
from .ingest import (
    BlockModelSpec,
    PricePanel,
    ReturnsPanel,
    SectorTable,
    compute_log_returns,
    generate_synthetic_panel,
    load_price_panel,
    load_sector_table,
)
from .pipeline import (
    clustering_similarity_matrix,
    icb_similarity_series,
    make_windows,
    metacorrelation_matrix,
    persistence_series,
    run_rolling,
    track_cluster_evolution,
)

__all__ = [
    "BlockModelSpec",
    "BubbleTree",
    "Clustering",
    "DirectedBubbleTree",
    "FilteredGraph",
    "PricePanel",
    "ReturnsPanel",
    "SectorTable",
    "adjusted_rand_index",
    "assign_clusters",
    "build_mst",
    "build_pmfg",
    "clustering_similarity_matrix",
    "compute_log_returns",
    "contingency_table",
    "correlation_to_distance",
    "dbht_cluster",
    "decompose_bubbles",
    "detrend_market_mode",
    "direct_bubble_tree",
    "exponential_weights",
    "generate_synthetic_panel",
    "hypergeometric_pvalue",
    "icb_similarity_series",
    "is_planar",
    "load_price_panel",
    "load_sector_table",
    "make_windows",
    "match_similar_clusters",
    "metacorrelation",
    "metacorrelation_matrix",
    "persistence_series",
    "run_rolling",
    "track_cluster_evolution",
    "weighted_correlation",
]
