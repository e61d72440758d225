from app.services.analytics.anomalies import (
    FlaggedCluster,
    FlaggedTransaction,
    flag_anomalous_clusters,
    flag_anomalous_transactions,
    flagged_clusters_frame,
    flagged_transactions_frame,
)
from app.services.analytics.distributions import (
    DEFAULT_Q_LIST,
    SizeHistogram,
    SuperclusterStats,
    merge_increase_quantiles,
    nearest_rank,
    size_histogram,
    supercluster_stats,
)
from app.services.analytics.reports import write_csv, write_json
from app.services.analytics.transactions import addressable_output_count, is_nontrivial
from app.services.analytics.windows import WindowSpec, ratio_series, window_counts, window_totals

__all__ = [
    "DEFAULT_Q_LIST",
    "FlaggedCluster",
    "FlaggedTransaction",
    "SizeHistogram",
    "SuperclusterStats",
    "WindowSpec",
    "addressable_output_count",
    "flag_anomalous_clusters",
    "flag_anomalous_transactions",
    "flagged_clusters_frame",
    "flagged_transactions_frame",
    "is_nontrivial",
    "merge_increase_quantiles",
    "nearest_rank",
    "ratio_series",
    "size_histogram",
    "supercluster_stats",
    "window_counts",
    "window_totals",
    "write_csv",
    "write_json",
]
