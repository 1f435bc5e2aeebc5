"""Time series data model, CSV ingestion, feature maps and synthetic generators."""

from .features import AutoregressiveFeatures, FeatureMap, FeatureVector, GdpFeatures, build_features, default_features
from .ingest import CsvSchema, align_climate, load_csv, load_monthly_csv, merge_climate, write_csv
from .synthetic import SyntheticSpec, analytic_sup_bound, gen_synthetic, weakdep_upper_bound
from .timeseries import GDP_COLUMNS, GdpRow, TimeSeries, parse_quarter, quarter_labels

__all__ = [
    "AutoregressiveFeatures",
    "FeatureMap",
    "FeatureVector",
    "GdpFeatures",
    "build_features",
    "default_features",
    "CsvSchema",
    "align_climate",
    "load_csv",
    "load_monthly_csv",
    "merge_climate",
    "write_csv",
    "SyntheticSpec",
    "analytic_sup_bound",
    "gen_synthetic",
    "weakdep_upper_bound",
    "GDP_COLUMNS",
    "GdpRow",
    "TimeSeries",
    "parse_quarter",
    "quarter_labels",
]
