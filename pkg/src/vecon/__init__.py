"""Monitoring toolkit for virtual-goods exchanges.

Price and volume ingestion, real-value conversion, descriptive statistics,
quartile and volume-weighted price indexes, inflation, augmented
Dickey-Fuller tests and smoothed 2-D densities.
"""
from .descriptive import DescriptiveStats, describe, traded_value, volume_share
from .errors import VeconError
from .heatmap import HeatmapGrid, export_grid, gaussian_blur, histogram2d
from .indexes import IndexSeries, Partition, build_sum_index, build_weighted_index, inflation_rate, partition_quartiles
from .ingest import (
    ExclusionReport,
    FetchPolicy,
    align_window,
    fetch_documents,
    filter_static,
    load_snapshot,
    parse_item_document,
    parse_volume_table,
    save_snapshot,
)
from .kernels import BACKEND
from .model import AnalysisWindow, BondQuote, PriceSeries, Snapshot, VolumeRecord
from .report import Config, HealthReport, run_report
from .stationarity import AdfResult, OlsFit, adf_max_lag, adf_test, mackinnon_pvalue, ols
from .transforms import first_difference, log_series, pct_returns, to_real_value

__version__ = "0.1.0"
