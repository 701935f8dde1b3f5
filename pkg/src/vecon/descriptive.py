"""Per-item summary statistics and volume aggregates."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import KOutOfRange, NonPositiveValue, SeriesTooShort
from .model import BondQuote, PriceSeries, VolumeRecord
from .transforms import pct_returns, to_real_value

STATS_HEADER = ("item_id", "mean_price", "std_price", "cov", "mean_daily_pct_change", "log_mean_price")


@dataclass(frozen=True)
class DescriptiveStats:
    item_id: int
    mean_price: float
    std_price: float
    cov: float
    mean_daily_pct_change: float
    log_mean_price: float


def describe(series: PriceSeries) -> DescriptiveStats:
    """Mean, population standard deviation, coefficient of variation,
    mean daily percentage change and log of the mean price.

    The standard deviation uses divisor ``n``: the window is the whole
    population being summarised.
    """
    prices = series.values
    if prices.shape[0] < 2:
        raise SeriesTooShort(f"item {series.item_id}: need at least 2 observations")
    if np.any(prices <= 0):
        raise NonPositiveValue(f"item {series.item_id}: prices must be positive")
    mean = float(prices.mean())
    # deviations from the exact integer minimum keep a constant series at exactly 0
    std = float(np.std(prices - prices.min()))
    returns = pct_returns(prices)
    return DescriptiveStats(
        item_id=series.item_id,
        mean_price=mean,
        std_price=std,
        cov=std / mean,
        mean_daily_pct_change=float(returns.mean()),
        log_mean_price=math.log(mean),
    )


def describe_all(series_set: Iterable[PriceSeries]) -> list:
    return [describe(s) for s in series_set]


def volume_share(volumes: Sequence[VolumeRecord], k: int) -> float:
    """Fraction of total volume carried by the ``k`` most traded items."""
    n = len(volumes)
    if not isinstance(k, int) or not 1 <= k <= n:
        raise KOutOfRange(f"k must be in [1, {n}], got {k!r}")
    ranked = sorted((v.volume for v in volumes), reverse=True)
    return sum(ranked[:k]) / sum(ranked)


def traded_value(mean_price, volume: int, quote: BondQuote) -> Decimal:
    """Real-currency value of ``volume`` units traded at ``mean_price`` coins each."""
    if volume < 0:
        raise ValueError(f"volume must be non-negative, got {volume}")
    return to_real_value(mean_price, quote) * int(volume)


def write_stats_csv(stats: Iterable[DescriptiveStats], out) -> None:
    """Write stats to a path or an open text stream, 12 significant digits."""
    if hasattr(out, "write"):
        _write_stats(stats, out)
    else:
        with open(out, "w", newline="") as fh:
            _write_stats(stats, fh)


def _write_stats(stats, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(STATS_HEADER)
    for s in sorted(stats, key=lambda s: s.item_id):
        writer.writerow([s.item_id] + [format(getattr(s, col), ".12g") for col in STATS_HEADER[1:]])
