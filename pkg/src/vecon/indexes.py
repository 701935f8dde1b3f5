"""Quartile partitions, summed and volume-weighted price indexes, inflation."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    EmptyMembership,
    NonPositiveVolume,
    SeriesTooShort,
    TooFewItems,
    UnknownMember,
    ZeroEndValue,
)
from .model import Snapshot, VolumeRecord

QUARTILE_LABELS = ("lower", "lower-mid", "upper-mid", "upper")
QUARTILE_SCHEME = "quartile-by-mean-price"
INFLATION_DENOMINATOR = "end"


@dataclass(frozen=True)
class Partition:
    scheme: str
    groups: tuple  # 4 tuples of item_id, lowest bracket first

    def as_dict(self) -> dict:
        return dict(zip(QUARTILE_LABELS, self.groups))


@dataclass(frozen=True)
class IndexSeries:
    label: str
    values: tuple  # exact integers
    membership: tuple
    weighting: str  # "unit" or "volume"

    def __len__(self) -> int:
        return len(self.values)


def partition_quartiles(stats: Sequence) -> Partition:
    """Split items into four contiguous brackets by mean price.

    Ties in mean price are broken by item_id. With ``4q + r`` items the
    lowest ``r`` brackets get ``q + 1`` members.
    """
    n = len(stats)
    if n < 4:
        raise TooFewItems(f"quartile partition needs at least 4 items, got {n}")
    ranked = [s.item_id for s in sorted(stats, key=lambda s: (s.mean_price, s.item_id))]
    q, r = divmod(n, 4)
    groups, start = [], 0
    for g in range(4):
        size = q + (1 if g < r else 0)
        groups.append(tuple(ranked[start:start + size]))
        start += size
    return Partition(QUARTILE_SCHEME, tuple(groups))


def _check_members(snapshot: Snapshot, ids: Iterable[int]) -> list:
    ids = list(ids)
    if not ids:
        raise EmptyMembership("index membership is empty")
    missing = sorted(i for i in ids if i not in snapshot)
    if missing:
        raise UnknownMember(f"items not in snapshot: {missing[:10]}")
    return ids


def build_sum_index(snapshot: Snapshot, membership: Iterable[int], label: str) -> IndexSeries:
    """Unweighted index: the sum of member prices on each day."""
    ids = _check_members(snapshot, membership)
    totals = snapshot.price_matrix(ids).sum(axis=0)
    return IndexSeries(label, tuple(int(v) for v in totals), tuple(sorted(ids)), "unit")


def build_weighted_index(snapshot: Snapshot, volumes: Sequence[VolumeRecord], label: str) -> IndexSeries:
    """Volume-weighted index over the items in ``volumes``.

    Summed in Python integers: volume times price overflows int64 for the
    most traded items.
    """
    if not volumes:
        raise EmptyMembership("volume table is empty")
    for v in volumes:
        if v.volume < 1:
            raise NonPositiveVolume(f"item {v.item_id}: volume {v.volume}")
    ids = _check_members(snapshot, (v.item_id for v in volumes))
    days = snapshot.window.length_days
    totals = [0] * days
    for v in sorted(volumes, key=lambda v: v.item_id):
        prices = snapshot.get(v.item_id).prices
        w = v.volume
        for t in range(days):
            totals[t] += w * prices[t]
    return IndexSeries(label, tuple(totals), tuple(sorted(ids)), "volume")


def inflation_rate(index) -> float:
    """Percentage change over the window, relative to the END value.

    ``100 * (last - first) / last``. The end-point denominator is
    deliberate and is recorded in every report that prints this figure.
    """
    values = index.values if isinstance(index, IndexSeries) else index
    if len(values) < 2:
        raise SeriesTooShort("inflation needs at least 2 index values")
    first, last = _as_fraction(values[0]), _as_fraction(values[-1])
    if last == 0:
        raise ZeroEndValue("index end value is zero")
    return float(100 * (last - first) / last)


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(int(x)) if not isinstance(x, Fraction) else x


def write_index_csv(index: IndexSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("day_index", "value"))
        for t, v in enumerate(index.values):
            writer.writerow((t, v))


def index_filename(label: str) -> str:
    return "index_" + label.replace(" ", "_") + ".csv"


def write_index_manifest(indexes: Sequence[IndexSeries], path) -> list:
    entries = []
    for ix in indexes:
        entries.append(
            {
                "label": ix.label,
                "file": index_filename(ix.label),
                "weighting": ix.weighting,
                "members": len(ix.membership),
                "inflation_pct": inflation_rate(ix),
                "inflation_denominator": INFLATION_DENOMINATOR,
            }
        )
    Path(path).write_text(json.dumps({"indexes": entries}, indent=2, sort_keys=True) + "\n")
    return entries
