"""Seeded synthetic exchange economies for tests, benchmarks and demos."""
from __future__ import annotations

import datetime as dt
import json
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .indexes import QUARTILE_LABELS
from .ingest import EPOCH, MS_PER_DAY, format_volume_table
from .model import AnalysisWindow, BondQuote, PriceSeries, Snapshot, VolumeRecord

# price bands per bracket, in coins; disjoint so the mean-price ranking
# reproduces the intended brackets
BANDS = {
    "lower": (1_000, 3_000),
    "lower-mid": (10_000, 30_000),
    "upper-mid": (100_000, 300_000),
    "upper": (1_000_000, 3_000_000),
}
DEFAULT_START = dt.date(2018, 6, 13)


def drift_factor(target_inflation_pct: float) -> float:
    """End/start ratio giving ``target`` percent under the end-point convention."""
    return 1.0 / (1.0 - target_inflation_pct / 100.0)


def make_economy(
    n_items: int = 400,
    days: int = 180,
    seed: int = 0,
    drift: Optional[Mapping[str, float]] = None,
    noise: float = 0.01,
    walk_sigma: float = 0.005,
    n_static: int = 0,
    n_volume: int = 100,
    start_day: dt.date = DEFAULT_START,
    bond: Optional[BondQuote] = None,
) -> Snapshot:
    """Build a snapshot of ``n_items`` moving series plus ``n_static`` constant ones.

    Moving items are split evenly across the four price bands (lowest bands
    take the remainder). ``drift`` maps a bracket label to the window
    inflation, in percent under the end-point convention, that every member
    of the bracket is ramped to. Each day adds a geometric random-walk step
    of scale ``walk_sigma`` and independent uniform noise of +-``noise``.
    """
    rng = np.random.default_rng(seed)
    drift = dict(drift or {})
    unknown = set(drift) - set(QUARTILE_LABELS)
    if unknown:
        raise ValueError(f"unknown brackets in drift: {sorted(unknown)}")
    q, r = divmod(n_items, 4)
    series = []
    item_id = 1
    t = np.arange(days) / (days - 1)
    for g, label in enumerate(QUARTILE_LABELS):
        size = q + (1 if g < r else 0)
        lo, hi = BANDS[label]
        ramp = 1.0 + (drift_factor(drift[label]) - 1.0) * t if label in drift else np.ones(days)
        base = np.exp(rng.uniform(np.log(lo), np.log(hi), size))
        steps = rng.normal(0.0, walk_sigma, (size, days))
        steps[:, 0] = 0.0
        walk = np.exp(np.cumsum(steps, axis=1))
        jitter = 1.0 + rng.uniform(-noise, noise, (size, days))
        prices = np.maximum(1, np.rint(base[:, None] * walk * jitter * ramp[None, :])).astype(np.int64)
        for row in prices:
            if row.max() == row.min():
                row[-1] += 1
            series.append(PriceSeries.contiguous(item_id, row.tolist()))
            item_id += 1
    for _ in range(n_static):
        series.append(PriceSeries.contiguous(item_id, [int(rng.integers(1, 10_000_000))] * days))
        item_id += 1

    volumes = None
    if n_volume:
        moving_ids = np.arange(1, n_items + 1)
        chosen = rng.choice(moving_ids, size=min(n_volume, n_items), replace=False)
        raw = (rng.pareto(1.2, chosen.size) + 1.0) * 50_000
        volumes = tuple(VolumeRecord(int(i), int(v)) for i, v in zip(chosen, np.rint(raw)))
    return Snapshot(AnalysisWindow(start_day, days), tuple(series), volumes, bond)


def write_fixture_dir(snapshot: Snapshot, directory) -> Path:
    """Write ``item_<id>.json`` documents (and ``volumes.csv``) in the exchange format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    base_ms = (snapshot.window.start_day - EPOCH).days * MS_PER_DAY
    for s in snapshot.series:
        daily = {str(base_ms + d * MS_PER_DAY): p for d, p in zip(s.days, s.prices)}
        doc = {"daily": daily, "average": {}}
        (directory / f"item_{s.item_id}.json").write_text(json.dumps(doc), encoding="utf-8")
    if snapshot.volumes is not None:
        (directory / "volumes.csv").write_text(format_volume_table(snapshot.volumes), encoding="utf-8")
    return directory


def ar1(phi: float, n: int, seed: int, sigma: float = 1.0) -> np.ndarray:
    """AR(1) path ``y_t = phi * y_{t-1} + e_t`` seeded with the first shock."""
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, sigma, n)
    y = np.empty(n)
    y[0] = e[0]
    for i in range(1, n):
        y[i] = phi * y[i - 1] + e[i]
    return y


def random_walk(n: int, seed: int, sigma: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.normal(0.0, sigma, n))
