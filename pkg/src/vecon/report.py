"""Composite health report: filtering, statistics, indexes, inflation, ADF, alerts."""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import heatmap as hm
from .descriptive import describe_all, traded_value, volume_share, write_stats_csv
from .errors import DegenerateSeries, EmptySnapshot, InvalidValue, TooFewObservations
from .indexes import (
    INFLATION_DENOMINATOR,
    QUARTILE_LABELS,
    QUARTILE_SCHEME,
    IndexSeries,
    build_sum_index,
    build_weighted_index,
    index_filename,
    inflation_rate,
    partition_quartiles,
    write_index_csv,
    write_index_manifest,
)
from .ingest import FetchPolicy, ExclusionReport, filter_static, ingest, is_remote, load_snapshot, resolve_source
from .model import AnalysisWindow, BondQuote, Snapshot
from .stationarity import LEVEL_KEYS, AdfResult, adf_test
from .transforms import first_difference

log = logging.getLogger(__name__)

REPORT_SCHEMA = "vecon-report-v1"
TOP_LABEL = "top-100"
SHARE_KS = (1, 5, 10, 20, 50, 100)
TRADED_VALUE_KS = (20, 100)
ADF_HEADER = ("label", "t_stat", "p_value", "lags_used", "n_obs", "reject_1pct", "reject_5pct", "reject_10pct")

CONVENTIONS = {
    "inflation_formula": "100 * (end - start) / end",
    "inflation_denominator": INFLATION_DENOMINATOR,
    "std_divisor": "n (population)",
    "quartile_criterion": "mean virtual price over the window, ties by item_id; lowest brackets take the remainder",
    "index_construction": "unit: daily sum of member prices; volume: daily sum of volume * price",
    "adf_regression": "constant, no trend, on the first-differenced index",
    "adf_lag_selection": "min AIC over a common sample, lags 0..floor(12*(n/100)^0.25)",
    "adf_pvalue": "MacKinnon (1994) asymptotic response surface",
    "adf_critical_values": "MacKinnon (2010) finite-sample response surface at n_obs",
    "adf_decision": "reject the unit-root null when p < alpha",
    "static_exclusion": "max(price) == min(price) over the whole window",
    "gap_filling": "forward fill, leading gap back-filled",
    "real_value": "B_r / B_v * coins, half-even to 4 decimals",
    "heatmap": "mirrored boundary, kernel truncated at ceil(4 sigma) and renormalised",
    "display_scaling": "none; index values are stored unscaled",
}


@dataclass(frozen=True)
class Config:
    source: Optional[str] = None
    window: Optional[AnalysisWindow] = None
    bond: Optional[BondQuote] = None
    min_coverage: float = 0.90
    inflation_warn_pct: float = 10.0
    inflation_critical_pct: float = 50.0
    adf_alpha: float = 0.05
    heatmap_bins: int = hm.DEFAULT_BINS
    heatmap_sigma: float = hm.DEFAULT_SIGMA
    item_ids: Optional[tuple] = None
    volumes: Optional[str] = None
    fetch: FetchPolicy = field(default_factory=FetchPolicy)

    def __post_init__(self):
        if not 0 < self.inflation_warn_pct < self.inflation_critical_pct:
            raise InvalidValue("need 0 < inflation_warn_pct < inflation_critical_pct")
        if not 0 < self.adf_alpha < 1:
            raise InvalidValue("adf_alpha must be in (0, 1)")
        if not 0 <= self.min_coverage <= 1:
            raise InvalidValue("min_coverage must be in [0, 1]")
        if self.heatmap_bins < 1 or self.heatmap_sigma < 0:
            raise InvalidValue("heatmap_bins must be >= 1 and heatmap_sigma >= 0")

    @classmethod
    def from_dict(cls, obj: dict, base_dir=None) -> "Config":
        obj = dict(obj)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise InvalidValue(f"unknown config fields: {sorted(unknown)}")
        kwargs = {}
        for key in ("min_coverage", "inflation_warn_pct", "inflation_critical_pct", "adf_alpha", "heatmap_sigma"):
            if key in obj:
                kwargs[key] = float(obj[key])
        if "heatmap_bins" in obj:
            kwargs["heatmap_bins"] = int(obj["heatmap_bins"])
        if obj.get("window"):
            w = obj["window"]
            kwargs["window"] = AnalysisWindow(dt.date.fromisoformat(w["start_day"]), w.get("length_days", 180))
        if obj.get("bond"):
            kwargs["bond"] = BondQuote.from_json(obj["bond"])
        if obj.get("item_ids") is not None:
            kwargs["item_ids"] = tuple(int(i) for i in obj["item_ids"])
        if obj.get("fetch"):
            kwargs["fetch"] = FetchPolicy(**obj["fetch"])
        for key in ("source", "volumes"):
            value = obj.get(key)
            if value and base_dir is not None and not is_remote(value) and not os.path.isabs(value):
                value = str(Path(base_dir) / value)
            if value:
                kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InvalidValue(f"config file {path} not found") from None
        except ValueError as exc:
            raise InvalidValue(f"config file {path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise InvalidValue(f"config file {path}: expected a JSON object")
        try:
            return cls.from_dict(obj, base_dir=path.parent)
        except (KeyError, TypeError) as exc:
            raise InvalidValue(f"config file {path}: {exc}") from exc


def alert_level(inflation_pct: float, warn_pct: float, critical_pct: float) -> str:
    if inflation_pct >= critical_pct:
        return "critical"
    if inflation_pct >= warn_pct:
        return "warn"
    return "none"


@dataclass(frozen=True)
class IndexReport:
    index: IndexSeries
    inflation_pct: float
    alert: str
    adf: Optional[AdfResult]
    adf_error: Optional[str] = None

    def as_dict(self, alpha: float) -> dict:
        entry = {
            "label": self.index.label,
            "weighting": self.index.weighting,
            "members": len(self.index.membership),
            "start_value": self.index.values[0],
            "end_value": self.index.values[-1],
            "inflation_pct": self.inflation_pct,
            "alert": self.alert,
            "adf": self.adf.as_dict() if self.adf else None,
            "adf_error": self.adf_error,
            "display": {"inflation_pct_2dp": round(self.inflation_pct, 2)},
        }
        if self.adf:
            entry["adf"]["reject_at_alpha"] = bool(self.adf.p_value < alpha)
            entry["display"]["t_stat_3dp"] = round(self.adf.t_stat, 3)
            entry["display"]["p_value_3dp"] = round(self.adf.p_value, 3)
        return entry


@dataclass(frozen=True)
class HealthReport:
    window: AnalysisWindow
    item_count: int
    exclusion: ExclusionReport
    partition_sizes: tuple
    indexes: tuple
    volume_shares: Optional[list]
    traded_values: Optional[list]
    thresholds: dict
    heatmaps: tuple = ()

    def index(self, label: str) -> IndexReport:
        for ix in self.indexes:
            if ix.index.label == label:
                return ix
        raise KeyError(label)

    def to_json(self) -> dict:
        alpha = self.thresholds["adf_alpha"]
        return {
            "schema": REPORT_SCHEMA,
            "window": {
                "start_day": self.window.start_day.isoformat(),
                "end_day": self.window.end_day.isoformat(),
                "length_days": self.window.length_days,
            },
            "items": {"input": self.item_count, **self.exclusion.as_dict()},
            "partition": {"scheme": QUARTILE_SCHEME, "sizes": dict(zip(QUARTILE_LABELS, self.partition_sizes))},
            "thresholds": self.thresholds,
            "indexes": [ix.as_dict(alpha) for ix in self.indexes],
            "volume": None if self.volume_shares is None else {
                "shares": self.volume_shares,
                "traded_values": self.traded_values,
            },
            "heatmaps": list(self.heatmaps),
            "conventions": CONVENTIONS,
        }


# --------------------------------------------------------------------------
# pipeline pieces, shared with the CLI subcommands

def resolve_snapshot(config: Config, snapshot_dir=None) -> Snapshot:
    """Load a canonical snapshot, or ingest from the configured source."""
    if snapshot_dir is not None:
        snap = load_snapshot(snapshot_dir)
    else:
        source = resolve_source(config.source)
        if not is_remote(source) and (Path(source) / "meta.json").is_file():
            snap = load_snapshot(source)
        else:
            if config.window is None:
                raise InvalidValue("a window is required to ingest raw documents")
            snap = ingest(source, config.window, config.item_ids, config.volumes, config.bond,
                          config.fetch, config.min_coverage)
    if config.window is not None and snap.window != config.window:
        raise InvalidValue(
            f"snapshot window {snap.window.start_day}+{snap.window.length_days}d differs from the configured window"
        )
    if config.bond is not None and snap.bond != config.bond:
        snap = Snapshot(snap.window, snap.series, snap.volumes, config.bond)
    return snap


def retained(snapshot: Snapshot):
    if len(snapshot) == 0:
        raise EmptySnapshot("snapshot contains no series")
    kept, exclusion = filter_static(snapshot.series)
    if not kept:
        raise EmptySnapshot("every series is static over the window")
    return kept, exclusion


def build_indexes(snapshot: Snapshot, stats: Sequence) -> tuple:
    """Four quartile sum indexes, plus the volume-weighted index when volumes exist."""
    partition = partition_quartiles(stats)
    out = [build_sum_index(snapshot, ids, label) for label, ids in zip(QUARTILE_LABELS, partition.groups)]
    if snapshot.volumes:
        out.append(build_weighted_index(snapshot, snapshot.volumes, TOP_LABEL))
    return partition, out


def adf_on_returns(index: IndexSeries):
    """ADF on the first-differenced index; returns (result, error message)."""
    try:
        diffs = first_difference(index.values).astype(float)
        return adf_test(diffs), None
    except (DegenerateSeries, TooFewObservations) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def write_adf_csv(rows: Sequence[IndexReport], out) -> None:
    """ADF rows to a path or open text stream; untestable indexes get empty fields."""
    if not hasattr(out, "write"):
        with open(out, "w", newline="") as fh:
            return write_adf_csv(rows, fh)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ADF_HEADER)
    for r in rows:
        if r.adf is None:
            writer.writerow([r.index.label] + [""] * (len(ADF_HEADER) - 1))
            continue
        a = r.adf
        writer.writerow([r.index.label, repr(a.t_stat), repr(a.p_value), a.lags_used, a.n_obs]
                        + [str(a.reject_at[k]).lower() for k in LEVEL_KEYS])


def heatmap_grids(stats: Sequence, bins: int, sigma: float) -> dict:
    change = [s.mean_daily_pct_change for s in stats]
    logp = [s.log_mean_price for s in stats]
    cov = [s.cov for s in stats]
    return {
        "heatmap_change_vs_logprice": hm.density(
            np.column_stack([logp, change]), bins, sigma, "log_mean_price", "mean_daily_pct_change"),
        "heatmap_cov_vs_change": hm.density(
            np.column_stack([change, cov]), bins, sigma, "mean_daily_pct_change", "cov"),
    }


def _volume_summary(snapshot: Snapshot, bond: Optional[BondQuote]):
    vols = list(snapshot.volumes)
    ranked = sorted(vols, key=lambda v: (-v.volume, v.item_id))
    shares = [{"k": k, "share": volume_share(vols, k), "share_4dp": round(volume_share(vols, k), 4)}
              for k in SHARE_KS if k <= len(vols)]
    if len(vols) not in SHARE_KS:
        k = len(vols)
        shares.append({"k": k, "share": 1.0, "share_4dp": 1.0})
    values = None
    if bond is not None:
        values = []
        for k in TRADED_VALUE_KS:
            top = ranked[:k]
            total = Decimal(0)
            for v in top:
                prices = snapshot.get(v.item_id).prices
                total += traded_value(Fraction(sum(prices), len(prices)), v.volume, bond)
            values.append({"k": len(top), "real_value": str(total)})
    return shares, values


# --------------------------------------------------------------------------

def analyze(snapshot: Snapshot, config: Config):
    """Return ``(HealthReport, stats)``; heatmaps are left to the caller."""
    kept, exclusion = retained(snapshot)
    stats = describe_all(kept)
    partition, indexes = build_indexes(snapshot, stats)
    rows = []
    for ix in indexes:
        infl = inflation_rate(ix)
        adf, err = adf_on_returns(ix)
        rows.append(IndexReport(ix, infl, alert_level(infl, config.inflation_warn_pct, config.inflation_critical_pct),
                                adf, err))
    shares = values = None
    if snapshot.volumes:
        shares, values = _volume_summary(snapshot, snapshot.bond)
    thresholds = {
        "inflation_warn_pct": config.inflation_warn_pct,
        "inflation_critical_pct": config.inflation_critical_pct,
        "adf_alpha": config.adf_alpha,
        "min_coverage": config.min_coverage,
        "heatmap_bins": config.heatmap_bins,
        "heatmap_sigma": config.heatmap_sigma,
    }
    return HealthReport(snapshot.window, len(snapshot), exclusion, tuple(len(g) for g in partition.groups),
                        tuple(rows), shares, values, thresholds), stats


def _write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_markdown(doc: dict) -> str:
    """Markdown projection of ``report.json``; prints values, never recomputes them."""
    w = doc["window"]
    items = doc["items"]
    out = io.StringIO()
    out.write("# Virtual economy health report\n\n")
    out.write(f"Window: {w['start_day']} to {w['end_day']} ({w['length_days']} days)\n\n")
    out.write(f"Items: {items['input']} input, {items['retained_count']} retained, "
              f"{items['excluded_count']} excluded as static\n\n")
    out.write("## Indexes\n\n")
    out.write("| Index | Weighting | Members | ADF t | p-value | Lags | Reject at alpha | Inflation (%) | Alert |\n")
    out.write("|---|---|---|---|---|---|---|---|---|\n")
    for ix in doc["indexes"]:
        d = ix["display"]
        if ix["adf"] is None:
            t = p = lags = reject = "n/a"
        else:
            t, p = repr(d["t_stat_3dp"]), repr(d["p_value_3dp"])
            lags = str(ix["adf"]["lags_used"])
            reject = "yes" if ix["adf"]["reject_at_alpha"] else "no"
        out.write(f"| {ix['label']} | {ix['weighting']} | {ix['members']} | {t} | {p} | {lags} | "
                  f"{reject} | {d['inflation_pct_2dp']!r} | {ix['alert']} |\n")
    out.write(f"\nThresholds: warn at {doc['thresholds']['inflation_warn_pct']!r}%, "
              f"critical at {doc['thresholds']['inflation_critical_pct']!r}%; "
              f"ADF alpha {doc['thresholds']['adf_alpha']!r}.\n")
    if doc["volume"] is not None:
        out.write("\n## Traded volume\n\n| Top k | Volume share |\n|---|---|\n")
        for s in doc["volume"]["shares"]:
            out.write(f"| {s['k']} | {s['share_4dp']!r} |\n")
        if doc["volume"]["traded_values"]:
            out.write("\n| Top k | Real value of traded volume |\n|---|---|\n")
            for v in doc["volume"]["traded_values"]:
                out.write(f"| {v['k']} | {v['real_value']} |\n")
    out.write("\n## Conventions\n\n")
    for key in sorted(doc["conventions"]):
        out.write(f"- {key}: {doc['conventions'][key]}\n")
    return out.getvalue()


def write_outputs(report: HealthReport, stats: Sequence, out_dir, grids: Optional[dict] = None) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_stats_csv(stats, out_dir / "stats.csv")
    for row in report.indexes:
        write_index_csv(row.index, out_dir / index_filename(row.index.label))
    write_index_manifest([r.index for r in report.indexes], out_dir / "indexes.json")
    write_adf_csv(report.indexes, out_dir / "adf.csv")
    for name, grid in (grids or {}).items():
        hm.export_grid(grid, out_dir / name)
    doc = report.to_json()
    _write(out_dir / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _write(out_dir / "report.md", render_markdown(doc))
    return doc


def run_report(config: Config, out_dir, snapshot: Optional[Snapshot] = None, snapshot_dir=None) -> HealthReport:
    """Run the whole battery and write every artifact under ``out_dir``."""
    snap = snapshot if snapshot is not None else resolve_snapshot(config, snapshot_dir)
    report, stats = analyze(snap, config)
    grids = heatmap_grids(stats, config.heatmap_bins, config.heatmap_sigma)
    report = HealthReport(**{**report.__dict__, "heatmaps": tuple(sorted(grids))})
    write_outputs(report, stats, out_dir, grids)
    for row in report.indexes:
        if row.alert != "none":
            log.warning("%s index inflation %.2f%% (%s)", row.index.label, row.inflation_pct, row.alert)
    return report
