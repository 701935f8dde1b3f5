"""``vecon`` command line.

Exit codes: 0 success, 1 data or domain error, 2 usage error. Diagnostics
go to stderr; data goes to files or stdout.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import heatmap as hm
from .descriptive import describe_all, write_stats_csv
from .errors import VeconError
from .indexes import index_filename, write_index_csv, write_index_manifest
from .ingest import filter_static, ingest, save_snapshot
from .model import AnalysisWindow, BondQuote
from .report import (
    Config,
    IndexReport,
    adf_on_returns,
    alert_level,
    build_indexes,
    heatmap_grids,
    inflation_rate,
    resolve_snapshot,
    retained,
    run_report,
    write_adf_csv,
)

log = logging.getLogger("vecon")


def _config(args) -> Config:
    cfg = Config.load(args.config) if getattr(args, "config", None) else Config()
    overrides = {}
    if getattr(args, "source", None):
        overrides["source"] = args.source
    if getattr(args, "start", None):
        days = args.days or (cfg.window.length_days if cfg.window else 180)
        overrides["window"] = AnalysisWindow(dt.date.fromisoformat(args.start), days)
    elif getattr(args, "days", None) and cfg.window:
        overrides["window"] = AnalysisWindow(cfg.window.start_day, args.days)
    if getattr(args, "ids", None):
        overrides["item_ids"] = tuple(int(i) for i in args.ids.split(",") if i.strip())
    if getattr(args, "volumes", None):
        overrides["volumes"] = args.volumes
    if getattr(args, "bond_real", None) is not None or getattr(args, "bond_virtual", None) is not None:
        if args.bond_real is None or args.bond_virtual is None:
            raise VeconError("--bond-real and --bond-virtual must be given together")
        overrides["bond"] = BondQuote(args.bond_real, args.bond_virtual)
    if getattr(args, "min_coverage", None) is not None:
        overrides["min_coverage"] = args.min_coverage
    if getattr(args, "bins", None) is not None:
        overrides["heatmap_bins"] = args.bins
    if getattr(args, "sigma", None) is not None:
        overrides["heatmap_sigma"] = args.sigma
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _snapshot(args, cfg: Config):
    return resolve_snapshot(cfg, getattr(args, "snapshot", None))


def cmd_ingest(args) -> int:
    cfg = _config(args)
    if cfg.window is None:
        raise VeconError("ingest needs a window: --start (and --days) or a config window")
    snap = ingest(cfg.source, cfg.window, cfg.item_ids, cfg.volumes, cfg.bond, cfg.fetch, cfg.min_coverage)
    save_snapshot(snap, args.out)
    _, exclusion = filter_static(snap.series)
    print(f"saved {len(snap)} series to {args.out} ({len(exclusion.excluded_ids)} static)", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    cfg = _config(args)
    kept, exclusion = retained(_snapshot(args, cfg))
    stats = describe_all(kept)
    write_stats_csv(stats, sys.stdout if args.out in (None, "-") else args.out)
    print(f"{exclusion.retained_count} items described, {len(exclusion.excluded_ids)} static excluded",
          file=sys.stderr)
    return 0


def cmd_index(args) -> int:
    cfg = _config(args)
    snap = _snapshot(args, cfg)
    kept, _ = retained(snap)
    _, indexes = build_indexes(snap, describe_all(kept))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ix in indexes:
        write_index_csv(ix, out / index_filename(ix.label))
    for entry in write_index_manifest(indexes, out / "indexes.json"):
        print(f"{entry['label']}: inflation {entry['inflation_pct']:.2f}% ({entry['members']} members)",
              file=sys.stderr)
    return 0


def cmd_adf(args) -> int:
    cfg = _config(args)
    snap = _snapshot(args, cfg)
    kept, _ = retained(snap)
    _, indexes = build_indexes(snap, describe_all(kept))
    rows = []
    for ix in indexes:
        infl = inflation_rate(ix)
        adf, err = adf_on_returns(ix)
        if err:
            print(f"{ix.label}: {err}", file=sys.stderr)
        rows.append(IndexReport(ix, infl, alert_level(infl, cfg.inflation_warn_pct, cfg.inflation_critical_pct),
                                adf, err))
    write_adf_csv(rows, sys.stdout if args.out in (None, "-") else args.out)
    return 0


def cmd_heatmap(args) -> int:
    cfg = _config(args)
    kept, _ = retained(_snapshot(args, cfg))
    grids = heatmap_grids(describe_all(kept), cfg.heatmap_bins, cfg.heatmap_sigma)
    for name, grid in sorted(grids.items()):
        for path in hm.export_grid(grid, Path(args.out) / name):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    cfg = _config(args)
    report = run_report(cfg, args.out, snapshot_dir=args.snapshot)
    for row in report.indexes:
        p = "n/a" if row.adf is None else f"{row.adf.p_value:.3f}"
        print(f"{row.index.label:10s} inflation {row.inflation_pct:7.2f}%  ADF p {p}  alert {row.alert}",
              file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vecon", description="Virtual economy monitoring battery.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, snapshot=True, out_help="output path"):
        p.add_argument("--config", help="JSON config file")
        if snapshot:
            p.add_argument("--snapshot", help="canonical snapshot directory")
        p.add_argument("--source", help="endpoint base URL or fixture directory (default $VECON_SOURCE)")
        p.add_argument("--start", help="window start date (YYYY-MM-DD)")
        p.add_argument("--days", type=int, help="window length in days")
        p.add_argument("--out", help=out_help)

    p = sub.add_parser("ingest", help="fetch or load raw documents into a canonical snapshot")
    common(p, snapshot=False, out_help="snapshot directory to write")
    p.add_argument("--ids", help="comma-separated item ids (required for endpoints)")
    p.add_argument("--volumes", help="item_id,volume CSV")
    p.add_argument("--bond-real", help="real price of one bond, e.g. 5.4900")
    p.add_argument("--bond-virtual", type=int, help="virtual coin price of one bond")
    p.add_argument("--min-coverage", type=float)
    p.set_defaults(func=cmd_ingest, out_required=True)

    p = sub.add_parser("stats", help="per-item descriptive statistics CSV")
    common(p, out_help="CSV file (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("index", help="quartile and volume-weighted index CSVs")
    common(p, out_help="output directory")
    p.set_defaults(func=cmd_index, out_required=True)

    p = sub.add_parser("adf", help="ADF tests on first-differenced indexes")
    common(p, out_help="CSV file (default stdout)")
    p.set_defaults(func=cmd_adf)

    p = sub.add_parser("heatmap", help="smoothed 2-D density exports")
    common(p, out_help="output directory")
    p.add_argument("--bins", type=int)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_heatmap, out_required=True)

    p = sub.add_parser("report", help="full health report")
    common(p, out_help="output directory")
    p.add_argument("--bins", type=int)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_report, out_required=True)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    if getattr(args, "out_required", False) and not args.out:
        parser.print_usage(sys.stderr)
        print(f"vecon {args.command}: error: --out is required", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (VeconError, OSError) as exc:
        print(f"vecon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
