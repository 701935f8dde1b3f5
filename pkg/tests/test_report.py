import json
import re

import numpy as np
import pytest

from vecon.errors import EmptySnapshot, InvalidValue
from vecon.ingest import save_snapshot
from vecon.model import AnalysisWindow, PriceSeries, Snapshot
from vecon.report import (
    Config,
    alert_level,
    analyze,
    render_markdown,
    resolve_snapshot,
    run_report,
)
from vecon.synth import make_economy, write_fixture_dir

from .conftest import START

DATE = re.compile(r"\d{4}-\d{2}-\d{2}")
NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


def numbers(text):
    return {float(m) for m in NUMBER.findall(DATE.sub(" ", text))}


@pytest.fixture(scope="module")
def small_cfg():
    return Config(heatmap_bins=64, heatmap_sigma=2.0)


@pytest.fixture(scope="module")
def report400(tmp_path_factory, economy400, small_cfg):
    out = tmp_path_factory.mktemp("report400")
    return run_report(small_cfg, out, snapshot=economy400), out


class TestAlert:
    @pytest.mark.parametrize("infl,level", [(-5, "none"), (9.99, "none"), (10, "warn"), (49.9, "warn"),
                                            (50, "critical"), (80, "critical")])
    def test_levels(self, infl, level):
        assert alert_level(infl, 10, 50) == level


class TestConfig:
    def test_defaults(self):
        c = Config()
        assert (c.inflation_warn_pct, c.inflation_critical_pct, c.adf_alpha) == (10, 50, 0.05)
        assert (c.heatmap_bins, c.heatmap_sigma, c.min_coverage) == (1000, 8.0, 0.9)

    def test_invalid(self):
        with pytest.raises(InvalidValue):
            Config(inflation_warn_pct=60)
        with pytest.raises(InvalidValue):
            Config(adf_alpha=1.5)

    def test_load(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({
            "source": "fixtures", "window": {"start_day": "2018-06-13", "length_days": 30},
            "bond": {"bond_real_price": "5.4900", "bond_virtual_price": 4500000},
            "adf_alpha": 0.01,
        }))
        c = Config.load(tmp_path / "c.json")
        assert c.source == str(tmp_path / "fixtures")
        assert c.window == AnalysisWindow(START, 30) and c.adf_alpha == 0.01
        assert str(c.bond.bond_real_price) == "5.4900"

    def test_unknown_field(self, tmp_path):
        (tmp_path / "c.json").write_text('{"bogus": 1}')
        with pytest.raises(InvalidValue):
            Config.load(tmp_path / "c.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidValue):
            Config.load(tmp_path / "nope.json")


class TestAnalyze:
    def test_shape(self, report400):
        report, _ = report400
        labels = [r.index.label for r in report.indexes]
        assert labels == ["lower", "lower-mid", "upper-mid", "upper", "top-100"]
        assert all(r.adf is not None for r in report.indexes)
        assert report.exclusion.retained_count == 400 and len(report.exclusion.excluded_ids) == 12
        assert sum(report.partition_sizes) == 400
        assert len(report.heatmaps) == 2

    def test_artifacts(self, report400):
        _, out = report400
        names = {p.name for p in out.iterdir()}
        expected = {"stats.csv", "indexes.json", "adf.csv", "report.json", "report.md",
                    "index_lower.csv", "index_lower-mid.csv", "index_upper-mid.csv", "index_upper.csv",
                    "index_top-100.csv"}
        for base in ("heatmap_change_vs_logprice", "heatmap_cov_vs_change"):
            expected |= {base + ext for ext in (".csv", ".json", ".pgm")}
        assert expected <= names
        assert len((out / "adf.csv").read_text().splitlines()) == 6
        assert len((out / "stats.csv").read_text().splitlines()) == 401

    def test_alerts_consistent(self, report400):
        doc = json.loads((report400[1] / "report.json").read_text())
        th = doc["thresholds"]
        for ix in doc["indexes"]:
            assert ix["alert"] == alert_level(ix["inflation_pct"], th["inflation_warn_pct"],
                                              th["inflation_critical_pct"])
            if ix["adf"]:
                assert ix["adf"]["reject_at_alpha"] == (ix["adf"]["p_value"] < th["adf_alpha"])

    def test_markdown_numbers_come_from_json(self, report400):
        _, out = report400
        md, js = (out / "report.md").read_text(), (out / "report.json").read_text()
        missing = numbers(md) - numbers(js)
        assert not missing
        assert render_markdown(json.loads(js)) == md

    def test_critical_drift(self, small_cfg):
        snap = make_economy(80, 180, seed=9, drift={"upper": 60.0}, walk_sigma=0.0)
        report, _ = analyze(snap, small_cfg)
        assert report.index("upper").alert == "critical"
        assert report.index("lower").alert == "none"

    def test_volume_summary(self, report400, economy400):
        report, _ = report400
        shares = {s["k"]: s["share"] for s in report.volume_shares}
        assert shares[100] == 1.0 and 0 < shares[1] < shares[5] < shares[100]
        assert [v["k"] for v in report.traded_values] == [20, 100]

    def test_no_volumes(self, small_cfg):
        snap = make_economy(20, 30, seed=1, n_volume=0)
        report, _ = analyze(snap, small_cfg)
        assert len(report.indexes) == 4 and report.to_json()["volume"] is None

    def test_short_window_adf_reported_not_raised(self, small_cfg, tiny_snapshot):
        snap = Snapshot(tiny_snapshot.window, tiny_snapshot.series)
        report, _ = analyze(snap, small_cfg)
        assert all(r.adf is None for r in report.indexes)
        # item 3 rises by exactly 1 each day, so its differenced index is constant
        errors = {r.index.label: r.adf_error.split(":")[0] for r in report.indexes}
        assert set(errors.values()) <= {"TooFewObservations", "DegenerateSeries"}

    def test_empty(self, small_cfg, window5):
        with pytest.raises(EmptySnapshot):
            analyze(Snapshot(window5, ()), small_cfg)
        with pytest.raises(EmptySnapshot):
            analyze(Snapshot(window5, (PriceSeries.contiguous(1, [3] * 5),)), small_cfg)


def test_deterministic_bytes(tmp_path, small_cfg):
    snap = make_economy(60, 60, seed=4)
    run_report(small_cfg, tmp_path / "a", snapshot=snap)
    run_report(small_cfg, tmp_path / "b", snapshot=snap)
    for p in sorted((tmp_path / "a").iterdir()):
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes(), p.name


class TestResolveSnapshot:
    def test_precedence(self, tmp_path, monkeypatch):
        snap = make_economy(8, 30, seed=2)
        save_snapshot(snap, tmp_path / "snap")
        write_fixture_dir(make_economy(12, 30, seed=3), tmp_path / "raw")
        monkeypatch.setenv("VECON_SOURCE", str(tmp_path / "raw"))
        w = AnalysisWindow(START, 30)
        assert len(resolve_snapshot(Config(window=w))) == 12
        assert len(resolve_snapshot(Config(source=str(tmp_path / "snap"), window=w))) == 8
        assert len(resolve_snapshot(Config(source=str(tmp_path / "raw")), tmp_path / "snap")) == 8

    def test_window_mismatch(self, tmp_path):
        save_snapshot(make_economy(8, 30, seed=2), tmp_path / "snap")
        with pytest.raises(InvalidValue):
            resolve_snapshot(Config(window=AnalysisWindow(START, 31)), tmp_path / "snap")

    def test_needs_window_for_raw(self, tmp_path):
        write_fixture_dir(make_economy(8, 30, seed=2), tmp_path / "raw")
        with pytest.raises(InvalidValue):
            resolve_snapshot(Config(source=str(tmp_path / "raw")))
