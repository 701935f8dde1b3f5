import json
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vecon.descriptive import DescriptiveStats, describe_all
from vecon.errors import EmptyMembership, NonPositiveVolume, SeriesTooShort, TooFewItems, UnknownMember, ZeroEndValue
from vecon.indexes import (
    IndexSeries,
    build_sum_index,
    build_weighted_index,
    inflation_rate,
    partition_quartiles,
    write_index_csv,
    write_index_manifest,
)
from vecon.model import AnalysisWindow, PriceSeries, Snapshot, VolumeRecord

from .conftest import START


def stat(item_id, mean):
    return DescriptiveStats(item_id, float(mean), 0.0, 0.0, 0.0, 0.0)


class TestPartition:
    def test_four_items(self):
        p = partition_quartiles([stat(1, 40), stat(2, 10), stat(3, 30), stat(4, 20)])
        assert p.groups == ((2,), (4,), (3,), (1,))
        assert p.scheme == "quartile-by-mean-price"

    def test_eight_items(self):
        means = {1: 8, 2: 7, 3: 6, 4: 5, 5: 4, 6: 3, 7: 2, 8: 1}
        p = partition_quartiles([stat(i, m) for i, m in means.items()])
        assert p.groups == ((8, 7), (6, 5), (4, 3), (2, 1))

    def test_remainder_goes_low(self):
        p = partition_quartiles([stat(i, i) for i in range(1, 7)])
        assert tuple(len(g) for g in p.groups) == (2, 2, 1, 1)

    def test_ties_by_id(self):
        p = partition_quartiles([stat(i, 5) for i in (4, 2, 3, 1)])
        assert p.groups == ((1,), (2,), (3,), (4,))

    def test_too_few(self):
        with pytest.raises(TooFewItems):
            partition_quartiles([stat(1, 1), stat(2, 2), stat(3, 3)])

    @given(st.lists(st.integers(1, 50), min_size=4, max_size=60))
    def test_disjoint_complete_balanced(self, means):
        stats = [stat(i, m) for i, m in enumerate(means, start=1)]
        p = partition_quartiles(stats)
        flat = [i for g in p.groups for i in g]
        assert sorted(flat) == list(range(1, len(means) + 1))
        sizes = [len(g) for g in p.groups]
        assert max(sizes) - min(sizes) <= 1
        # brackets are ordered by mean price
        for lo, hi in zip(p.groups, p.groups[1:]):
            assert max(means[i - 1] for i in lo) <= min(means[i - 1] for i in hi)


@pytest.fixture
def two_items():
    w = AnalysisWindow(START, 2)
    return Snapshot(w, (PriceSeries.contiguous(1, [1, 2]), PriceSeries.contiguous(2, [3, 3])))


class TestSumIndex:
    def test_singleton(self, two_items):
        assert build_sum_index(two_items, [1], "x").values == (1, 2)

    def test_hand(self, two_items):
        ix = build_sum_index(two_items, [2, 1], "x")
        assert ix.values == (4, 5) and ix.weighting == "unit" and ix.membership == (1, 2)

    def test_unknown(self, two_items):
        with pytest.raises(UnknownMember):
            build_sum_index(two_items, [1, 99], "x")

    def test_empty(self, two_items):
        with pytest.raises(EmptyMembership):
            build_sum_index(two_items, [], "x")


class TestWeightedIndex:
    def test_hand(self, two_items):
        ix = build_weighted_index(two_items, [VolumeRecord(1, 10), VolumeRecord(2, 1)], "top")
        assert ix.values == (13, 23) and ix.weighting == "volume"

    def test_unit_weights_equal_sum(self, economy400):
        ids = economy400.item_ids[:50]
        w = build_weighted_index(economy400, [VolumeRecord(i, 1) for i in ids], "w")
        s = build_sum_index(economy400, ids, "s")
        assert w.values == s.values

    def test_zero_volume(self, two_items):
        bad = VolumeRecord(1, 1)
        object.__setattr__(bad, "volume", 0)
        with pytest.raises(NonPositiveVolume):
            build_weighted_index(two_items, [bad], "top")

    def test_unknown(self, two_items):
        with pytest.raises(UnknownMember):
            build_weighted_index(two_items, [VolumeRecord(5, 1)], "top")

    def test_no_int64_overflow(self):
        w = AnalysisWindow(START, 2)
        snap = Snapshot(w, tuple(PriceSeries.contiguous(i, [2_000_000_000, 2_100_000_000]) for i in (1, 2, 3)))
        ix = build_weighted_index(snap, [VolumeRecord(i, 2_000_000_000) for i in (1, 2, 3)], "big")
        assert ix.values[0] == 3 * 2_000_000_000 * 2_000_000_000  # > 2**63

    def test_positive(self, economy400):
        ix = build_weighted_index(economy400, economy400.volumes, "top")
        assert all(v > 0 for v in ix.values)


class TestInflation:
    def test_flat(self):
        assert inflation_rate([7, 9, 7]) == 0.0

    def test_end_point_denominator(self):
        # 100 * (110 - 100) / 110
        assert inflation_rate([100, 105, 110]) == pytest.approx(9.090909090909092, abs=1e-12)

    def test_accepts_index_series(self):
        assert inflation_rate(IndexSeries("x", (50, 100), (1,), "unit")) == 50.0

    def test_errors(self):
        with pytest.raises(SeriesTooShort):
            inflation_rate([5])
        with pytest.raises(ZeroEndValue):
            inflation_rate([5, 0])

    @given(st.lists(st.integers(1, 10**12), min_size=2, max_size=30), st.floats(1e-3, 1e6))
    def test_scale_invariant(self, values, a):
        base = inflation_rate(values)
        scaled = inflation_rate([a * v for v in values])
        assert scaled == pytest.approx(base, rel=1e-12, abs=1e-12)


class TestIndexProperties:
    def test_quartiles_sum_to_all(self, economy400):
        from vecon.ingest import filter_static

        kept, _ = filter_static(economy400.series)
        stats = describe_all(kept)
        p = partition_quartiles(stats)
        total = np.zeros(economy400.window.length_days, dtype=object)
        for g in p.groups:
            total = total + np.array(build_sum_index(economy400, g, "q").values, dtype=object)
        everything = build_sum_index(economy400, [s.item_id for s in kept], "all")
        assert tuple(total) == everything.values

    def test_membership_order_irrelevant(self, economy400):
        ids = economy400.item_ids[:40]
        shuffled = ids[:]
        random.Random(5).shuffle(shuffled)
        assert build_sum_index(economy400, ids, "a").values == build_sum_index(economy400, shuffled, "b").values
        vols = [VolumeRecord(i, k + 1) for k, i in enumerate(ids)]
        assert (build_weighted_index(economy400, vols, "a").values
                == build_weighted_index(economy400, vols[::-1], "b").values)


def test_exports(tmp_path, two_items):
    ix = build_sum_index(two_items, [1, 2], "upper mid")
    write_index_csv(ix, tmp_path / "ix.csv")
    assert (tmp_path / "ix.csv").read_text() == "day_index,value\n0,4\n1,5\n"
    entries = write_index_manifest([ix], tmp_path / "indexes.json")
    manifest = json.loads((tmp_path / "indexes.json").read_text())
    assert manifest["indexes"] == entries
    assert entries[0]["inflation_denominator"] == "end"
    assert entries[0]["file"] == "index_upper_mid.csv" and entries[0]["members"] == 2
