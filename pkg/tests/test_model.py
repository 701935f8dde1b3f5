import datetime as dt
from decimal import Decimal

import pytest

from vecon.errors import DuplicateItem, InvalidValue, NonPositivePrice, NonPositiveVolume
from vecon.model import AnalysisWindow, BondQuote, PriceSeries, Snapshot, VolumeRecord

from .conftest import START


class TestAnalysisWindow:
    def test_defaults_to_180_days(self):
        assert AnalysisWindow(START).length_days == 180

    def test_end_day_inclusive(self):
        assert AnalysisWindow(START, 2).end_day == START + dt.timedelta(days=1)

    def test_ending(self):
        w = AnalysisWindow.ending(dt.date(2018, 12, 9))
        assert w.end_day == dt.date(2018, 12, 9) and w.length_days == 180

    @pytest.mark.parametrize("length", [0, 1, -3, 2.5, True])
    def test_rejects_short_or_non_integer_length(self, length):
        with pytest.raises(InvalidValue):
            AnalysisWindow(START, length)

    def test_accepts_iso_string(self):
        assert AnalysisWindow("2018-06-13", 10).start_day == START


class TestPriceSeries:
    def test_contiguous(self):
        s = PriceSeries.contiguous(7, [3, 4])
        assert s.days == (0, 1) and s.prices == (3, 4) and len(s) == 2

    def test_days_must_increase(self):
        with pytest.raises(InvalidValue):
            PriceSeries(1, (0, 2, 2), (1, 1, 1))

    def test_non_positive_price(self):
        with pytest.raises(NonPositivePrice):
            PriceSeries.contiguous(1, [3, 0])

    def test_float_price_rejected(self):
        with pytest.raises(InvalidValue):
            PriceSeries.contiguous(1, [3, 4.5])

    def test_item_id_positive(self):
        with pytest.raises(InvalidValue):
            PriceSeries.contiguous(0, [1, 2])

    def test_immutable(self):
        s = PriceSeries.contiguous(1, [1, 2])
        with pytest.raises(AttributeError):
            s.prices = (5, 6)


class TestVolumeRecord:
    def test_zero_volume_rejected(self):
        with pytest.raises(NonPositiveVolume):
            VolumeRecord(1, 0)

    def test_valid(self):
        assert VolumeRecord(4151, 1_000_000).volume == 1_000_000


class TestBondQuote:
    def test_fixed_point(self):
        q = BondQuote("5.49", 4_000_000)
        assert q.bond_real_price == Decimal("5.4900")
        assert str(q.bond_real_price) == "5.4900"

    def test_too_many_digits_rejected_not_rounded(self):
        with pytest.raises(InvalidValue):
            BondQuote("5.00001", 4_000_000)

    @pytest.mark.parametrize("real,virtual", [("0", 10), ("-1", 10), ("1", 0), ("1", -5)])
    def test_positive(self, real, virtual):
        with pytest.raises(InvalidValue):
            BondQuote(real, virtual)

    def test_json_round_trip(self):
        q = BondQuote("12.3456", 7_000_000)
        assert BondQuote.from_json(q.to_json()) == q


class TestSnapshot:
    def test_sorted_and_keyed(self, window5):
        a = PriceSeries.contiguous(9, [1, 2, 3, 4, 5])
        b = PriceSeries.contiguous(2, [1, 2, 3, 4, 5])
        snap = Snapshot(window5, (a, b))
        assert snap.item_ids == [2, 9]
        assert snap.get(9) is a and 9 in snap and 3 not in snap

    def test_duplicate_ids(self, window5):
        a = PriceSeries.contiguous(1, [1, 2, 3, 4, 5])
        with pytest.raises(DuplicateItem):
            Snapshot(window5, (a, a))

    def test_unaligned_series_rejected(self, window5):
        with pytest.raises(InvalidValue):
            Snapshot(window5, (PriceSeries.contiguous(1, [1, 2, 3]),))

    def test_price_matrix(self, tiny_snapshot):
        m = tiny_snapshot.price_matrix([3, 1])
        assert m.tolist() == [[5, 6, 7, 8, 9], [10, 11, 12, 11, 10]]
