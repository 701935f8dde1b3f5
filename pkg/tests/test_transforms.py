import math
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vecon.errors import NonPositiveValue, SeriesTooShort
from vecon.model import BondQuote, PriceSeries
from vecon.transforms import (
    cumulative_from,
    first_difference,
    log_series,
    pct_returns,
    real_value_series,
    to_real_value,
)

quotes = st.builds(
    BondQuote,
    st.integers(1, 10**8).map(lambda n: Decimal(n).scaleb(-4)),
    st.integers(1, 10**10),
)


class TestRealValue:
    def test_zero(self):
        assert to_real_value(0, BondQuote("5.0000", 4_000_000)) == Decimal("0.0000")

    def test_identity_ratio(self):
        assert to_real_value(5, BondQuote("7", 7)) == Decimal("5.0000")

    def test_direct_arithmetic(self):
        # 5 / 4,000,000 * 2,000,000 = 2.5
        assert to_real_value(2_000_000, BondQuote("5.0000", 4_000_000)) == Decimal("2.5000")

    def test_half_even(self):
        q = BondQuote("1", 100_000)
        # 5 coins -> 0.00005 exactly: ties to even (0.0000); 15 coins -> 0.00015 -> 0.0002
        assert to_real_value(5, q) == Decimal("0.0000")
        assert to_real_value(15, q) == Decimal("0.0002")

    def test_four_places(self):
        v = to_real_value(1, BondQuote("1", 3))
        assert v == Decimal("0.3333") and v.as_tuple().exponent == -4

    def test_series(self):
        s = PriceSeries.contiguous(3, [1000, 2000])
        out = real_value_series(s, BondQuote("1", 1000))
        assert out.item_id == 3 and out.values == (Decimal("1.0000"), Decimal("2.0000"))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            to_real_value(-1, BondQuote("1", 1))

    @given(st.integers(0, 10**12), st.integers(0, 10**12), quotes)
    def test_linearity_within_one_ulp(self, a, b, q):
        lhs = to_real_value(a + b, q)
        rhs = to_real_value(a, q) + to_real_value(b, q)
        assert abs(lhs - rhs) <= Decimal("0.0001")

    @given(st.integers(0, 10**12), quotes)
    def test_doubling_real_price(self, price, q):
        doubled = BondQuote(q.bond_real_price * 2, q.bond_virtual_price)
        base = to_real_value(price, q)
        # exact when twice the base value needs no extra rounding
        exact = q.bond_real_price * price / q.bond_virtual_price
        if (2 * exact).quantize(Decimal("0.0001")) == 2 * exact.quantize(Decimal("0.0001")):
            assert to_real_value(price, doubled) == 2 * base
        else:
            assert abs(to_real_value(price, doubled) - 2 * base) <= Decimal("0.0001")


class TestLog:
    def test_identities(self):
        np.testing.assert_allclose(log_series([1, math.e, math.e ** 2]), [0, 1, 2], atol=1e-15)

    def test_ln100(self):
        assert log_series([100])[0] == pytest.approx(4.605170185988092, rel=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(NonPositiveValue):
            log_series([1, 0, 2])

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=50))
    def test_exp_round_trip(self, xs):
        back = log_series(np.exp(xs))
        np.testing.assert_allclose(back, xs, rtol=1e-12, atol=1e-12)


class TestFirstDifference:
    def test_hand(self):
        assert first_difference([1, 3, 6]).tolist() == [2, 3]

    def test_constant(self):
        assert first_difference([7, 7, 7]).tolist() == [0, 0]

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            first_difference([5])

    @given(st.lists(st.integers(-10**12, 10**12), min_size=2, max_size=200))
    def test_reconstruction_exact(self, ys):
        rebuilt = cumulative_from(ys[0], first_difference(ys))
        assert rebuilt.tolist() == ys


class TestPctReturns:
    def test_hand(self):
        np.testing.assert_allclose(pct_returns([100, 110, 99]), [0.10, -0.10], rtol=1e-15)

    def test_double(self):
        assert pct_returns([100, 200]).tolist() == [1.0]

    def test_constant(self):
        assert pct_returns([4, 4, 4]).tolist() == [0.0, 0.0]

    def test_errors(self):
        with pytest.raises(SeriesTooShort):
            pct_returns([1])
        with pytest.raises(NonPositiveValue):
            pct_returns([1, -1])

    @settings(max_examples=200)
    @given(st.lists(st.integers(1, 10**9), min_size=2, max_size=60), st.integers(1, 1000))
    def test_integer_scaling_bit_identical(self, ys, a):
        assert pct_returns(np.array(ys) * a).tolist() == pct_returns(ys).tolist()
