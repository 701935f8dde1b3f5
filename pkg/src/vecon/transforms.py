"""Pure series transformations: real-value mapping, log, differencing, returns."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import InvalidValue, NonPositiveValue, SeriesTooShort
from .model import BondQuote, PriceSeries


@dataclass(frozen=True)
class RealValueSeries:
    item_id: int
    values: tuple


def _exact(value) -> Fraction:
    if isinstance(value, (Decimal, Rational)):
        return Fraction(value)
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        # shortest repr, so 0.1 means one tenth rather than its binary expansion
        return Fraction(Decimal(repr(float(value))))
    raise InvalidValue(f"not a numeric amount: {value!r}")


def to_real_value(price, quote: BondQuote) -> Decimal:
    """Real-currency value of ``price`` virtual coins at the bond exchange rate.

    ``(B_r / B_v) * price``, evaluated exactly and rounded half-even to four
    fractional digits.
    """
    amount = _exact(price)
    if amount < 0:
        raise InvalidValue(f"price must be non-negative, got {price!r}")
    exact = Fraction(quote.bond_real_price) * amount / quote.bond_virtual_price
    # round() on a Fraction is exact and rounds half to even
    return Decimal(round(exact * 10000)).scaleb(-4).quantize(Decimal("0.0001"))


def real_value_series(series: PriceSeries, quote: BondQuote) -> RealValueSeries:
    return RealValueSeries(series.item_id, tuple(to_real_value(p, quote) for p in series.prices))


def log_series(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveValue("logarithm requires strictly positive values")
    return np.log(arr)


def first_difference(values: Sequence) -> np.ndarray:
    """``out[t] = values[t+1] - values[t]``; integer input stays integer."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise SeriesTooShort(f"first difference needs at least 2 values, got {arr.size}")
    return np.diff(arr)


def cumulative_from(seed, differences: Sequence) -> np.ndarray:
    """Inverse of :func:`first_difference` given the first value."""
    diffs = np.asarray(differences)
    out = np.empty(diffs.shape[0] + 1, dtype=np.result_type(diffs, np.asarray(seed)))
    out[0] = seed
    np.cumsum(diffs, out=out[1:])
    out[1:] += seed
    return out


def pct_returns(values: Sequence) -> np.ndarray:
    """Simple day-over-day returns ``(v[t+1] - v[t]) / v[t]``.

    For integer input the numerator is an exact integer, so each return is
    the correctly rounded quotient of two exact values. Scaling the series
    by an integer leaves every return bit-identical.
    """
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise SeriesTooShort(f"returns need at least 2 values, got {arr.size}")
    if np.any(~(arr > 0)):
        raise NonPositiveValue("returns require strictly positive values")
    return np.diff(arr) / arr[:-1]
