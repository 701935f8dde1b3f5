"""Shared domain types.

All types are frozen dataclasses and validate their invariants on
construction; nothing here repairs bad input.

Prices are integer virtual coins. Day indexes are ordinals relative to an
origin date (the window start once a series is aligned), never wall-clock
timestamps.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateItem,
    InvalidValue,
    NonPositivePrice,
    NonPositiveVolume,
)

MONEY_PLACES = Decimal("0.0001")
DEFAULT_WINDOW_DAYS = 180


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def to_money(value) -> Decimal:
    """Coerce to a 4-place Decimal, rejecting values that would need rounding."""
    try:
        dec = Decimal(str(value)) if not isinstance(value, Decimal) else value
    except InvalidOperation as exc:
        raise InvalidValue(f"not a decimal amount: {value!r}") from exc
    if not dec.is_finite():
        raise InvalidValue(f"not a finite amount: {value!r}")
    fixed = dec.quantize(MONEY_PLACES)
    if fixed != dec:
        raise InvalidValue(f"{value!r} has more than 4 fractional digits")
    return fixed


@dataclass(frozen=True)
class AnalysisWindow:
    start_day: dt.date
    length_days: int = DEFAULT_WINDOW_DAYS

    def __post_init__(self):
        if isinstance(self.start_day, str):
            object.__setattr__(self, "start_day", dt.date.fromisoformat(self.start_day))
        if not isinstance(self.start_day, dt.date) or isinstance(self.start_day, dt.datetime):
            raise InvalidValue(f"start_day must be a date, got {self.start_day!r}")
        if not _is_int(self.length_days) or self.length_days < 2:
            raise InvalidValue(f"length_days must be an integer >= 2, got {self.length_days!r}")
        object.__setattr__(self, "length_days", int(self.length_days))

    @property
    def end_day(self) -> dt.date:
        """Last calendar day inside the window (inclusive)."""
        return self.start_day + dt.timedelta(days=self.length_days - 1)

    @classmethod
    def ending(cls, last_day: dt.date, length_days: int = DEFAULT_WINDOW_DAYS) -> "AnalysisWindow":
        return cls(last_day - dt.timedelta(days=length_days - 1), length_days)


@dataclass(frozen=True)
class PriceSeries:
    """Daily price history of one item.

    ``days`` and ``prices`` are parallel tuples; ``days`` is strictly
    increasing.
    """

    item_id: int
    days: tuple
    prices: tuple
    name: Optional[str] = None

    def __post_init__(self):
        if not _is_int(self.item_id) or self.item_id <= 0:
            raise InvalidValue(f"item_id must be a positive integer, got {self.item_id!r}")
        days = tuple(self.days)
        prices = tuple(self.prices)
        if len(days) != len(prices):
            raise InvalidValue(f"item {self.item_id}: {len(days)} days but {len(prices)} prices")
        for d in days:
            if not _is_int(d):
                raise InvalidValue(f"item {self.item_id}: day index {d!r} is not an integer")
        for a, b in zip(days, days[1:]):
            if b <= a:
                raise InvalidValue(f"item {self.item_id}: day indexes not strictly increasing at {b}")
        for p in prices:
            if not _is_int(p):
                raise InvalidValue(f"item {self.item_id}: price {p!r} is not an integer")
            if p <= 0:
                raise NonPositivePrice(f"item {self.item_id}: price {p} is not positive")
        object.__setattr__(self, "item_id", int(self.item_id))
        object.__setattr__(self, "days", tuple(int(d) for d in days))
        object.__setattr__(self, "prices", tuple(int(p) for p in prices))

    @classmethod
    def contiguous(cls, item_id: int, prices: Sequence[int], name: Optional[str] = None) -> "PriceSeries":
        """Series observed on every day 0..len(prices)-1."""
        return cls(item_id, tuple(range(len(prices))), tuple(prices), name)

    def __len__(self) -> int:
        return len(self.prices)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.prices, dtype=np.int64)

    def is_aligned(self, window: AnalysisWindow) -> bool:
        return self.days == tuple(range(window.length_days))


@dataclass(frozen=True)
class VolumeRecord:
    item_id: int
    volume: int

    def __post_init__(self):
        if not _is_int(self.item_id) or self.item_id <= 0:
            raise InvalidValue(f"item_id must be a positive integer, got {self.item_id!r}")
        if not _is_int(self.volume):
            raise InvalidValue(f"item {self.item_id}: volume {self.volume!r} is not an integer")
        if self.volume < 1:
            raise NonPositiveVolume(f"item {self.item_id}: volume {self.volume} is not positive")
        object.__setattr__(self, "item_id", int(self.item_id))
        object.__setattr__(self, "volume", int(self.volume))


@dataclass(frozen=True)
class BondQuote:
    """Official real/virtual exchange rate taken from the developer-sold bond.

    ``bond_real_price`` is real currency per bond (4-place fixed point),
    ``bond_virtual_price`` is virtual coins per bond.
    """

    bond_real_price: Decimal
    bond_virtual_price: int

    def __post_init__(self):
        real = to_money(self.bond_real_price)
        if real <= 0:
            raise InvalidValue(f"bond_real_price must be positive, got {real}")
        if not _is_int(self.bond_virtual_price) or self.bond_virtual_price <= 0:
            raise InvalidValue(
                f"bond_virtual_price must be a positive integer, got {self.bond_virtual_price!r}"
            )
        object.__setattr__(self, "bond_real_price", real)
        object.__setattr__(self, "bond_virtual_price", int(self.bond_virtual_price))

    def to_json(self) -> dict:
        return {
            "bond_real_price": str(self.bond_real_price),
            "bond_virtual_price": self.bond_virtual_price,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "BondQuote":
        return cls(obj["bond_real_price"], obj["bond_virtual_price"])


@dataclass(frozen=True)
class Snapshot:
    """A window's worth of aligned price series plus optional volumes and bond quote.

    ``series`` and ``volumes`` are stored as tuples sorted by item_id; use
    :meth:`get` for keyed access.
    """

    window: AnalysisWindow
    series: tuple
    volumes: Optional[tuple] = None
    bond: Optional[BondQuote] = None
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        series = tuple(sorted(self.series, key=lambda s: s.item_id))
        by_id = {}
        for s in series:
            if s.item_id in by_id:
                raise DuplicateItem(f"item {s.item_id} appears twice in snapshot")
            if not s.is_aligned(self.window):
                raise InvalidValue(
                    f"item {s.item_id} is not aligned to the {self.window.length_days}-day window"
                )
            by_id[s.item_id] = s
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "_by_id", by_id)
        if self.volumes is not None:
            volumes = tuple(sorted(self.volumes, key=lambda v: v.item_id))
            seen = set()
            for v in volumes:
                if v.item_id in seen:
                    raise DuplicateItem(f"item {v.item_id} appears twice in volume table")
                seen.add(v.item_id)
            object.__setattr__(self, "volumes", volumes)

    def __len__(self) -> int:
        return len(self.series)

    def __contains__(self, item_id) -> bool:
        return item_id in self._by_id

    def get(self, item_id: int) -> PriceSeries:
        return self._by_id[item_id]

    @property
    def item_ids(self) -> list:
        return [s.item_id for s in self.series]

    def price_matrix(self, item_ids: Optional[Iterable[int]] = None) -> np.ndarray:
        """(items x days) int64 matrix, rows in the given (or stored) order."""
        ids = self.item_ids if item_ids is None else list(item_ids)
        if not ids:
            return np.zeros((0, self.window.length_days), dtype=np.int64)
        return np.array([self._by_id[i].prices for i in ids], dtype=np.int64)

    def with_series(self, series: Iterable[PriceSeries]) -> "Snapshot":
        return Snapshot(self.window, tuple(series), self.volumes, self.bond)
