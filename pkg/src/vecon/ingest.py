"""Loading, validating, aligning and persisting price and volume data.

Item price documents mirror the exchange's graph endpoint::

    {"daily": {"1528848000000": 1520, "1528934400000": 1533, ...}, ...}

Keys are epoch milliseconds (UTC), values integer coin prices. Unknown
sibling keys are ignored.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import requests

from .errors import (
    DuplicateDay,
    DuplicateItem,
    EmptySeries,
    InsufficientCoverage,
    InvalidValue,
    MalformedDocument,
    MalformedSnapshotFile,
    MissingFixture,
    NonPositivePrice,
    NonPositiveVolume,
    NoOverlap,
    SchemaVersionMismatch,
    SourceUnavailable,
)
from .model import AnalysisWindow, BondQuote, PriceSeries, Snapshot, VolumeRecord

log = logging.getLogger(__name__)

EPOCH = dt.date(1970, 1, 1)
MS_PER_DAY = 86_400_000
SNAPSHOT_SCHEMA = "vecon-snapshot-v1"
SOURCE_ENV = "VECON_SOURCE"
FIXTURE_PATTERN = re.compile(r"^item_(\d+)\.json$")


# --------------------------------------------------------------------------
# parsing

def _strict_int(value, what: str, exc=MalformedDocument) -> int:
    if isinstance(value, bool):
        raise exc(f"{what}: {value!r} is not an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and re.fullmatch(r"[+-]?\d+", value.strip()):
        return int(value)
    raise exc(f"{what}: {value!r} is not an integer")


def parse_item_document(text, item_id: int, origin: dt.date = EPOCH, name: Optional[str] = None) -> PriceSeries:
    """Parse one item's price document.

    Day indexes count whole UTC days from ``origin``; pass the window start
    to get window ordinals directly.
    """
    try:
        doc = json.loads(text)
    except (TypeError, ValueError) as exc:
        raise MalformedDocument(f"item {item_id}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "daily" not in doc or not isinstance(doc["daily"], dict):
        raise MalformedDocument(f"item {item_id}: document has no 'daily' object")
    daily = doc["daily"]
    if not daily:
        raise EmptySeries(f"item {item_id}: no daily entries")
    offset = (origin - EPOCH).days
    by_day: Dict[int, int] = {}
    for key, raw_price in daily.items():
        ms = _strict_int(key, f"item {item_id} timestamp")
        price = _strict_int(raw_price, f"item {item_id} price")
        if price <= 0:
            raise NonPositivePrice(f"item {item_id}: price {price} at {key}")
        day = ms // MS_PER_DAY - offset
        if day in by_day:
            raise DuplicateDay(f"item {item_id}: two entries fall on day {day}")
        by_day[day] = price
    days = sorted(by_day)
    return PriceSeries(item_id, tuple(days), tuple(by_day[d] for d in days), name)


def parse_volume_table(text: str) -> List[VolumeRecord]:
    """Parse an ``item_id,volume`` CSV, most traded first (ties by item_id)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedDocument("volume table is empty") from None
    if [h.strip() for h in header] != ["item_id", "volume"]:
        raise MalformedDocument(f"volume table header must be 'item_id,volume', got {header}")
    records, seen = [], set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise MalformedDocument(f"volume table line {lineno}: expected 2 fields, got {len(row)}")
        item_id = _strict_int(row[0], f"volume table line {lineno} item_id")
        volume = _strict_int(row[1], f"volume table line {lineno} volume")
        if volume <= 0:
            raise NonPositiveVolume(f"volume table line {lineno}: volume {volume} for item {item_id}")
        if item_id in seen:
            raise DuplicateItem(f"volume table line {lineno}: item {item_id} repeated")
        seen.add(item_id)
        try:
            records.append(VolumeRecord(item_id, volume))
        except InvalidValue as exc:
            raise MalformedDocument(f"volume table line {lineno}: {exc}") from exc
    records.sort(key=lambda r: (-r.volume, r.item_id))
    return records


def format_volume_table(records: Iterable[VolumeRecord]) -> str:
    lines = ["item_id,volume"]
    lines += [f"{r.item_id},{r.volume}" for r in records]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# fetching

@dataclass(frozen=True)
class FetchPolicy:
    min_request_interval_ms: int = 200
    max_retries: int = 3
    backoff_base_ms: int = 500
    timeout_s: float = 10.0

    def __post_init__(self):
        if self.min_request_interval_ms < 0:
            raise InvalidValue("min_request_interval_ms must be non-negative")
        if self.max_retries < 0:
            raise InvalidValue("max_retries must be non-negative")
        if self.backoff_base_ms <= 0:
            raise InvalidValue("backoff_base_ms must be positive")

    def backoff_ms(self, attempt: int) -> int:
        """Delay before retry number ``attempt`` (1-based)."""
        return self.backoff_base_ms * 2 ** (attempt - 1)


class RateLimiter:
    """Serialises dispatches so consecutive requests are at least ``interval`` apart."""

    def __init__(self, interval_s: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval_s = interval_s
        self._clock = clock
        self._sleep = sleep
        self._last: Optional[float] = None

    def wait(self) -> None:
        if self._last is not None:
            remaining = self._last + self.interval_s - self._clock()
            if remaining > 0:
                self._sleep(remaining)
        self._last = self._clock()


def is_remote(source) -> bool:
    return isinstance(source, str) and source.startswith(("http://", "https://"))


def resolve_source(source=None):
    """Explicit source, else ``$VECON_SOURCE``."""
    if source:
        return source
    env = os.environ.get(SOURCE_ENV)
    if env:
        return env
    raise SourceUnavailable(f"no data source given and ${SOURCE_ENV} is not set")


def fixture_item_ids(directory) -> List[int]:
    """Item ids of every ``item_<id>.json`` file in a fixture directory."""
    path = Path(directory)
    if not path.is_dir():
        raise SourceUnavailable(f"fixture directory {path} does not exist")
    ids = []
    for entry in path.iterdir():
        m = FIXTURE_PATTERN.match(entry.name)
        if m:
            ids.append(int(m.group(1)))
    return sorted(ids)


_RETRYABLE_STATUS = {408, 425, 429, 500, 502, 503, 504}


def _fetch_one(session, url: str, policy: FetchPolicy, limiter: RateLimiter, sleep) -> str:
    last_error = None
    for attempt in range(policy.max_retries + 1):
        if attempt:
            delay = policy.backoff_ms(attempt) / 1000.0
            log.info("retrying %s in %.3fs (attempt %d)", url, delay, attempt)
            sleep(delay)
        limiter.wait()
        try:
            resp = session.get(url, timeout=policy.timeout_s)
        except requests.RequestException as exc:
            last_error = f"{type(exc).__name__}: {exc}"
            continue
        if resp.status_code == 200:
            return resp.text
        last_error = f"HTTP {resp.status_code}"
        if resp.status_code not in _RETRYABLE_STATUS:
            break
    raise SourceUnavailable(f"{url}: {last_error}")


def fetch_documents(item_ids: Sequence[int], policy: FetchPolicy = FetchPolicy(), source=None,
                    session=None, sleep: Callable[[float], None] = time.sleep,
                    clock: Callable[[], float] = time.monotonic) -> Dict[int, str]:
    """Raw price documents for ``item_ids``.

    ``source`` is either an endpoint base URL (``<base>/<id>.json`` is
    requested) or a directory holding ``item_<id>.json`` files.
    """
    source = resolve_source(source)
    docs: Dict[int, str] = {}
    if not is_remote(source):
        directory = Path(source)
        if not directory.is_dir():
            raise SourceUnavailable(f"fixture directory {directory} does not exist")
        for item_id in item_ids:
            path = directory / f"item_{item_id}.json"
            try:
                docs[item_id] = path.read_text(encoding="utf-8")
            except FileNotFoundError:
                raise MissingFixture(f"no fixture file {path}") from None
        return docs

    base = source.rstrip("/")
    limiter = RateLimiter(policy.min_request_interval_ms / 1000.0, clock=clock, sleep=sleep)
    own_session = session is None
    session = session or requests.Session()
    try:
        for item_id in item_ids:
            docs[item_id] = _fetch_one(session, f"{base}/{item_id}.json", policy, limiter, sleep)
    finally:
        if own_session:
            session.close()
    return docs


# --------------------------------------------------------------------------
# cleaning

@dataclass(frozen=True)
class ExclusionReport:
    retained_count: int
    excluded_ids: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {"retained_count": self.retained_count, "excluded_count": len(self.excluded_ids),
                "excluded_ids": list(self.excluded_ids)}


def filter_static(series_set: Iterable[PriceSeries]) -> Tuple[list, ExclusionReport]:
    """Drop series whose price never moves over the whole window."""
    kept, dropped = [], []
    for s in series_set:
        if max(s.prices) == min(s.prices):
            dropped.append(s.item_id)
        else:
            kept.append(s)
    return kept, ExclusionReport(len(kept), tuple(sorted(dropped)))


def align_window(series_set: Iterable[PriceSeries], window: AnalysisWindow,
                 min_coverage: float = 0.90) -> list:
    """Put every series on days ``0..length_days-1`` of the window.

    Day indexes are read relative to the window start. Missing days are
    forward-filled from the last earlier observation; days before the first
    in-window observation are back-filled from it. Observations outside the
    window are ignored.
    """
    if not 0 <= min_coverage <= 1:
        raise InvalidValue(f"min_coverage must be in [0, 1], got {min_coverage}")
    T = window.length_days
    out = []
    for s in series_set:
        inside = [(d, p) for d, p in zip(s.days, s.prices) if 0 <= d < T]
        if not inside:
            raise NoOverlap(f"item {s.item_id} has no observations inside the window")
        coverage = len(inside) / T
        if coverage < min_coverage:
            raise InsufficientCoverage(
                f"item {s.item_id} covers {coverage:.1%} of the window (< {min_coverage:.0%})"
            )
        if len(inside) == T:
            out.append(s if s.days == tuple(range(T)) else PriceSeries.contiguous(s.item_id, [p for _, p in inside], s.name))
            continue
        observed = dict(inside)
        current = inside[0][1]
        prices = []
        for d in range(T):
            current = observed.get(d, current)
            prices.append(current)
        out.append(PriceSeries.contiguous(s.item_id, prices, s.name))
    return out


# --------------------------------------------------------------------------
# canonical snapshot files

def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_snapshot(snapshot: Snapshot, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema": SNAPSHOT_SCHEMA,
        "window_start": snapshot.window.start_day.isoformat(),
        "length_days": snapshot.window.length_days,
        "bond": snapshot.bond.to_json() if snapshot.bond else None,
        "names": {str(s.item_id): s.name for s in snapshot.series if s.name is not None},
    }
    _atomic_write_text(directory / "meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    buf.write("item_id,day_index,price\n")
    for s in snapshot.series:
        item = s.item_id
        buf.writelines(f"{item},{d},{p}\n" for d, p in zip(s.days, s.prices))
    _atomic_write_text(directory / "prices.csv", buf.getvalue())
    vol_path = directory / "volumes.csv"
    if snapshot.volumes is not None:
        _atomic_write_text(vol_path, format_volume_table(snapshot.volumes))
    elif vol_path.exists():
        vol_path.unlink()
    return directory


def load_snapshot(directory) -> Snapshot:
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not directory.is_dir():
        raise SourceUnavailable(f"snapshot directory {directory} does not exist")
    if not meta_path.is_file():
        raise SourceUnavailable(f"{directory} has no meta.json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise MalformedSnapshotFile(f"{meta_path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise MalformedSnapshotFile(f"{meta_path}: expected a JSON object")
    schema = meta.get("schema")
    if schema != SNAPSHOT_SCHEMA:
        raise SchemaVersionMismatch(f"{meta_path}: schema {schema!r}, expected {SNAPSHOT_SCHEMA!r}")
    try:
        window = AnalysisWindow(dt.date.fromisoformat(meta["window_start"]), meta["length_days"])
        bond = BondQuote.from_json(meta["bond"]) if meta.get("bond") else None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedSnapshotFile(f"{meta_path}: {exc}") from exc
    names = meta.get("names") or {}

    prices_path = directory / "prices.csv"
    try:
        text = prices_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MalformedSnapshotFile(f"{prices_path} is missing") from None
    rows: Dict[int, list] = {}
    lines = text.splitlines()
    if not lines or lines[0].strip() != "item_id,day_index,price":
        raise MalformedSnapshotFile(f"{prices_path}: bad header")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedSnapshotFile(f"{prices_path} line {lineno}: expected 3 fields")
        try:
            item, day, price = (_strict_int(p, "field", MalformedSnapshotFile) for p in parts)
        except MalformedSnapshotFile as exc:
            raise MalformedSnapshotFile(f"{prices_path} line {lineno}: {exc}") from None
        rows.setdefault(item, []).append((day, price))
    try:
        series = []
        for item in sorted(rows):
            obs = sorted(rows[item])
            series.append(PriceSeries(item, tuple(d for d, _ in obs), tuple(p for _, p in obs),
                                      names.get(str(item))))
        volumes = None
        vol_path = directory / "volumes.csv"
        if vol_path.is_file():
            volumes = parse_volume_table(vol_path.read_text(encoding="utf-8"))
        return Snapshot(window, tuple(series), tuple(volumes) if volumes is not None else None, bond)
    except MalformedDocument as exc:
        raise MalformedSnapshotFile(f"{directory}: {exc}") from exc
    except InvalidValue as exc:
        raise MalformedSnapshotFile(f"{directory}: {exc}") from exc


# --------------------------------------------------------------------------
# end to end

def ingest(source, window: AnalysisWindow, item_ids: Optional[Sequence[int]] = None,
           volumes_path=None, bond: Optional[BondQuote] = None,
           policy: FetchPolicy = FetchPolicy(), min_coverage: float = 0.90) -> Snapshot:
    """Fetch (or read), parse and align every item into a :class:`Snapshot`.

    In fixture mode ``item_ids`` defaults to every ``item_<id>.json`` file
    and ``volumes.csv`` in the same directory is picked up when present.
    Static series are kept; filtering is the analysis step's job.
    """
    source = resolve_source(source)
    if item_ids is None:
        if is_remote(source):
            raise InvalidValue("item ids are required when fetching from an endpoint")
        item_ids = fixture_item_ids(source)
        if volumes_path is None and (Path(source) / "volumes.csv").is_file():
            volumes_path = Path(source) / "volumes.csv"
    docs = fetch_documents(item_ids, policy, source)
    parsed = [parse_item_document(docs[i], i, origin=window.start_day) for i in item_ids]
    aligned = align_window(parsed, window, min_coverage)
    volumes = None
    if volumes_path is not None:
        try:
            volumes = parse_volume_table(Path(volumes_path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SourceUnavailable(f"volume table {volumes_path} not found") from None
    return Snapshot(window, tuple(aligned), tuple(volumes) if volumes is not None else None, bond)
