"""Parsers for raw interaction logs and the canonical CSV interchange format.

Supported inputs are the tab-separated MovieLens 100K layout, the
"::"-separated MovieLens 1M/10M layout, and comma-separated ratings dumps
with a configurable column order. Every parser produces the same in-memory
dataset with dense index maps assigned in first-appearance order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError

CANONICAL_HEADER = ("user_id", "item_id", "rating", "timestamp")

#: sentinel stored in the timestamp column for rows without one
NO_TIMESTAMP = -1

#: (min_rating, max_rating, step) declared per source format. ``ml_dat``
#: serves both the 1M and 10M dumps, so it carries the wider half-star
#: scale; only the bounds are enforced, the step is descriptive metadata
#: (averaged duplicate ratings are not step-aligned).
FORMAT_SCALES: dict[str, tuple[float, float, float]] = {
    "ml100k_tsv": (1.0, 5.0, 1.0),
    "ml_dat": (0.5, 5.0, 0.5),
    "amazon_csv": (1.0, 5.0, 1.0),
    "canonical_csv": (0.5, 5.0, 0.5),
}

#: environment variable naming a default root directory for dataset files
DATA_DIR_ENV = "GREENLENS_DATA_DIR"

_FIELD_NAMES = ("user", "item", "rating", "timestamp")
_DEFAULT_COLUMNS = _FIELD_NAMES


@dataclass(frozen=True)
class Interaction:
    """One (user, item, rating, timestamp) event with external identifiers."""

    user_id: str
    item_id: str
    rating: float
    timestamp: int | None = None


@dataclass(frozen=True)
class StatsRow:
    """Summary counts for a dataset.

    The per-user and per-item averages are integer-truncated
    (``n_interactions // n_users``), which is how the published summary
    tables for these datasets report them.
    """

    n_users: int
    n_items: int
    n_interactions: int
    avg_int_per_user: int
    avg_int_per_item: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (
            self.n_users,
            self.n_items,
            self.n_interactions,
            self.avg_int_per_user,
            self.avg_int_per_item,
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_interactions": self.n_interactions,
            "avg_int_per_user": self.avg_int_per_user,
            "avg_int_per_item": self.avg_int_per_item,
        }


class InteractionDataset:
    """Column-oriented interaction log with dense bijective index maps.

    Instances are immutable after construction (the numpy columns are
    marked read-only) and safe to share across threads.
    """

    def __init__(
        self,
        user_ids: list[str],
        item_ids: list[str],
        users: np.ndarray,
        items: np.ndarray,
        ratings: np.ndarray,
        timestamps: np.ndarray,
        scale: tuple[float, float, float],
    ):
        self.user_ids = user_ids
        self.item_ids = item_ids
        self.user_index = {uid: idx for idx, uid in enumerate(user_ids)}
        self.item_index = {iid: idx for idx, iid in enumerate(item_ids)}
        self.users = np.ascontiguousarray(users, dtype=np.int64)
        self.items = np.ascontiguousarray(items, dtype=np.int64)
        self.ratings = np.ascontiguousarray(ratings, dtype=np.float64)
        self.timestamps = np.ascontiguousarray(timestamps, dtype=np.int64)
        self.scale = scale
        for arr in (self.users, self.items, self.ratings, self.timestamps):
            arr.flags.writeable = False

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    def __len__(self) -> int:
        return self.users.shape[0]

    def interaction(self, row: int) -> Interaction:
        ts = int(self.timestamps[row])
        return Interaction(
            user_id=self.user_ids[self.users[row]],
            item_id=self.item_ids[self.items[row]],
            rating=float(self.ratings[row]),
            timestamp=None if ts == NO_TIMESTAMP else ts,
        )

    def interactions(self) -> Iterator[Interaction]:
        for row in range(len(self)):
            yield self.interaction(row)


def dataset_from_rows(
    rows: Sequence[tuple[str, str, float, int | None]],
    scale: tuple[float, float, float],
) -> InteractionDataset:
    """Build a dataset from (user_id, item_id, rating, timestamp) tuples.

    Dense indices are assigned in first-appearance order over the row
    sequence.
    """
    user_ids: list[str] = []
    item_ids: list[str] = []
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    users = array("q")
    items = array("q")
    ratings = array("d")
    timestamps = array("q")
    for uid, iid, rating, ts in rows:
        u = user_index.get(uid)
        if u is None:
            u = len(user_ids)
            user_index[uid] = u
            user_ids.append(uid)
        i = item_index.get(iid)
        if i is None:
            i = len(item_ids)
            item_index[iid] = i
            item_ids.append(iid)
        users.append(u)
        items.append(i)
        ratings.append(rating)
        timestamps.append(NO_TIMESTAMP if ts is None else ts)
    return InteractionDataset(
        user_ids=user_ids,
        item_ids=item_ids,
        users=np.frombuffer(users, dtype=np.int64) if len(users) else np.empty(0, np.int64),
        items=np.frombuffer(items, dtype=np.int64) if len(items) else np.empty(0, np.int64),
        ratings=np.frombuffer(ratings, dtype=np.float64) if len(ratings) else np.empty(0, np.float64),
        timestamps=np.frombuffer(timestamps, dtype=np.int64) if len(timestamps) else np.empty(0, np.int64),
        scale=scale,
    )


def _check_rating(value: str, scale: tuple[float, float, float], path: Path, lineno: int) -> float:
    try:
        rating = float(value)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-numeric rating {value!r}") from None
    lo, hi, _step = scale
    if not lo <= rating <= hi:
        raise DataError(
            f"{path}:{lineno}: rating {rating} outside declared scale [{lo}, {hi}]"
        )
    return rating


def _check_timestamp(value: str, path: Path, lineno: int) -> int | None:
    if value == "":
        return None
    try:
        ts = int(value)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-integer timestamp {value!r}") from None
    if ts < 0:
        raise DataError(f"{path}:{lineno}: negative timestamp {ts}")
    return ts


def _normalize_column_order(column_order: Sequence[str] | None) -> tuple[str, ...]:
    if column_order is None:
        return _DEFAULT_COLUMNS
    cols = tuple(column_order)
    if sorted(cols) not in (sorted(_FIELD_NAMES), sorted(_FIELD_NAMES[:3])):
        raise DataError(
            "column_order must be a permutation of "
            f"{_FIELD_NAMES} or {_FIELD_NAMES[:3]}, got {cols}"
        )
    return cols


def _parse_separated(path: Path, sep: str, scale) -> list[tuple[str, str, float, int | None]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split(sep)
            if len(fields) != 4:
                raise DataError(
                    f"{path}:{lineno}: expected 4 fields separated by {sep!r}, got {len(fields)}"
                )
            uid, iid, rating_s, ts_s = fields
            rating = _check_rating(rating_s, scale, path, lineno)
            ts = _check_timestamp(ts_s, path, lineno)
            rows.append((uid, iid, rating, ts))
    return rows


def _parse_csv(
    path: Path,
    scale,
    column_order: tuple[str, ...],
    require_header: bool,
) -> list[tuple[str, str, float, int | None]]:
    pos = {name: column_order.index(name) for name in column_order}
    n_fields = len(column_order)
    has_ts = "timestamp" in pos
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if not fields or (len(fields) == 1 and fields[0] == ""):
                continue
            if lineno == 1:
                if require_header:
                    if tuple(fields) != CANONICAL_HEADER:
                        raise DataError(f"{path}:1: missing canonical header line")
                    continue
                # A non-numeric rating field on the first row marks a header.
                probe = fields[pos["rating"]] if len(fields) == n_fields else None
                if probe is None or not _is_float(probe):
                    continue
            if len(fields) != n_fields:
                raise DataError(
                    f"{path}:{lineno}: expected {n_fields} comma-separated fields, got {len(fields)}"
                )
            uid = fields[pos["user"]]
            iid = fields[pos["item"]]
            rating = _check_rating(fields[pos["rating"]], scale, path, lineno)
            ts = _check_timestamp(fields[pos["timestamp"]], path, lineno) if has_ts else None
            rows.append((uid, iid, rating, ts))
    return rows


def _is_float(value: str) -> bool:
    try:
        float(value)
        return True
    except ValueError:
        return False


def parse_interactions(
    path: str | Path,
    format: str,
    column_order: Sequence[str] | None = None,
) -> InteractionDataset:
    """Parse a raw ratings file into an :class:`InteractionDataset`.

    ``format`` is one of ``ml100k_tsv`` (tab-separated), ``ml_dat``
    ("::"-separated), ``amazon_csv`` (comma-separated, optional header,
    column order configurable via ``column_order``), or ``canonical_csv``
    (the output of :func:`write_canonical_csv`). Malformed rows raise
    :class:`DataError` naming the offending line.
    """
    path = Path(path)
    if format not in FORMAT_SCALES:
        raise DataError(f"unknown format {format!r}; expected one of {sorted(FORMAT_SCALES)}")
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    scale = FORMAT_SCALES[format]
    if format == "ml100k_tsv":
        rows = _parse_separated(path, "\t", scale)
    elif format == "ml_dat":
        rows = _parse_separated(path, "::", scale)
    elif format == "amazon_csv":
        cols = _normalize_column_order(column_order)
        rows = _parse_csv(path, scale, cols, require_header=False)
    else:
        rows = _parse_csv(path, scale, _DEFAULT_COLUMNS, require_header=True)
    return dataset_from_rows(rows, scale)


def dataset_stats(ds: InteractionDataset) -> StatsRow:
    """Counts and truncated per-user/per-item averages for ``ds``."""
    n = len(ds)
    if n == 0:
        raise DataError("cannot compute statistics of an empty dataset")
    return StatsRow(
        n_users=ds.n_users,
        n_items=ds.n_items,
        n_interactions=n,
        avg_int_per_user=n // ds.n_users,
        avg_int_per_item=n // ds.n_items,
    )


def _format_rating(rating: float) -> str:
    return repr(rating)


def write_canonical_csv(ds: InteractionDataset, path: str | Path) -> None:
    """Write ``ds`` in the canonical interchange format.

    Header ``user_id,item_id,rating,timestamp``, UTF-8, one newline-terminated
    row per interaction in dataset order; the timestamp field is blank for
    rows without one. Ratings use the shortest round-tripping decimal form.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_canonical(ds, fh)


def canonical_csv_bytes(ds: InteractionDataset) -> bytes:
    buf = io.StringIO()
    _write_canonical(ds, buf)
    return buf.getvalue().encode("utf-8")


def dataset_fingerprint(ds: InteractionDataset) -> str:
    """Content hash (sha256 hex) of the dataset's canonical CSV form."""
    return hashlib.sha256(canonical_csv_bytes(ds)).hexdigest()


def _write_canonical(ds: InteractionDataset, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    user_ids = ds.user_ids
    item_ids = ds.item_ids
    for row in range(len(ds)):
        ts = ds.timestamps[row]
        writer.writerow(
            (
                user_ids[ds.users[row]],
                item_ids[ds.items[row]],
                _format_rating(float(ds.ratings[row])),
                "" if ts == NO_TIMESTAMP else str(int(ts)),
            )
        )


def read_canonical_csv(path: str | Path) -> InteractionDataset:
    """Parse a file previously written by :func:`write_canonical_csv`."""
    return parse_interactions(path, "canonical_csv")


def resolve_data_path(path: str | Path) -> Path:
    """Resolve a dataset path, falling back to the configured data root.

    Relative paths that do not exist from the working directory are looked
    up under ``$GREENLENS_DATA_DIR`` when that variable is set.
    """
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    root = os.environ.get(DATA_DIR_ENV)
    if root:
        candidate = Path(root) / p
        if candidate.exists():
            return candidate
    return p
