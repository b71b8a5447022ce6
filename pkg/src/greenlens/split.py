"""User-based holdout splitting and nested per-user training downsamples.

Randomness comes from numpy's PCG64 generator. Each user draws from an
independent stream seeded by ``SeedSequence([seed, user_index])``, so the
split is reproducible across platforms and independent of user iteration
order. Downsampled training sets are prefixes of one stored per-user
shuffle, which makes them nested across fractions under a single seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .ingest import (
    InteractionDataset,
    dataset_fingerprint,
    read_canonical_csv,
    write_canonical_csv,
)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SplitRatios:
    test_frac: float = 0.1
    valid_frac: float = 0.1

    def __post_init__(self):
        for name, value in (("test_frac", self.test_frac), ("valid_frac", self.valid_frac)):
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.test_frac + self.valid_frac >= 1.0:
            raise ConfigError(
                f"test_frac + valid_frac must be < 1, got {self.test_frac + self.valid_frac}"
            )


@dataclass(frozen=True)
class DownsampleLevel:
    fraction: float

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError(f"fraction must lie in (0, 1], got {self.fraction}")


DEFAULT_FRACTIONS = tuple(DownsampleLevel(round(f / 10, 1)) for f in range(1, 11))


def round_half_up(x: float) -> int:
    # The nudge keeps decimal halves (e.g. 0.3 * 5) from landing just below
    # .5 in binary and rounding down.
    return int(math.floor(x + 0.5 + 1e-9))


def part_sizes(n_interactions: int, ratios: SplitRatios) -> tuple[int, int, int]:
    """Per-user (test, validation, train) counts with a floor of one each."""
    n_test = max(1, round_half_up(ratios.test_frac * n_interactions))
    n_valid = max(1, round_half_up(ratios.valid_frac * n_interactions))
    return n_test, n_valid, n_interactions - n_test - n_valid


class SplitBundle:
    """Disjoint per-user train/validation/test partitions of a dataset.

    ``train_order[u]`` holds user ``u``'s training rows (indices into the
    dataset's columns) in stored shuffle order; downsampling takes prefixes
    of it. Immutable after construction.
    """

    def __init__(
        self,
        ds: InteractionDataset,
        ratios: SplitRatios,
        seed: int,
        train_order: list[np.ndarray],
        valid_rows: list[np.ndarray],
        test_rows: list[np.ndarray],
    ):
        self.ds = ds
        self.ratios = ratios
        self.seed = seed
        self.train_order = train_order
        self.valid_rows = valid_rows
        self.test_rows = test_rows

    @property
    def n_users(self) -> int:
        return self.ds.n_users

    def train_items_by_user(self) -> list[np.ndarray]:
        return [self.ds.items[rows] for rows in self.train_order]

    def valid_items_by_user(self) -> list[np.ndarray]:
        return [self.ds.items[rows] for rows in self.valid_rows]

    def test_items_by_user(self) -> list[np.ndarray]:
        return [self.ds.items[rows] for rows in self.test_rows]


@dataclass(frozen=True)
class TrainSubset:
    """A (possibly downsampled) training set in dense-index form."""

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    items_by_user: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.users)


def _user_rng(seed: int, user: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, user]))


def user_holdout_split(
    ds: InteractionDataset, ratios: SplitRatios, seed: int
) -> SplitBundle:
    """Split each user's interactions into test/validation/train parts.

    For every user independently, a seeded shuffle of that user's rows (in
    dataset order) assigns the first ``test`` block to the test set, the
    next block to validation, and the remainder to training. Users need at
    least 3 interactions so every part is non-empty.
    """
    n = len(ds)
    order = np.argsort(ds.users, kind="stable")
    boundaries = np.searchsorted(ds.users[order], np.arange(ds.n_users + 1))
    train_order: list[np.ndarray] = []
    valid_rows: list[np.ndarray] = []
    test_rows: list[np.ndarray] = []
    for u in range(ds.n_users):
        rows_u = order[boundaries[u] : boundaries[u + 1]]
        n_u = len(rows_u)
        if n_u < 3:
            raise DataError(
                f"user {ds.user_ids[u]!r} has only {n_u} interaction(s); "
                "at least 3 are required (was the dataset preprocessed?)"
            )
        n_test, n_valid, n_train = part_sizes(n_u, ratios)
        if n_train < 1:
            raise DataError(
                f"user {ds.user_ids[u]!r} has too few interactions ({n_u}) "
                f"for ratios ({ratios.test_frac}, {ratios.valid_frac})"
            )
        shuffled = rows_u[_user_rng(seed, u).permutation(n_u)]
        test_rows.append(np.ascontiguousarray(shuffled[:n_test]))
        valid_rows.append(np.ascontiguousarray(shuffled[n_test : n_test + n_valid]))
        train_order.append(np.ascontiguousarray(shuffled[n_test + n_valid :]))
    return SplitBundle(ds, ratios, seed, train_order, valid_rows, test_rows)


def downsample_train(bundle: SplitBundle, level: DownsampleLevel) -> TrainSubset:
    """Per-user prefix of the stored training shuffle at the given fraction.

    Each user keeps ``max(1, round_half_up(fraction * n_train))`` of their
    training interactions, so every user stays represented and subsets are
    nested across fractions.
    """
    ds = bundle.ds
    prefixes = []
    for rows in bundle.train_order:
        m = max(1, round_half_up(level.fraction * len(rows)))
        prefixes.append(rows[:m])
    all_rows = (
        np.concatenate(prefixes) if prefixes else np.empty(0, dtype=np.int64)
    )
    return TrainSubset(
        n_users=ds.n_users,
        n_items=ds.n_items,
        users=ds.users[all_rows],
        items=ds.items[all_rows],
        ratings=ds.ratings[all_rows],
        items_by_user=[ds.items[rows] for rows in prefixes],
    )


def full_train(bundle: SplitBundle) -> TrainSubset:
    return downsample_train(bundle, DownsampleLevel(1.0))


def _rows_subset(ds: InteractionDataset, rows_by_user: list[np.ndarray]) -> InteractionDataset:
    all_rows = (
        np.concatenate(rows_by_user) if rows_by_user else np.empty(0, dtype=np.int64)
    )
    return InteractionDataset(
        user_ids=ds.user_ids,
        item_ids=ds.item_ids,
        users=ds.users[all_rows],
        items=ds.items[all_rows],
        ratings=ds.ratings[all_rows],
        timestamps=ds.timestamps[all_rows],
        scale=ds.scale,
    )


def save_bundle(bundle: SplitBundle, out_dir: str | Path) -> None:
    """Persist a bundle as train/validation/test CSVs plus a manifest.

    ``train.csv`` rows appear in stored shuffle order (grouped by user), so
    reloading recovers the exact per-user training permutation.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = bundle.ds
    write_canonical_csv(_rows_subset(ds, bundle.train_order), out / "train.csv")
    write_canonical_csv(_rows_subset(ds, bundle.valid_rows), out / "validation.csv")
    write_canonical_csv(_rows_subset(ds, bundle.test_rows), out / "test.csv")
    manifest = {
        "seed": bundle.seed,
        "test_frac": bundle.ratios.test_frac,
        "valid_frac": bundle.ratios.valid_frac,
        "dataset_fingerprint": dataset_fingerprint(ds),
        "rng": "numpy PCG64, per-user SeedSequence([seed, user_index])",
        "per_user_counts": {
            ds.user_ids[u]: {
                "train": len(bundle.train_order[u]),
                "validation": len(bundle.valid_rows[u]),
                "test": len(bundle.test_rows[u]),
            }
            for u in range(ds.n_users)
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_bundle(in_dir: str | Path, ds: InteractionDataset) -> SplitBundle:
    """Rebuild a bundle saved by :func:`save_bundle` against ``ds``."""
    src = Path(in_dir)
    manifest = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
    if manifest["dataset_fingerprint"] != dataset_fingerprint(ds):
        raise DataError(
            f"split in {src} was built from a different dataset "
            "(fingerprint mismatch)"
        )
    ratios = SplitRatios(manifest["test_frac"], manifest["valid_frac"])

    # Map each part's rows back to dataset row indices. Pairs are unique in
    # a preprocessed dataset, so a (user, item) key identifies the row.
    row_of_pair = {
        (int(ds.users[r]), int(ds.items[r])): r for r in range(len(ds))
    }

    def part_rows(name: str) -> list[np.ndarray]:
        part = read_canonical_csv(src / name)
        per_user: list[list[int]] = [[] for _ in range(ds.n_users)]
        for row in range(len(part)):
            uid = part.user_ids[part.users[row]]
            iid = part.item_ids[part.items[row]]
            try:
                u = ds.user_index[uid]
                i = ds.item_index[iid]
                ds_row = row_of_pair[(u, i)]
            except KeyError:
                raise DataError(
                    f"{src / name}: interaction ({uid!r}, {iid!r}) not in dataset"
                ) from None
            per_user[u].append(ds_row)
        return [np.asarray(rows, dtype=np.int64) for rows in per_user]

    return SplitBundle(
        ds,
        ratios,
        int(manifest["seed"]),
        part_rows("train.csv"),
        part_rows("validation.csv"),
        part_rows("test.csv"),
    )
