"""Cleaning pipeline: duplicate removal, rating averaging, k-core pruning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .ingest import InteractionDataset


@dataclass(frozen=True)
class KCoreParams:
    """Pruning threshold: keep users and items with at least ``k`` interactions."""

    k: int = 10

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"k-core threshold must be a positive integer, got {self.k!r}")


def _rebuild_dataset(
    ds: InteractionDataset,
    users: np.ndarray,
    items: np.ndarray,
    ratings: np.ndarray,
    timestamps: np.ndarray,
) -> InteractionDataset:
    """New dataset from rows expressed in ``ds``'s dense indices.

    Index maps are rebuilt dense over the users/items actually present,
    in first-appearance order of the given row sequence.
    """
    new_users, user_keep = _first_appearance_remap(users, ds.n_users)
    new_items, item_keep = _first_appearance_remap(items, ds.n_items)
    return InteractionDataset(
        user_ids=[ds.user_ids[old] for old in user_keep],
        item_ids=[ds.item_ids[old] for old in item_keep],
        users=new_users,
        items=new_items,
        ratings=ratings,
        timestamps=timestamps,
        scale=ds.scale,
    )


def _first_appearance_remap(values: np.ndarray, n_old: int) -> tuple[np.ndarray, np.ndarray]:
    """Remap ``values`` to dense ids ordered by first appearance.

    Returns the remapped array and the old ids in their new order.
    """
    uniq, first_pos = np.unique(values, return_index=True)
    order = np.argsort(first_pos, kind="stable")
    old_in_new_order = uniq[order]
    lookup = np.full(n_old, -1, dtype=np.int64)
    lookup[old_in_new_order] = np.arange(len(old_in_new_order), dtype=np.int64)
    return lookup[values], old_in_new_order


def dedup_average(ds: InteractionDataset) -> InteractionDataset:
    """Collapse duplicate rows, then average repeated (user, item) ratings.

    Exact duplicate rows (same user, item, rating, and timestamp) are
    counted once before averaging. Each surviving (user, item) pair keeps
    the arithmetic mean of its distinct ratings and the maximum timestamp
    of the group, positioned at the pair's first occurrence.
    """
    n = len(ds)
    if n == 0:
        return _rebuild_dataset(ds, ds.users, ds.items, ds.ratings, ds.timestamps)

    pos = np.arange(n, dtype=np.int64)
    order = np.lexsort((ds.timestamps, ds.ratings, ds.items, ds.users))
    u = ds.users[order]
    i = ds.items[order]
    r = ds.ratings[order]
    t = ds.timestamps[order]
    p = pos[order]

    # Boundaries between groups of fully identical rows.
    new_row = np.ones(n, dtype=bool)
    new_row[1:] = (u[1:] != u[:-1]) | (i[1:] != i[:-1]) | (r[1:] != r[:-1]) | (t[1:] != t[:-1])
    starts = np.flatnonzero(new_row)
    uu = u[starts]
    ii = i[starts]
    rr = r[starts]
    tt = t[starts]
    pp = np.minimum.reduceat(p, starts)

    # Rows are still sorted by (user, item); group the distinct rows per pair.
    m = len(starts)
    new_pair = np.ones(m, dtype=bool)
    new_pair[1:] = (uu[1:] != uu[:-1]) | (ii[1:] != ii[:-1])
    pair_starts = np.flatnonzero(new_pair)
    counts = np.diff(np.append(pair_starts, m))
    mean_r = np.add.reduceat(rr, pair_starts) / counts
    max_t = np.maximum.reduceat(tt, pair_starts)
    first_pos = np.minimum.reduceat(pp, pair_starts)

    out_order = np.argsort(first_pos, kind="stable")
    return _rebuild_dataset(
        ds,
        uu[pair_starts][out_order],
        ii[pair_starts][out_order],
        mean_r[out_order],
        max_t[out_order],
    )


def k_core(ds: InteractionDataset, params: KCoreParams) -> InteractionDataset:
    """Maximal sub-dataset where every user and item has >= k interactions.

    Violating users and items are removed iteratively until a fixed point;
    the result is order-independent. Expects unique (user, item) pairs
    (run :func:`dedup_average` first). An empty result is valid.
    """
    k = params.k
    keep = np.ones(len(ds), dtype=bool)
    users = ds.users
    items = ds.items
    while True:
        uc = np.bincount(users[keep], minlength=ds.n_users)
        ic = np.bincount(items[keep], minlength=ds.n_items)
        bad = keep & ((uc[users] < k) | (ic[items] < k))
        if not bad.any():
            break
        keep &= ~bad
    return _rebuild_dataset(
        ds, users[keep], items[keep], ds.ratings[keep], ds.timestamps[keep]
    )


def k_core_single_pass(ds: InteractionDataset, params: KCoreParams) -> InteractionDataset:
    """One sweep of k-core removal, without iterating to a fixed point.

    Comparison variant: evaluates user/item counts once on the input and
    drops violators in a single pass. Survivors may fall below ``k`` after
    the removal cascade that :func:`k_core` would continue to apply.
    """
    k = params.k
    uc = np.bincount(ds.users, minlength=ds.n_users)
    ic = np.bincount(ds.items, minlength=ds.n_items)
    keep = (uc[ds.users] >= k) & (ic[ds.items] >= k)
    return _rebuild_dataset(
        ds, ds.users[keep], ds.items[keep], ds.ratings[keep], ds.timestamps[keep]
    )


def preprocess_pipeline(ds: InteractionDataset, k: int) -> InteractionDataset:
    """Full cleaning pass: dedup and average, then k-core pruning."""
    return k_core(dedup_average(ds), KCoreParams(k))
