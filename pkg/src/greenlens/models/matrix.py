"""Sparse user-item rating matrix with row and column views."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from ..errors import DataError
from ..split import TrainSubset


@dataclass(frozen=True)
class RatingMatrix:
    """CSR/CSC views over one training set.

    Both views hold the same (user, item, value) triples with strictly
    increasing indices inside each row/column. ``binarized`` marks that the
    stored values were replaced by 1.0.
    """

    n_users: int
    n_items: int
    binarized: bool
    csr: sp.csr_matrix
    csc: sp.csc_matrix

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def user_counts(self) -> np.ndarray:
        return np.diff(self.csr.indptr)

    def item_counts(self) -> np.ndarray:
        return np.diff(self.csc.indptr)

    def user_row(self, user: int) -> tuple[np.ndarray, np.ndarray]:
        """(item indices, values) rated by ``user``."""
        lo, hi = self.csr.indptr[user], self.csr.indptr[user + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]


def build_matrix(
    train: TrainSubset | Iterable[tuple[int, int, float]],
    n_users: int,
    n_items: int,
    binarize: bool = False,
) -> RatingMatrix:
    """Assemble a :class:`RatingMatrix` from training interactions.

    Accepts a :class:`TrainSubset` or any iterable of
    (user index, item index, rating) triples. Indices must fall inside the
    declared dimensions and (user, item) pairs must be unique.
    """
    if isinstance(train, TrainSubset):
        users = np.asarray(train.users, dtype=np.int64)
        items = np.asarray(train.items, dtype=np.int64)
        values = np.asarray(train.ratings, dtype=np.float64)
    else:
        triples = list(train)
        users = np.array([t[0] for t in triples], dtype=np.int64)
        items = np.array([t[1] for t in triples], dtype=np.int64)
        values = np.array([t[2] for t in triples], dtype=np.float64)

    if len(users) and (users.min() < 0 or users.max() >= n_users):
        raise DataError(f"user index out of range [0, {n_users})")
    if len(items) and (items.min() < 0 or items.max() >= n_items):
        raise DataError(f"item index out of range [0, {n_items})")
    if len(users):
        pair_keys = users * n_items + items
        if len(np.unique(pair_keys)) != len(pair_keys):
            raise DataError("duplicate (user, item) pairs in training set")

    if binarize:
        values = np.ones_like(values)
    csr = sp.csr_matrix(
        (values, (users, items)), shape=(n_users, n_items), dtype=np.float64
    )
    csr.sort_indices()
    csc = csr.tocsc()
    csc.sort_indices()
    return RatingMatrix(
        n_users=n_users, n_items=n_items, binarized=binarize, csr=csr, csc=csc
    )
