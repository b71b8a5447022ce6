"""Top-k candidate ranking over a fitted model's scores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import ConfigError, DataError
from .baselines import FittedModel


@dataclass(frozen=True)
class RankedList:
    """Ranked (item, score) pairs for one user, best first.

    Scores are non-increasing; ties are broken by ascending item index;
    no item comes from the user's training set.
    """

    user: int
    items: tuple[tuple[int, float], ...]

    def item_ids(self) -> list[int]:
        return [item for item, _ in self.items]

    def __len__(self) -> int:
        return len(self.items)


def recommend(
    model: FittedModel,
    user: int,
    train_items: Iterable[int],
    excluded: Iterable[int],
    k: int,
) -> RankedList:
    """Top-k items by model score, excluding training and excluded items.

    Items the model defines no score for are omitted, so the result may
    hold fewer than ``k`` entries. Ordering is deterministic: descending
    score, then ascending item index.
    """
    if not 0 <= user < model.n_users:
        raise DataError(f"unknown user index {user} (n_users={model.n_users})")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    scores = model.score_user(user)
    valid = ~np.isnan(scores)
    train_items = np.asarray(list(train_items), dtype=np.int64)
    excluded = np.asarray(list(excluded), dtype=np.int64)
    if len(train_items):
        valid[train_items] = False
    if len(excluded):
        valid[excluded] = False
    cand = np.flatnonzero(valid)
    if len(cand) == 0:
        return RankedList(user=user, items=())
    cand_scores = scores[cand]
    order = np.lexsort((cand, -cand_scores))[:k]
    return RankedList(
        user=user,
        items=tuple((int(cand[j]), float(cand_scores[j])) for j in order),
    )
