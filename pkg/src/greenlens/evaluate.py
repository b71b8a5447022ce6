"""nDCG@k with binary relevance, per user and aggregated."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Collection, Sequence

from .errors import ConfigError, DataError
from .models import FittedModel, recommend
from .split import SplitBundle, TrainSubset


@dataclass(frozen=True)
class MetricResult:
    """Per-user nDCG values plus their arithmetic mean."""

    per_user: dict[int, float]
    mean: float
    n_evaluated: int

    def as_dict(self, include_per_user: bool = False) -> dict:
        out: dict = {"mean": self.mean, "n_evaluated": self.n_evaluated}
        if include_per_user:
            out["per_user"] = {str(u): v for u, v in self.per_user.items()}
        return out


def ndcg_at_k(ranked: Sequence[int], relevant: Collection[int], k: int) -> float:
    """DCG of the ranking over the ideal DCG, binary relevance.

    DCG counts 1/log2(p + 1) for each relevant item at position p <= k
    (positions start at 1); the ideal places relevant items in the first
    min(k, #relevant) positions.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if not relevant:
        raise DataError("relevant set is empty; caller must skip such users")
    rel = set(relevant)
    dcg = 0.0
    for p, item in enumerate(ranked[:k], start=1):
        if item in rel:
            dcg += 1.0 / math.log2(p + 1)
    idcg = sum(1.0 / math.log2(p + 1) for p in range(1, min(k, len(rel)) + 1))
    return dcg / idcg


def _evaluate(
    model: FittedModel,
    train_items_by_user: list,
    excluded_by_user: list,
    relevant_by_user: list,
    k: int,
) -> MetricResult:
    per_user: dict[int, float] = {}
    for u in range(model.n_users):
        relevant = relevant_by_user[u]
        if len(relevant) == 0:
            continue
        ranked = recommend(model, u, train_items_by_user[u], excluded_by_user[u], k)
        per_user[u] = ndcg_at_k(ranked.item_ids(), set(int(i) for i in relevant), k)
    n = len(per_user)
    mean = math.fsum(per_user.values()) / n if n else 0.0
    return MetricResult(per_user=per_user, mean=mean, n_evaluated=n)


def evaluate_model(
    model: FittedModel,
    bundle: SplitBundle,
    downsampled_train: TrainSubset,
    k: int = 10,
) -> MetricResult:
    """Mean nDCG@k against each user's test items.

    Candidates are all items except the user's downsampled training items
    and validation items. Items dropped from training by downsampling stay
    in the candidate pool; only what the model actually saw is excluded.
    Users with no test items are skipped.
    """
    return _evaluate(
        model,
        downsampled_train.items_by_user,
        bundle.valid_items_by_user(),
        bundle.test_items_by_user(),
        k,
    )


def evaluate_on_validation(model: FittedModel, bundle: SplitBundle, k: int = 10) -> MetricResult:
    """Mean nDCG@k against validation items, for hyperparameter selection.

    Candidates are all items except the user's full training items.
    """
    empty = [() for _ in range(bundle.n_users)]
    return _evaluate(
        model,
        bundle.train_items_by_user(),
        empty,
        bundle.valid_items_by_user(),
        k,
    )
