import numpy as np
import pytest

from greenlens.errors import ConfigError, DataError
from greenlens.models import AlgorithmSpec, build_matrix, fit_baseline, recommend
from greenlens.models.baselines import FittedModel


class StubModel(FittedModel):
    """Fixed score table for ranking tests."""

    def __init__(self, scores):
        self.spec = AlgorithmSpec.create("random")
        self.table = np.asarray(scores, dtype=float)
        self.n_users = self.table.shape[0]
        self.n_items = self.table.shape[1]

    def score_user(self, user):
        return self.table[user].copy()


class TestRecommend:
    def test_tie_break_by_index(self):
        # counts i0=5, i1=1, i2=5 -> [i0, i2] at k=2
        model = StubModel([[5.0, 1.0, 5.0]])
        assert recommend(model, 0, (), (), 2).item_ids() == [0, 2]

    def test_excludes_train_and_extra(self):
        model = StubModel([[9.0, 8.0, 7.0, 6.0]])
        ranked = recommend(model, 0, train_items=(0,), excluded=(2,), k=10)
        assert ranked.item_ids() == [1, 3]

    def test_k_larger_than_candidates(self):
        model = StubModel([[1.0, 2.0, np.nan]])
        ranked = recommend(model, 0, (), (), 10)
        assert ranked.item_ids() == [1, 0]

    def test_nan_scores_omitted(self):
        model = StubModel([[np.nan, 2.0, np.nan, 1.0]])
        assert recommend(model, 0, (), (), 4).item_ids() == [1, 3]

    def test_unknown_user(self):
        model = StubModel([[1.0]])
        with pytest.raises(DataError, match="unknown user"):
            recommend(model, 3, (), (), 1)

    def test_bad_k(self):
        model = StubModel([[1.0]])
        with pytest.raises(ConfigError, match="k must be"):
            recommend(model, 0, (), (), 0)

    def test_scores_descending(self):
        rng = np.random.default_rng(0)
        model = StubModel([rng.random(30)])
        ranked = recommend(model, 0, (), (), 10)
        scores = [s for _, s in ranked.items]
        assert scores == sorted(scores, reverse=True)

    def test_repeated_calls_identical(self):
        m = build_matrix([(0, 0, 3.0), (1, 1, 2.0)], 2, 10)
        model = fit_baseline(AlgorithmSpec.create("random"), m, seed=11)
        first = recommend(model, 0, (0,), (), 5)
        second = recommend(model, 0, (0,), (), 5)
        assert first == second

    def test_no_train_item_returned(self):
        m = build_matrix([(0, i, 3.0) for i in range(5)], 1, 10)
        model = fit_baseline(AlgorithmSpec.create("popularity"), m)
        ranked = recommend(model, 0, train_items=range(5), excluded=(), k=10)
        assert set(ranked.item_ids()).isdisjoint(set(range(5)))
