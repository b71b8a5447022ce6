import numpy as np
import pytest

from greenlens.errors import DataError
from greenlens.models import (
    AlgorithmSpec,
    build_matrix,
    default_binarize,
    fit,
    load_model,
    recommend,
    save_model,
)

SMALL = {
    "funk_svd": {"n_factors": 4, "epochs": 2},
    "biased_mf": {"n_factors": 4, "epochs": 2},
    "svd": {"n_factors": 4},
    "nmf": {"n_factors": 4, "n_iters": 10},
}


@pytest.fixture(scope="module")
def training():
    rng = np.random.default_rng(9)
    triples = []
    for u in range(12):
        for i in rng.choice(15, size=8, replace=False):
            triples.append((int(u), int(i), float(rng.integers(1, 6))))
    return triples


@pytest.mark.parametrize(
    "kind",
    [
        "random", "popularity", "popularity_binary", "bias", "user_knn",
        "item_knn", "item_knn_binary", "funk_svd", "biased_mf", "svd", "nmf",
    ],
)
def test_round_trip_preserves_rankings(tmp_path, training, kind):
    m = build_matrix(training, 12, 15, binarize=default_binarize(kind))
    model = fit(AlgorithmSpec.create(kind, **SMALL.get(kind, {})), m, seed=4)
    path = tmp_path / f"{kind}.npz"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.spec == model.spec
    assert loaded.train_fingerprint == model.train_fingerprint
    for user in range(12):
        a = recommend(model, user, (), (), 10)
        b = recommend(loaded, user, (), (), 10)
        assert a == b


def test_missing_artifact(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_model(tmp_path / "none.npz")


def test_garbage_artifact(tmp_path):
    path = tmp_path / "bad.npz"
    np.savez(path, junk=np.arange(3))
    with pytest.raises(DataError, match="not a model artifact"):
        load_model(path)
