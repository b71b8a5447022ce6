"""The algorithm roster behind one fit/recommend contract."""

from __future__ import annotations

from ..errors import ConfigError
from .baselines import BiasModel, FittedModel, PopularityModel, RandomModel, fit_baseline
from .factor import (
    BiasedMfModel,
    FunkSvdModel,
    NmfModel,
    SvdModel,
    fit_factorization,
)
from .knn import ItemKnnModel, UserKnnModel, fit_neighborhood
from .matrix import RatingMatrix, build_matrix
from .persist import load_model, save_model
from .ranking import RankedList, recommend
from .specs import (
    BINARIZED_KINDS,
    DEFAULT_HYPERPARAMETERS,
    KINDS,
    AlgorithmSpec,
    default_binarize,
)

_BASELINE_KINDS = frozenset({"random", "popularity", "popularity_binary", "bias"})
_NEIGHBOR_KINDS = frozenset({"user_knn", "item_knn", "item_knn_binary"})
_FACTOR_KINDS = frozenset({"funk_svd", "biased_mf", "svd", "nmf"})


def fit(spec: AlgorithmSpec, m: RatingMatrix, seed: int = 0) -> FittedModel:
    """Train ``spec`` on ``m``; ``seed`` drives any model randomness."""
    if spec.kind in _BASELINE_KINDS:
        return fit_baseline(spec, m, seed)
    if spec.kind in _NEIGHBOR_KINDS:
        return fit_neighborhood(spec, m)
    if spec.kind in _FACTOR_KINDS:
        return fit_factorization(spec, m, seed)
    raise ConfigError(f"unknown algorithm kind {spec.kind!r}")


__all__ = [
    "AlgorithmSpec",
    "BINARIZED_KINDS",
    "BiasModel",
    "BiasedMfModel",
    "DEFAULT_HYPERPARAMETERS",
    "FittedModel",
    "FunkSvdModel",
    "ItemKnnModel",
    "KINDS",
    "NmfModel",
    "PopularityModel",
    "RandomModel",
    "RankedList",
    "RatingMatrix",
    "SvdModel",
    "UserKnnModel",
    "build_matrix",
    "default_binarize",
    "fit",
    "fit_baseline",
    "fit_factorization",
    "fit_neighborhood",
    "load_model",
    "recommend",
    "save_model",
]
