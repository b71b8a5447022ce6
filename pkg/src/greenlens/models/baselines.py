"""Non-personalized and bias baselines: random, popularity, damped bias."""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import ConfigError, DataError
from .matrix import RatingMatrix
from .specs import AlgorithmSpec

_MASK64 = (1 << 64) - 1


class FittedModel:
    """Immutable trained state exposing per-user candidate scoring.

    ``score_user`` returns one float per item; NaN marks items for which
    the model defines no score. Scoring never mutates state, so one model
    may serve concurrent callers.
    """

    def __init__(self, spec: AlgorithmSpec, n_users: int, n_items: int, m: RatingMatrix):
        self.spec = spec
        self.n_users = n_users
        self.n_items = n_items
        self.train_fingerprint = _train_fingerprint(spec, m)

    def score_user(self, user: int) -> np.ndarray:
        raise NotImplementedError


def _train_fingerprint(spec: AlgorithmSpec, m: RatingMatrix) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(spec.fingerprint().encode())
    h.update(np.int64([m.n_users, m.n_items, m.nnz]).tobytes())
    h.update(np.float64(m.csr.data.sum() if m.nnz else 0.0).tobytes())
    return h.hexdigest()


class RandomModel(FittedModel):
    """Scores are a pure function of (seed, user, item)."""

    def __init__(self, spec, m, seed: int):
        super().__init__(spec, m.n_users, m.n_items, m)
        self.seed = seed & _MASK64

    def score_user(self, user: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, user]))
        return rng.random(self.n_items)


class PopularityModel(FittedModel):
    """Per-item interaction counts; every user sees the same ranking."""

    def __init__(self, spec, m):
        super().__init__(spec, m.n_users, m.n_items, m)
        self.counts = m.item_counts().astype(np.float64)
        self.counts.flags.writeable = False

    def score_user(self, user: int) -> np.ndarray:
        return self.counts


class BiasModel(FittedModel):
    """Global mean with damped item and user offsets.

    b_i = sum_{u in R(i)} (r_ui - mu) / (damping + |R(i)|) and
    b_u = sum_{i in R(u)} (r_ui - mu - b_i) / (damping + |R(u)|);
    score(u, i) = mu + b_i + b_u.
    """

    def __init__(self, spec, m: RatingMatrix):
        super().__init__(spec, m.n_users, m.n_items, m)
        if m.nnz == 0:
            raise DataError("bias model requires a non-empty training matrix")
        damping = float(spec.get("damping"))
        mu = float(m.csr.data.mean())

        item_counts = m.item_counts()
        item_sums = np.asarray(m.csc.sum(axis=0)).ravel()
        with np.errstate(invalid="ignore", divide="ignore"):
            b_item = np.where(
                item_counts > 0,
                (item_sums - mu * item_counts) / (damping + item_counts),
                0.0,
            )

        user_counts = m.user_counts()
        resid = m.csr.data - mu - b_item[m.csr.indices]
        user_sums = np.zeros(m.n_users)
        np.add.at(user_sums, np.repeat(np.arange(m.n_users), user_counts), resid)
        with np.errstate(invalid="ignore", divide="ignore"):
            b_user = np.where(user_counts > 0, user_sums / (damping + user_counts), 0.0)

        self.mu = mu
        self.b_item = b_item
        self.b_user = b_user
        self.b_item.flags.writeable = False
        self.b_user.flags.writeable = False

    def score_user(self, user: int) -> np.ndarray:
        return self.mu + self.b_user[user] + self.b_item


def fit_baseline(spec: AlgorithmSpec, m: RatingMatrix, seed: int = 0) -> FittedModel:
    if spec.kind == "random":
        return RandomModel(spec, m, seed)
    if spec.kind in ("popularity", "popularity_binary"):
        return PopularityModel(spec, m)
    if spec.kind == "bias":
        return BiasModel(spec, m)
    raise ConfigError(f"{spec.kind!r} is not a baseline algorithm")
