"""Latent-factor models: sequential-feature SGD, biased SGD, truncated SVD,
and nonnegative factorization with multiplicative updates.

SGD iteration order is a seeded shuffle per epoch, so fits are bitwise
reproducible for a fixed seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import ConfigError
from .baselines import BiasModel, FittedModel
from .matrix import RatingMatrix
from .specs import AlgorithmSpec

_MASK64 = (1 << 64) - 1


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, tag]))


@njit(cache=True)
def _funk_epoch(order, users, items, ratings, pred, U, V, feat, lr, reg):
    for t in order:
        u = users[t]
        i = items[t]
        uf = U[u, feat]
        vf = V[i, feat]
        err = ratings[t] - (pred[t] + uf * vf)
        U[u, feat] = uf + lr * (err * vf - reg * uf)
        V[i, feat] = vf + lr * (err * uf - reg * vf)


@njit(cache=True)
def _biased_epoch(order, users, items, ratings, mu, b_user, b_item, U, V, lr, reg):
    n_factors = U.shape[1]
    for t in order:
        u = users[t]
        i = items[t]
        dot = 0.0
        for f in range(n_factors):
            dot += U[u, f] * V[i, f]
        err = ratings[t] - (mu + b_user[u] + b_item[i] + dot)
        b_user[u] += lr * (err - reg * b_user[u])
        b_item[i] += lr * (err - reg * b_item[i])
        for f in range(n_factors):
            uf = U[u, f]
            vf = V[i, f]
            U[u, f] = uf + lr * (err * vf - reg * uf)
            V[i, f] = vf + lr * (err * uf - reg * vf)


class FunkSvdModel(FittedModel):
    """Latent features trained one at a time on rating residuals.

    Feature ``f`` runs ``epochs`` SGD passes over all training triples;
    predictions during its training use the already-trained features plus
    the current one. score(u, i) = dot(U_u, V_i).
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix, seed: int):
        super().__init__(spec, m.n_users, m.n_items, m)
        n_factors = int(spec.get("n_factors"))
        epochs = int(spec.get("epochs"))
        lr = float(spec.get("lr"))
        reg = float(spec.get("reg"))

        coo = m.csr.tocoo()
        users = coo.row.astype(np.int64)
        items = coo.col.astype(np.int64)
        ratings = coo.data.astype(np.float64)
        nnz = len(ratings)

        U = np.full((m.n_users, n_factors), 0.1)
        V = np.full((m.n_items, n_factors), 0.1)
        pred = np.zeros(nnz)
        rng = _rng(seed, 1)
        for feat in range(n_factors):
            for _ in range(epochs):
                order = rng.permutation(nnz)
                _funk_epoch(order, users, items, ratings, pred, U, V, feat, lr, reg)
            pred += U[users, feat] * V[items, feat]
        self.U = U
        self.V = V

    def score_user(self, user: int) -> np.ndarray:
        return self.U[user] @ self.V.T


class BiasedMfModel(FittedModel):
    """Joint SGD over biases and factors: r_hat = mu + b_u + b_i + dot(U_u, V_i).

    Biases start from the damped bias baseline and are refined together
    with the factors.
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix, seed: int):
        super().__init__(spec, m.n_users, m.n_items, m)
        n_factors = int(spec.get("n_factors"))
        epochs = int(spec.get("epochs"))
        lr = float(spec.get("lr"))
        reg = float(spec.get("reg"))

        bias_spec = AlgorithmSpec.create("bias", damping=float(spec.get("bias_damping")))
        baseline = BiasModel(bias_spec, m)
        mu = baseline.mu
        b_user = baseline.b_user.copy()
        b_item = baseline.b_item.copy()

        coo = m.csr.tocoo()
        users = coo.row.astype(np.int64)
        items = coo.col.astype(np.int64)
        ratings = coo.data.astype(np.float64)
        nnz = len(ratings)

        rng = _rng(seed, 2)
        scale = 0.1 / np.sqrt(n_factors)
        U = rng.standard_normal((m.n_users, n_factors)) * scale
        V = rng.standard_normal((m.n_items, n_factors)) * scale
        for _ in range(epochs):
            order = rng.permutation(nnz)
            _biased_epoch(order, users, items, ratings, mu, b_user, b_item, U, V, lr, reg)
        self.mu = mu
        self.b_user = b_user
        self.b_item = b_item
        self.U = U
        self.V = V

    def score_user(self, user: int) -> np.ndarray:
        return self.mu + self.b_user[user] + self.b_item + self.U[user] @ self.V.T


class SvdModel(FittedModel):
    """Rank-f truncated SVD via seeded randomized projection.

    A Gaussian sketch of the range is refined with ``power_iters``
    subspace iterations (QR-orthonormalized), then the small projected
    matrix is decomposed exactly. score row = (U_u * s) V^T.
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix, seed: int):
        super().__init__(spec, m.n_users, m.n_items, m)
        n_factors = int(spec.get("n_factors"))
        q = int(spec.get("power_iters"))
        oversample = int(spec.get("oversample"))
        limit = min(m.n_users, m.n_items)
        if n_factors > limit:
            raise ConfigError(
                f"svd factor count {n_factors} exceeds min(n_users, n_items) = {limit}"
            )
        a = m.csr
        r = min(n_factors + oversample, limit)
        rng = _rng(seed, 3)
        omega = rng.standard_normal((m.n_items, r))
        y = a @ omega
        qmat, _ = np.linalg.qr(y)
        for _ in range(q):
            z = a.T @ qmat
            qz, _ = np.linalg.qr(z)
            y = a @ qz
            qmat, _ = np.linalg.qr(y)
        b = (a.T @ qmat).T
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        self.U = qmat @ ub[:, :n_factors]
        self.singular_values = s[:n_factors]
        self.Vt = vt[:n_factors]

    def score_user(self, user: int) -> np.ndarray:
        return (self.U[user] * self.singular_values) @ self.Vt


def _nmf_objective(sq_norm_a: float, a, W: np.ndarray, H: np.ndarray) -> float:
    """Squared Frobenius error ||A - WH||^2 without densifying A."""
    wta = (a.T @ W).T
    cross = float(np.sum(wta * H))
    wtw = W.T @ W
    hht = H @ H.T
    return sq_norm_a - 2.0 * cross + float(np.sum(wtw * hht))


class NmfModel(FittedModel):
    """Nonnegative W (users x f) and H (f x items) fit by multiplicative
    updates on the squared Frobenius objective.

    Factors are seeded-uniform in (0, 1). Each half-update keeps both
    factors nonnegative and never increases the objective.
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix, seed: int, track_objective: bool = False):
        super().__init__(spec, m.n_users, m.n_items, m)
        n_factors = int(spec.get("n_factors"))
        n_iters = int(spec.get("n_iters"))
        a = m.csr
        rng = _rng(seed, 4)
        W = rng.random((m.n_users, n_factors))
        H = rng.random((n_factors, m.n_items))
        eps = 1e-12
        sq_norm_a = float(np.sum(a.data**2))
        history: list[float] = []
        if track_objective:
            history.append(_nmf_objective(sq_norm_a, a, W, H))
        for _ in range(n_iters):
            wta = (a.T @ W).T
            H *= wta / np.maximum((W.T @ W) @ H, eps)
            if track_objective:
                history.append(_nmf_objective(sq_norm_a, a, W, H))
            aht = a @ H.T
            W *= aht / np.maximum(W @ (H @ H.T), eps)
            if track_objective:
                history.append(_nmf_objective(sq_norm_a, a, W, H))
        self.W = W
        self.H = H
        self.objective_history = history

    def score_user(self, user: int) -> np.ndarray:
        return self.W[user] @ self.H


def fit_factorization(
    spec: AlgorithmSpec, m: RatingMatrix, seed: int = 0, **fit_options
) -> FittedModel:
    if spec.kind == "funk_svd":
        return FunkSvdModel(spec, m, seed)
    if spec.kind == "biased_mf":
        return BiasedMfModel(spec, m, seed)
    if spec.kind == "svd":
        return SvdModel(spec, m, seed)
    if spec.kind == "nmf":
        return NmfModel(spec, m, seed, **fit_options)
    raise ConfigError(f"{spec.kind!r} is not a factorization algorithm")
