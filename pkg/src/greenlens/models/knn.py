"""Nearest-neighbor collaborative filters over sparse cosine similarities.

Item similarities are cosines between item columns, mean-centered per item
for the rating variant and uncentered for the binary variant; only
co-rated users contribute to the dot product while norms span each item's
full column. User similarities are cosines between per-user mean-centered
rows, computed at query time.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError
from .baselines import FittedModel
from .matrix import RatingMatrix
from .specs import AlgorithmSpec

_SIM_BLOCK = 512

#: similarities at or below this are treated as non-positive; keeps
#: exactly-cancelling dot products from leaking in as float noise
SIM_EPS = 1e-12


def _column_normalize(x: sp.csc_matrix) -> sp.csc_matrix:
    norms = np.sqrt(np.asarray(x.multiply(x).sum(axis=0)).ravel())
    inv = np.zeros_like(norms)
    nz = norms > 0
    inv[nz] = 1.0 / norms[nz]
    return (x @ sp.diags(inv)).tocsc()


def _center_columns(x: sp.csc_matrix) -> sp.csc_matrix:
    """Subtract each column's mean from its stored entries only."""
    x = x.copy()
    counts = np.diff(x.indptr)
    sums = np.asarray(x.sum(axis=0)).ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    x.data = x.data - np.repeat(means, counts)
    return x


def _center_rows(x: sp.csr_matrix) -> tuple[sp.csr_matrix, np.ndarray]:
    x = x.copy()
    counts = np.diff(x.indptr)
    sums = np.asarray(x.sum(axis=1)).ravel()
    means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    x.data = x.data - np.repeat(means, counts)
    return x, means


def _top_similarities(xn: sp.csc_matrix, sim_size: int):
    """Per-column lists of the most similar columns with positive cosine.

    ``xn`` must be column-normalized. Lists are sorted by descending
    similarity (ties by ascending index) and truncated to ``sim_size``.
    Returns (neighbor ids, similarities, indptr).
    """
    n_items = xn.shape[1]
    xt = xn.T.tocsr()
    ids: list[np.ndarray] = []
    sims: list[np.ndarray] = []
    for start in range(0, n_items, _SIM_BLOCK):
        stop = min(start + _SIM_BLOCK, n_items)
        block = (xt @ xn[:, start:stop]).toarray()
        for j in range(stop - start):
            col = block[:, j]
            col[start + j] = 0.0
            pos = np.flatnonzero(col > SIM_EPS)
            # Full (-sim, index) ordering so truncation ties are deterministic.
            order = np.lexsort((pos, -col[pos]))[:sim_size]
            pos = pos[order]
            ids.append(pos)
            sims.append(col[pos])
    indptr = np.zeros(n_items + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in ids])
    return (
        np.concatenate(ids) if ids else np.empty(0, np.int64),
        np.concatenate(sims) if sims else np.empty(0, np.float64),
        indptr,
    )


class ItemKnnModel(FittedModel):
    """Item-based scoring from stored top similarity lists.

    The rating variant averages the user's ratings over at most ``nnbrs``
    of the most similar rated neighbors, weighted and normalized by
    similarity. The binary variant sums the similarities of every rated
    neighbor in the stored list, without normalization.
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix):
        super().__init__(spec, m.n_users, m.n_items, m)
        self.weighted = spec.kind == "item_knn"
        self.cap = int(spec.get("nnbrs")) if self.weighted else None
        sim_size = int(spec.get("sim_size"))

        cols = m.csc
        if self.weighted:
            cols = _center_columns(cols)
        xn = _column_normalize(cols)
        self.nb_ids, self.nb_sims, self.nb_indptr = _top_similarities(xn, sim_size)
        self.seg_ids = np.repeat(
            np.arange(m.n_items, dtype=np.int64), np.diff(self.nb_indptr)
        )
        self.seg_sizes = np.diff(self.nb_indptr)
        self.csr = m.csr

    def score_user(self, user: int) -> np.ndarray:
        lo, hi = self.csr.indptr[user], self.csr.indptr[user + 1]
        rated = self.csr.indices[lo:hi]
        scores = np.full(self.n_items, np.nan)
        if len(rated) == 0 or len(self.nb_ids) == 0:
            return scores
        rated_mask = np.zeros(self.n_items, dtype=bool)
        rated_mask[rated] = True
        rated_vals = np.zeros(self.n_items)
        rated_vals[rated] = self.csr.data[lo:hi]

        hit = rated_mask[self.nb_ids]
        if self.cap is not None:
            # Lists are sorted by similarity, so the first ``cap`` rated
            # entries of each list are the top rated neighbors.
            c = np.cumsum(hit)
            before = np.concatenate(([0], c))[self.nb_indptr[:-1]]
            rank = c - np.repeat(before, self.seg_sizes)
            keep = hit & (rank <= self.cap)
        else:
            keep = hit
        seg = self.seg_ids[keep]
        sims = self.nb_sims[keep]
        den = np.bincount(seg, weights=sims, minlength=self.n_items)
        defined = den > 0
        if self.weighted:
            num = np.bincount(
                seg, weights=sims * rated_vals[self.nb_ids[keep]], minlength=self.n_items
            )
            scores[defined] = num[defined] / den[defined]
        else:
            scores[defined] = den[defined]
        return scores


class UserKnnModel(FittedModel):
    """User-based scoring with per-item neighborhoods chosen at query time.

    score(u, i) = mean(u) + sum_v sim(u, v) (r_vi - mean(v)) / sum_v sim(u, v)
    over at most ``nnbrs`` positive-similarity raters of ``i``.
    """

    def __init__(self, spec: AlgorithmSpec, m: RatingMatrix):
        super().__init__(spec, m.n_users, m.n_items, m)
        self.nnbrs = int(spec.get("nnbrs"))
        centered, self.user_means = _center_rows(m.csr)
        norms = np.sqrt(np.asarray(centered.multiply(centered).sum(axis=1)).ravel())
        inv = np.zeros_like(norms)
        nz = norms > 0
        inv[nz] = 1.0 / norms[nz]
        self.xn = (sp.diags(inv) @ centered).tocsr()
        ccsc = centered.tocsc()
        self.c_data = ccsc.data
        self.c_raters = ccsc.indices
        self.c_indptr = ccsc.indptr
        self.c_items = np.repeat(
            np.arange(m.n_items, dtype=np.int64), np.diff(self.c_indptr)
        )

    def score_user(self, user: int) -> np.ndarray:
        scores = np.full(self.n_items, np.nan)
        if len(self.c_data) == 0:
            return scores
        sims = (self.xn @ self.xn[user].T).toarray().ravel()
        sims[user] = 0.0
        rater_sims = sims[self.c_raters]
        valid = np.flatnonzero(rater_sims > SIM_EPS)
        if len(valid) == 0:
            return scores
        v_seg = self.c_items[valid]
        v_sims = rater_sims[valid]
        v_data = self.c_data[valid]

        order = np.lexsort((-v_sims, v_seg))
        seg_o = v_seg[order]
        seg_counts = np.bincount(v_seg, minlength=self.n_items)
        starts = np.concatenate(([0], np.cumsum(seg_counts)))
        pos = np.arange(len(order)) - starts[seg_o]
        keep = pos < self.nnbrs
        sel = order[keep]
        num = np.bincount(
            v_seg[sel], weights=v_sims[sel] * v_data[sel], minlength=self.n_items
        )
        den = np.bincount(v_seg[sel], weights=v_sims[sel], minlength=self.n_items)
        defined = den > 0
        scores[defined] = self.user_means[user] + num[defined] / den[defined]
        return scores


def fit_neighborhood(spec: AlgorithmSpec, m: RatingMatrix) -> FittedModel:
    if spec.kind in ("item_knn", "item_knn_binary"):
        return ItemKnnModel(spec, m)
    if spec.kind == "user_knn":
        return UserKnnModel(spec, m)
    raise ConfigError(f"{spec.kind!r} is not a neighborhood algorithm")
