"""Shared fixtures: synthetic datasets and optional real-data discovery."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from greenlens.ingest import DATA_DIR_ENV, InteractionDataset, dataset_from_rows
from greenlens.preprocess import preprocess_pipeline
from greenlens.split import SplitRatios, user_holdout_split


def make_synthetic(
    n_users: int = 48,
    n_items: int = 40,
    seed: int = 0,
    min_per_user: int = 12,
    max_per_user: int = 18,
) -> InteractionDataset:
    """Structured ratings: block affinities plus noise, >= 12 per user."""
    rng = np.random.default_rng(seed)
    affinity = rng.uniform(1.5, 4.5, size=(4, 4))
    rows = []
    for u in range(n_users):
        size = int(rng.integers(min_per_user, max_per_user + 1))
        items = np.sort(rng.choice(n_items, size=size, replace=False))
        for i in items:
            mu = affinity[u % 4, i % 4]
            r = float(np.clip(round(rng.normal(mu, 0.6) * 2) / 2, 1.0, 5.0))
            rows.append((f"u{u:03d}", f"i{i:03d}", r, 1_000_000 + u * 100 + int(i)))
    return dataset_from_rows(rows, (1.0, 5.0, 1.0))


@pytest.fixture(scope="session")
def synth_ds() -> InteractionDataset:
    return make_synthetic()


@pytest.fixture(scope="session")
def synth_pre(synth_ds) -> InteractionDataset:
    return preprocess_pipeline(synth_ds, 5)


@pytest.fixture(scope="session")
def synth_bundle(synth_pre):
    return user_holdout_split(synth_pre, SplitRatios(), seed=42)


def find_dataset(*relative: str) -> Path | None:
    roots = []
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        roots.append(Path(env))
    roots += [Path("data"), Path("/root/data")]
    for root in roots:
        for rel in relative:
            candidate = root / rel
            if candidate.is_file():
                return candidate
    return None


@pytest.fixture(scope="session")
def ml100k_file() -> Path:
    path = find_dataset("ml-100k/u.data", "u.data", "ml100k/u.data")
    if path is None:
        pytest.skip(
            f"MovieLens 100K not found; place ml-100k/u.data under ${DATA_DIR_ENV}"
        )
    return path


@pytest.fixture(scope="session")
def ml1m_file() -> Path:
    path = find_dataset("ml-1m/ratings.dat", "ratings.dat", "ml1m/ratings.dat")
    if path is None:
        pytest.skip(
            f"MovieLens 1M not found; place ml-1m/ratings.dat under ${DATA_DIR_ENV}"
        )
    return path
