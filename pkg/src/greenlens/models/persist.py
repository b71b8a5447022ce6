"""Save and load fitted models as versioned .npz artifacts.

The archive holds a JSON header (format version, algorithm spec, shapes)
plus the fitted arrays; loading rebuilds the model without refitting.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..errors import DataError
from .baselines import BiasModel, FittedModel, PopularityModel, RandomModel
from .factor import BiasedMfModel, FunkSvdModel, NmfModel, SvdModel
from .knn import ItemKnnModel, UserKnnModel
from .specs import AlgorithmSpec

FORMAT_VERSION = 1

_CLASSES = {
    "random": RandomModel,
    "popularity": PopularityModel,
    "popularity_binary": PopularityModel,
    "bias": BiasModel,
    "user_knn": UserKnnModel,
    "item_knn": ItemKnnModel,
    "item_knn_binary": ItemKnnModel,
    "funk_svd": FunkSvdModel,
    "biased_mf": BiasedMfModel,
    "svd": SvdModel,
    "nmf": NmfModel,
}

#: plain ndarray attributes saved per kind (csr members handled separately)
_ARRAY_FIELDS = {
    "random": (),
    "popularity": ("counts",),
    "bias": ("b_item", "b_user"),
    "item_knn": ("nb_ids", "nb_sims", "nb_indptr", "seg_ids", "seg_sizes"),
    "user_knn": ("user_means", "c_data", "c_raters", "c_indptr", "c_items"),
    "funk_svd": ("U", "V"),
    "biased_mf": ("b_user", "b_item", "U", "V"),
    "svd": ("U", "singular_values", "Vt"),
    "nmf": ("W", "H"),
}

_SCALAR_FIELDS = {
    "random": ("seed",),
    "popularity": (),
    "bias": ("mu",),
    "item_knn": ("weighted", "cap"),
    "user_knn": ("nnbrs",),
    "funk_svd": (),
    "biased_mf": ("mu",),
    "svd": (),
    "nmf": (),
}

_CSR_FIELDS = {
    "item_knn": ("csr",),
    "user_knn": ("xn",),
}


def _family(kind: str) -> str:
    if kind in ("popularity", "popularity_binary"):
        return "popularity"
    if kind in ("item_knn", "item_knn_binary"):
        return "item_knn"
    return kind


def save_model(model: FittedModel, path: str | Path) -> None:
    kind = model.spec.kind
    family = _family(kind)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "hyperparameters": dict(model.spec.hyperparameters),
        "n_users": model.n_users,
        "n_items": model.n_items,
        "train_fingerprint": getattr(model, "train_fingerprint", ""),
        "scalars": {
            name: getattr(model, name) for name in _SCALAR_FIELDS[family]
        },
    }
    arrays = {"header": np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8)}
    for name in _ARRAY_FIELDS[family]:
        arrays[f"arr_{name}"] = np.asarray(getattr(model, name))
    for name in _CSR_FIELDS.get(family, ()):
        m = getattr(model, name)
        arrays[f"csr_{name}_data"] = m.data
        arrays[f"csr_{name}_indices"] = m.indices
        arrays[f"csr_{name}_indptr"] = m.indptr
        arrays[f"csr_{name}_shape"] = np.asarray(m.shape)
    np.savez_compressed(path, **arrays)


def load_model(path: str | Path) -> FittedModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model artifact not found: {path}")
    with np.load(path) as archive:
        try:
            header = json.loads(bytes(archive["header"]).decode("utf-8"))
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path} is not a model artifact: {exc}") from None
        if header.get("format_version") != FORMAT_VERSION:
            raise DataError(
                f"{path}: unsupported artifact version {header.get('format_version')!r}"
            )
        kind = header["kind"]
        if kind not in _CLASSES:
            raise DataError(f"{path}: unknown algorithm kind {kind!r}")
        family = _family(kind)
        model = _CLASSES[kind].__new__(_CLASSES[kind])
        model.spec = AlgorithmSpec.create(kind, **header["hyperparameters"])
        model.n_users = int(header["n_users"])
        model.n_items = int(header["n_items"])
        model.train_fingerprint = header.get("train_fingerprint", "")
        for name, value in header["scalars"].items():
            setattr(model, name, value)
        for name in _ARRAY_FIELDS[family]:
            setattr(model, name, archive[f"arr_{name}"])
        for name in _CSR_FIELDS.get(family, ()):
            m = sp.csr_matrix(
                (
                    archive[f"csr_{name}_data"],
                    archive[f"csr_{name}_indices"],
                    archive[f"csr_{name}_indptr"],
                ),
                shape=tuple(archive[f"csr_{name}_shape"]),
            )
            setattr(model, name, m)
    return model
