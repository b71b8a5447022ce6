"""Algorithm identifiers, hyperparameter defaults, and validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..errors import ConfigError

KINDS = (
    "random",
    "popularity",
    "popularity_binary",
    "bias",
    "user_knn",
    "item_knn",
    "item_knn_binary",
    "funk_svd",
    "biased_mf",
    "svd",
    "nmf",
)

#: kinds that consume a binarized matrix by default (implicit-feedback style)
BINARIZED_KINDS = frozenset({"popularity_binary", "item_knn_binary", "svd", "nmf"})

DEFAULT_HYPERPARAMETERS: dict[str, dict[str, Any]] = {
    "random": {},
    "popularity": {},
    "popularity_binary": {},
    "bias": {"damping": 5.0},
    "user_knn": {"nnbrs": 20},
    "item_knn": {"nnbrs": 20, "sim_size": 100},
    "item_knn_binary": {"sim_size": 100},
    "funk_svd": {"n_factors": 50, "lr": 0.005, "reg": 0.02, "epochs": 10},
    "biased_mf": {"n_factors": 50, "lr": 0.005, "reg": 0.02, "epochs": 20, "bias_damping": 5.0},
    "svd": {"n_factors": 100, "power_iters": 2, "oversample": 10},
    "nmf": {"n_factors": 50, "n_iters": 100},
}

_VALIDATORS = {
    "damping": lambda v: v >= 0,
    "bias_damping": lambda v: v >= 0,
    "nnbrs": lambda v: isinstance(v, int) and v >= 1,
    "sim_size": lambda v: isinstance(v, int) and v >= 1,
    "n_factors": lambda v: isinstance(v, int) and v >= 1,
    "lr": lambda v: v > 0,
    "reg": lambda v: v >= 0,
    "epochs": lambda v: isinstance(v, int) and v >= 1,
    "n_iters": lambda v: isinstance(v, int) and v >= 1,
    "power_iters": lambda v: isinstance(v, int) and v >= 0,
    "oversample": lambda v: isinstance(v, int) and v >= 0,
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """One algorithm kind plus its complete hyperparameter assignment.

    Build through :meth:`create`, which merges defaults and validates
    ranges. The fit seed is not a hyperparameter; it is passed to the fit
    functions separately so a spec's fingerprint is stable across seeds.
    """

    kind: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def create(cls, kind: str, **overrides: Any) -> "AlgorithmSpec":
        if kind not in KINDS:
            raise ConfigError(f"unknown algorithm kind {kind!r}; expected one of {KINDS}")
        params = dict(DEFAULT_HYPERPARAMETERS[kind])
        for name, value in overrides.items():
            if name not in params:
                raise ConfigError(f"{kind} does not take a hyperparameter named {name!r}")
            params[name] = value
        for name, value in params.items():
            if not _VALIDATORS[name](value):
                raise ConfigError(f"{kind}: hyperparameter {name}={value!r} out of range")
        return cls(kind=kind, hyperparameters=params)

    def fingerprint(self) -> str:
        """Stable 12-hex-digit digest of the kind and hyperparameters."""
        payload = json.dumps(
            {"kind": self.kind, "hyperparameters": dict(sorted(self.hyperparameters.items()))},
            sort_keys=True,
        )
        return hashlib.blake2b(payload.encode("utf-8"), digest_size=6).hexdigest()

    def get(self, name: str) -> Any:
        return self.hyperparameters[name]


def default_binarize(kind: str) -> bool:
    """Whether ``kind`` trains on a binarized matrix by default."""
    if kind not in KINDS:
        raise ConfigError(f"unknown algorithm kind {kind!r}")
    return kind in BINARIZED_KINDS
