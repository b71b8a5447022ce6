"""Experiment grid orchestration: dataset x algorithm x fraction x seed.

Hyperparameters are tuned once per algorithm and seed on the full training
set, then frozen across fractions so the data-volume axis is the only
moving part. Results append to a CSV keyed by
(dataset, algorithm, fingerprint, fraction, seed); existing keys are
skipped, which makes interrupted grids resumable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import ConfigError, DataError
from .evaluate import evaluate_model, evaluate_on_validation
from .green import time_phase
from .ingest import InteractionDataset, parse_interactions, resolve_data_path
from .models import AlgorithmSpec, FittedModel, RatingMatrix, build_matrix, default_binarize, fit
from .preprocess import preprocess_pipeline
from .split import DownsampleLevel, SplitBundle, SplitRatios, downsample_train, user_holdout_split

log = logging.getLogger("greenlens.runner")

RESULTS_HEADER = (
    "dataset",
    "algorithm",
    "params_fingerprint",
    "fraction",
    "seed",
    "ndcg_mean",
    "n_evaluated",
    "fit_seconds",
    "eval_seconds",
    "status",
    "error",
    "completed_at",
)

DEFAULT_SEEDS = (1, 2, 3)

#: default tuning grids; tunable algorithms get 10 configurations each
DEFAULT_GRIDS: dict[str, list[dict[str, Any]]] = {
    "random": [{}],
    "popularity": [{}],
    "popularity_binary": [{}],
    "bias": [{"damping": d} for d in (0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 25.0, 50.0)],
    "user_knn": [{"nnbrs": n} for n in (5, 10, 15, 20, 25, 30, 40, 50, 75, 100)],
    "item_knn": [{"nnbrs": n} for n in (5, 10, 15, 20, 25, 30, 40, 50, 75, 100)],
    "item_knn_binary": [{"sim_size": s} for s in (10, 25, 50, 75, 100, 150, 200, 300, 400, 500)],
    "funk_svd": [
        {"n_factors": f, "lr": lr}
        for f in (10, 20, 30, 50, 75)
        for lr in (0.005, 0.01)
    ],
    "biased_mf": [
        {"n_factors": f, "lr": lr}
        for f in (10, 20, 30, 50, 75)
        for lr in (0.005, 0.01)
    ],
    "svd": [{"n_factors": f} for f in (2, 5, 10, 25, 50, 75, 100, 150, 200, 300)],
    "nmf": [
        {"n_factors": f, "n_iters": t}
        for f in (10, 25, 50, 75, 100)
        for t in (50, 100)
    ],
}


@dataclass(frozen=True)
class AlgorithmEntry:
    """One algorithm in a config: a fixed spec or a tuning grid."""

    kind: str
    grid: tuple[dict[str, Any], ...]

    @classmethod
    def fixed(cls, kind: str, **hyperparameters: Any) -> "AlgorithmEntry":
        AlgorithmSpec.create(kind, **hyperparameters)
        return cls(kind=kind, grid=(dict(hyperparameters),))

    @classmethod
    def default_grid(cls, kind: str) -> "AlgorithmEntry":
        if kind not in DEFAULT_GRIDS:
            raise ConfigError(f"unknown algorithm kind {kind!r}")
        return cls(kind=kind, grid=tuple(DEFAULT_GRIDS[kind]))


@dataclass
class ExperimentConfig:
    dataset_path: str
    dataset_format: str
    algorithms: list[AlgorithmEntry]
    output_dir: str
    dataset_id: str = ""
    k_core: int = 10
    ratios: SplitRatios = field(default_factory=SplitRatios)
    fractions: tuple[DownsampleLevel, ...] = tuple(
        DownsampleLevel(round(f / 10, 1)) for f in range(1, 11)
    )
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    k: int = 10
    exclusive_timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        if not self.dataset_id:
            self.dataset_id = Path(self.dataset_path).stem
        self.validate()

    def validate(self) -> None:
        if not self.fractions:
            raise ConfigError("fractions must be non-empty")
        for level in self.fractions:
            if not isinstance(level, DownsampleLevel):
                raise ConfigError(f"fractions entries must be DownsampleLevel, got {level!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if not self.algorithms:
            raise ConfigError("algorithms must be non-empty")
        if self.k < 1:
            raise ConfigError(f"evaluation cutoff k must be >= 1, got {self.k}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            dataset = raw["dataset"]
            algorithms = raw["algorithms"]
            output_dir = raw["output_dir"]
        except KeyError as missing:
            raise ConfigError(f"config missing required key {missing}") from None
        entries = []
        for item in algorithms:
            if isinstance(item, str):
                entries.append(AlgorithmEntry.fixed(item))
            elif isinstance(item, dict):
                kind = item.get("kind")
                if kind is None:
                    raise ConfigError(f"algorithm entry missing 'kind': {item!r}")
                if item.get("grid") == "default":
                    entries.append(AlgorithmEntry.default_grid(kind))
                elif "grid" in item:
                    for cfg in item["grid"]:
                        AlgorithmSpec.create(kind, **cfg)
                    entries.append(AlgorithmEntry(kind=kind, grid=tuple(item["grid"])))
                else:
                    entries.append(
                        AlgorithmEntry.fixed(kind, **item.get("hyperparameters", {}))
                    )
            else:
                raise ConfigError(f"unrecognized algorithm entry: {item!r}")
        ratios_raw = raw.get("ratios", {})
        return cls(
            dataset_path=dataset["path"],
            dataset_format=dataset["format"],
            dataset_id=dataset.get("id", ""),
            algorithms=entries,
            output_dir=output_dir,
            k_core=raw.get("k_core", 10),
            ratios=SplitRatios(
                ratios_raw.get("test", 0.1), ratios_raw.get("valid", 0.1)
            ),
            fractions=tuple(
                DownsampleLevel(f) for f in raw.get("fractions", [round(x / 10, 1) for x in range(1, 11)])
            ),
            seeds=tuple(raw.get("seeds", DEFAULT_SEEDS)),
            k=raw.get("k", 10),
            exclusive_timing=raw.get("exclusive_timing", False),
            jobs=raw.get("jobs", 1),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        p = Path(path)
        if not p.is_file():
            raise DataError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"config file {p} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)


@dataclass(frozen=True)
class ExperimentRecord:
    """Outcome of one grid cell."""

    dataset: str
    algorithm: str
    params_fingerprint: str
    fraction: float
    seed: int
    ndcg_mean: float | None
    n_evaluated: int | None
    fit_seconds: float | None
    eval_seconds: float | None
    status: str
    error: str
    completed_at: str

    def key(self) -> tuple[str, str, str, str, int]:
        return (
            self.dataset,
            self.algorithm,
            self.params_fingerprint,
            f"{self.fraction:.2f}",
            self.seed,
        )

    def to_row(self) -> list[str]:
        return [
            self.dataset,
            self.algorithm,
            self.params_fingerprint,
            f"{self.fraction:.2f}",
            str(self.seed),
            "" if self.ndcg_mean is None else repr(self.ndcg_mean),
            "" if self.n_evaluated is None else str(self.n_evaluated),
            "" if self.fit_seconds is None else repr(self.fit_seconds),
            "" if self.eval_seconds is None else repr(self.eval_seconds),
            self.status,
            self.error,
            self.completed_at,
        ]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "ExperimentRecord":
        if len(row) != len(RESULTS_HEADER):
            raise DataError(f"results row has {len(row)} fields, expected {len(RESULTS_HEADER)}")
        return cls(
            dataset=row[0],
            algorithm=row[1],
            params_fingerprint=row[2],
            fraction=float(row[3]),
            seed=int(row[4]),
            ndcg_mean=float(row[5]) if row[5] else None,
            n_evaluated=int(row[6]) if row[6] else None,
            fit_seconds=float(row[7]) if row[7] else None,
            eval_seconds=float(row[8]) if row[8] else None,
            status=row[9],
            error=row[10],
            completed_at=row[11],
        )


def load_results(path: str | Path) -> list[ExperimentRecord]:
    p = Path(path)
    if not p.is_file():
        return []
    records = []
    with open(p, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and tuple(header) != RESULTS_HEADER:
            raise DataError(f"{p}: unexpected results header {header!r}")
        for row in reader:
            if row:
                records.append(ExperimentRecord.from_row(row))
    return records


class _ResultsWriter:
    """Append-only writer that creates the header on first use."""

    def __init__(self, path: Path):
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(RESULTS_HEADER)

    def append(self, record: ExperimentRecord) -> None:
        with open(self.path, "a", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(record.to_row())


def derive_cell_seed(master_seed: int, dataset_id: str, kind: str, fraction: float) -> int:
    """Stable per-cell fit seed; adding algorithms never perturbs others."""
    payload = f"{master_seed}|{dataset_id}|{kind}|{fraction:.2f}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


FitFn = Callable[[AlgorithmSpec, RatingMatrix, int], FittedModel]


def tune_hyperparameters(
    kind: str,
    grid: Sequence[dict[str, Any]],
    bundle: SplitBundle,
    k: int = 10,
    dataset_id: str = "",
    fit_fn: FitFn | None = None,
) -> AlgorithmSpec:
    """Pick the grid configuration with the best validation nDCG@k.

    Every configuration is fitted on the full training set and scored
    against the validation items; ties keep the earlier grid entry.
    Configurations that fail to fit are skipped with a warning. A
    singleton grid is returned without fitting anything.
    """
    if not grid:
        raise ConfigError(f"empty tuning grid for {kind}")
    if len(grid) == 1:
        return AlgorithmSpec.create(kind, **grid[0])
    fit_fn = fit_fn or fit
    train = downsample_train(bundle, DownsampleLevel(1.0))
    matrix = build_matrix(train, bundle.ds.n_users, bundle.ds.n_items, default_binarize(kind))
    tune_seed = derive_cell_seed(bundle.seed, dataset_id, kind, 1.0) ^ 0xA5A5A5A5
    best_spec: AlgorithmSpec | None = None
    best_score = -1.0
    for cfg in grid:
        spec = AlgorithmSpec.create(kind, **cfg)
        try:
            model = fit_fn(spec, matrix, tune_seed)
            score = evaluate_on_validation(model, bundle, k).mean
        except Exception as exc:
            log.warning("tuning: %s config %s failed: %s", kind, cfg, exc)
            continue
        if score > best_score:
            best_score = score
            best_spec = spec
    if best_spec is None:
        raise ConfigError(f"all {len(grid)} tuning configurations failed for {kind}")
    return best_spec


def run_cell(
    ds: InteractionDataset,
    bundle: SplitBundle,
    spec: AlgorithmSpec,
    fraction: DownsampleLevel,
    seed: int,
    k: int = 10,
    dataset_id: str = "",
) -> ExperimentRecord:
    """Downsample, fit, and evaluate one grid cell.

    Model failures are captured as failed records rather than raised, so a
    grid keeps going when one cell breaks.
    """
    fit_seed = derive_cell_seed(seed, dataset_id, spec.kind, fraction.fraction)
    train = downsample_train(bundle, fraction)
    matrix = build_matrix(train, ds.n_users, ds.n_items, default_binarize(spec.kind))
    fit_seconds: float | None = None
    try:
        model, fit_seconds = time_phase(lambda: fit(spec, matrix, fit_seed))
        result, eval_seconds = time_phase(lambda: evaluate_model(model, bundle, train, k))
    except Exception as exc:
        if fit_seconds is None:
            fit_seconds = getattr(exc, "timing_seconds", None)
        log.warning("cell %s @ %.2f seed %s failed: %s", spec.kind, fraction.fraction, seed, exc)
        return ExperimentRecord(
            dataset=dataset_id,
            algorithm=spec.kind,
            params_fingerprint=spec.fingerprint(),
            fraction=fraction.fraction,
            seed=seed,
            ndcg_mean=None,
            n_evaluated=None,
            fit_seconds=fit_seconds,
            eval_seconds=None,
            status="failed",
            error=" ".join(f"{type(exc).__name__}: {exc}".split()),
            completed_at=_utc_now(),
        )
    return ExperimentRecord(
        dataset=dataset_id,
        algorithm=spec.kind,
        params_fingerprint=spec.fingerprint(),
        fraction=fraction.fraction,
        seed=seed,
        ndcg_mean=result.mean,
        n_evaluated=result.n_evaluated,
        fit_seconds=fit_seconds,
        eval_seconds=eval_seconds,
        status="ok",
        error="",
        completed_at=_utc_now(),
    )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_grid(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Execute every missing cell of the configured grid.

    Returns one record per cell of the grid, reusing rows already present
    in the results file. Per-cell model errors become failed records; I/O
    errors abort.
    """
    config.validate()
    path = resolve_data_path(config.dataset_path)
    if not Path(path).is_file():
        raise DataError(f"dataset file not found: {config.dataset_path}")
    raw = parse_interactions(path, config.dataset_format)
    ds = preprocess_pipeline(raw, config.k_core)
    log.info(
        "dataset %s: %d users, %d items, %d interactions after preprocessing",
        config.dataset_id, ds.n_users, ds.n_items, len(ds),
    )

    out_dir = Path(config.output_dir)
    writer = _ResultsWriter(out_dir / "results.csv")
    existing = {rec.key(): rec for rec in load_results(writer.path)}

    tasks: list[tuple[tuple, SplitBundle, AlgorithmSpec, DownsampleLevel, int]] = []
    ordered_keys: list[tuple] = []
    scheduled: set[tuple] = set()
    for seed in config.seeds:
        bundle = user_holdout_split(ds, config.ratios, seed)
        for entry in config.algorithms:
            spec = tune_hyperparameters(
                entry.kind, entry.grid, bundle, config.k, config.dataset_id
            )
            fingerprint = spec.fingerprint()
            for level in config.fractions:
                key = (
                    config.dataset_id,
                    spec.kind,
                    fingerprint,
                    f"{level.fraction:.2f}",
                    seed,
                )
                ordered_keys.append(key)
                if key in existing or key in scheduled:
                    continue
                scheduled.add(key)
                tasks.append((key, bundle, spec, level, seed))

    produced: dict[tuple, ExperimentRecord] = {}

    def execute(task) -> ExperimentRecord:
        _key, bundle, spec, level, seed = task
        return run_cell(ds, bundle, spec, level, seed, config.k, config.dataset_id)

    if config.exclusive_timing or config.jobs == 1:
        for task in tasks:
            record = execute(task)
            writer.append(record)
            produced[task[0]] = record
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            pending = {pool.submit(execute, task): task for task in tasks}
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    task = pending.pop(fut)
                    record = fut.result()
                    writer.append(record)
                    produced[task[0]] = record

    return [produced.get(key) or existing[key] for key in ordered_keys]
