"""greenlens: dataset-downsampling benchmarks for classic recommenders.

Pipeline stages: ingest raw interaction logs, preprocess (dedup plus
k-core), split per user, train eleven algorithm variants on nested
training downsamples, evaluate nDCG@10, and estimate the runtime, energy,
and CO2e savings of running on less data.
"""

from .errors import ConfigError, DataError, GreenlensError
from .evaluate import MetricResult, evaluate_model, ndcg_at_k
from .green import EnergyParams, EnergyReport, estimate_co2_savings, estimate_energy, time_phase
from .ingest import (
    Interaction,
    InteractionDataset,
    StatsRow,
    dataset_stats,
    parse_interactions,
    read_canonical_csv,
    write_canonical_csv,
)
from .models import AlgorithmSpec, RatingMatrix, build_matrix, fit, recommend
from .preprocess import KCoreParams, dedup_average, k_core, preprocess_pipeline
from .report import DEFAULT_GROUPS, GroupMap, build_curves, emit_report, group_summary
from .runner import ExperimentConfig, ExperimentRecord, run_cell, run_grid, tune_hyperparameters
from .split import (
    DownsampleLevel,
    SplitBundle,
    SplitRatios,
    downsample_train,
    user_holdout_split,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "ConfigError",
    "DEFAULT_GROUPS",
    "DataError",
    "DownsampleLevel",
    "EnergyParams",
    "EnergyReport",
    "ExperimentConfig",
    "ExperimentRecord",
    "GreenlensError",
    "GroupMap",
    "Interaction",
    "InteractionDataset",
    "KCoreParams",
    "MetricResult",
    "RatingMatrix",
    "SplitBundle",
    "SplitRatios",
    "StatsRow",
    "build_curves",
    "build_matrix",
    "dataset_stats",
    "dedup_average",
    "downsample_train",
    "emit_report",
    "estimate_co2_savings",
    "estimate_energy",
    "evaluate_model",
    "fit",
    "group_summary",
    "k_core",
    "ndcg_at_k",
    "parse_interactions",
    "preprocess_pipeline",
    "read_canonical_csv",
    "recommend",
    "run_cell",
    "run_grid",
    "time_phase",
    "tune_hyperparameters",
    "user_holdout_split",
    "write_canonical_csv",
]
