"""Runtime measurement and modeled energy / CO2e estimates.

Energy is modeled, never metered: either runtime times a configured device
power, or a per-run kWh constant scaled by configuration count, carbon
intensity, and an overhead factor for prototyping, debugging, and re-runs.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Callable, TypeVar

T = TypeVar("T")

WATT_SECONDS_PER_KWH = 3_600_000.0


@dataclass(frozen=True)
class PhaseTiming:
    """Wall-clock seconds of one cell's fit and evaluate phases."""

    fit_seconds: float
    eval_seconds: float

    def __post_init__(self):
        if self.fit_seconds < 0 or self.eval_seconds < 0:
            raise ValueError("phase timings must be non-negative")

    @property
    def total(self) -> float:
        return self.fit_seconds + self.eval_seconds


@dataclass(frozen=True)
class EnergyParams:
    """Estimation constants; all strictly positive.

    ``kwh_per_run`` is the modeled energy of one algorithm/dataset run,
    ``intensity_g_per_kwh`` the grid carbon intensity, ``overhead_factor``
    the multiplier covering preliminary work, and ``device_power_watts``
    feeds the direct runtime-to-energy conversion only.
    """

    kwh_per_run: float = 0.51
    n_configs: int = 10
    intensity_g_per_kwh: float = 481.0
    overhead_factor: float = 40.0
    device_power_watts: float = 200.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class EnergyReport:
    runtime_ratio: float
    estimated_kwh: float
    estimated_gco2e: float
    savings_gco2e: float
    params: EnergyParams

    def as_dict(self) -> dict:
        return {
            "runtime_ratio": self.runtime_ratio,
            "estimated_kwh": self.estimated_kwh,
            "estimated_gco2e": self.estimated_gco2e,
            "savings_gco2e": self.savings_gco2e,
            "params": asdict(self.params),
        }


def time_phase(action: Callable[[], T]) -> tuple[T, float]:
    """Run ``action`` once, returning its result and monotonic duration.

    If the action raises, the elapsed time is attached to the exception as
    ``timing_seconds`` before it propagates.
    """
    start = time.perf_counter()
    try:
        result = action()
    except BaseException as exc:
        exc.timing_seconds = time.perf_counter() - start
        raise
    return result, time.perf_counter() - start


def estimate_energy(seconds: float, params: EnergyParams) -> float:
    """kWh drawn by ``seconds`` of runtime at the configured device power."""
    if seconds < 0:
        raise ValueError(f"seconds must be non-negative, got {seconds}")
    return seconds * params.device_power_watts / WATT_SECONDS_PER_KWH


def estimate_co2_savings(runtime_ratio: float, params: EnergyParams) -> float:
    """Grams of CO2e saved by running at ``runtime_ratio`` of full runtime.

    (1 - ratio) * kwh_per_run * n_configs * intensity * overhead_factor.
    """
    if not 0.0 < runtime_ratio <= 1.0:
        raise ValueError(f"runtime_ratio must lie in (0, 1], got {runtime_ratio}")
    return (
        (1.0 - runtime_ratio)
        * params.kwh_per_run
        * params.n_configs
        * params.intensity_g_per_kwh
        * params.overhead_factor
    )


def build_report(runtime_ratio: float, params: EnergyParams | None = None) -> EnergyReport:
    """Full estimate for a campaign executed at ``runtime_ratio``."""
    params = params or EnergyParams()
    savings = estimate_co2_savings(runtime_ratio, params)
    kwh = runtime_ratio * params.kwh_per_run * params.n_configs * params.overhead_factor
    return EnergyReport(
        runtime_ratio=runtime_ratio,
        estimated_kwh=kwh,
        estimated_gco2e=kwh * params.intensity_g_per_kwh,
        savings_gco2e=savings,
        params=params,
    )
