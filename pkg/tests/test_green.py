import time

import pytest

from greenlens.green import (
    EnergyParams,
    PhaseTiming,
    build_report,
    estimate_co2_savings,
    estimate_energy,
    time_phase,
)


class TestParams:
    def test_defaults(self):
        p = EnergyParams()
        assert p.kwh_per_run == 0.51
        assert p.n_configs == 10
        assert p.intensity_g_per_kwh == 481.0
        assert p.overhead_factor == 40.0

    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            EnergyParams(kwh_per_run=0.0)
        with pytest.raises(ValueError):
            EnergyParams(overhead_factor=-1.0)

    def test_phase_timing(self):
        t = PhaseTiming(1.5, 0.5)
        assert t.total == 2.0
        with pytest.raises(ValueError):
            PhaseTiming(-0.1, 0.0)


class TestCo2Savings:
    def test_published_example(self):
        # (100% - 72%) x 0.51 kWh x 10 x 481 g/kWh x 40
        got = estimate_co2_savings(0.72, EnergyParams())
        assert got == pytest.approx(27_474.72, rel=1e-9)

    def test_no_savings_at_full_runtime(self):
        assert estimate_co2_savings(1.0, EnergyParams()) == 0.0

    def test_half_runtime_without_overhead(self):
        got = estimate_co2_savings(0.5, EnergyParams(overhead_factor=1.0))
        assert got == pytest.approx(0.5 * 0.51 * 10 * 481, rel=1e-12)
        assert got == pytest.approx(1226.55, rel=1e-9)

    def test_ratio_domain(self):
        with pytest.raises(ValueError):
            estimate_co2_savings(0.0, EnergyParams())
        with pytest.raises(ValueError):
            estimate_co2_savings(1.2, EnergyParams())

    def test_strictly_decreasing_in_ratio(self):
        p = EnergyParams()
        values = [estimate_co2_savings(r, p) for r in (0.2, 0.4, 0.6, 0.8, 1.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_linear_in_each_parameter(self):
        base = EnergyParams()
        for field, doubled in (
            ("kwh_per_run", EnergyParams(kwh_per_run=1.02)),
            ("n_configs", EnergyParams(n_configs=20)),
            ("intensity_g_per_kwh", EnergyParams(intensity_g_per_kwh=962.0)),
            ("overhead_factor", EnergyParams(overhead_factor=80.0)),
        ):
            assert estimate_co2_savings(0.6, doubled) == pytest.approx(
                2 * estimate_co2_savings(0.6, base), rel=1e-12
            ), field


class TestEnergy:
    def test_zero_seconds(self):
        assert estimate_energy(0.0, EnergyParams()) == 0.0

    def test_unit_conversion(self):
        assert estimate_energy(3600.0, EnergyParams(device_power_watts=200.0)) == pytest.approx(
            0.2, rel=1e-12
        )

    def test_linearity(self):
        p = EnergyParams()
        assert estimate_energy(120.0, p) == pytest.approx(2 * estimate_energy(60.0, p), rel=1e-12)

    def test_additivity(self):
        p = EnergyParams()
        a, b = 17.3, 41.9
        assert estimate_energy(a + b, p) == pytest.approx(
            estimate_energy(a, p) + estimate_energy(b, p), abs=1e-12
        )

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            estimate_energy(-1.0, EnergyParams())


class TestTimePhase:
    def test_noop_is_fast(self):
        _, seconds = time_phase(lambda: None)
        assert 0.0 <= seconds < 0.1

    def test_sleep_is_measured(self):
        _, seconds = time_phase(lambda: time.sleep(0.1))
        assert 0.1 <= seconds < 0.5

    def test_returns_result(self):
        result, _ = time_phase(lambda: 41 + 1)
        assert result == 42

    def test_nested_not_longer_than_outer(self):
        def work():
            _, inner_a = time_phase(lambda: sum(range(1000)))
            _, inner_b = time_phase(lambda: sum(range(1000)))
            return inner_a + inner_b

        inner_total, outer = time_phase(work)
        assert inner_total <= outer

    def test_error_carries_timing(self):
        def boom():
            time.sleep(0.01)
            raise RuntimeError("nope")

        with pytest.raises(RuntimeError) as exc_info:
            time_phase(boom)
        assert exc_info.value.timing_seconds >= 0.01


class TestReport:
    def test_report_fields(self):
        report = build_report(0.72)
        assert report.savings_gco2e == pytest.approx(27_474.72, rel=1e-9)
        assert report.estimated_kwh == pytest.approx(0.72 * 0.51 * 10 * 40, rel=1e-12)
        assert report.estimated_gco2e == pytest.approx(report.estimated_kwh * 481.0, rel=1e-12)
        payload = report.as_dict()
        assert payload["params"]["n_configs"] == 10
