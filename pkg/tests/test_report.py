import xml.etree.ElementTree as ET

import pytest

from greenlens.errors import DataError
from greenlens.report import (
    DEFAULT_GROUPS,
    GroupMap,
    build_curves,
    emit_report,
    group_summary,
    runtime_ratios,
)
from greenlens.runner import ExperimentRecord

SVG = "{http://www.w3.org/2000/svg}"


def rec(algorithm, fraction, seed, ndcg, fit=1.0, ev=1.0, dataset="ds", status="ok"):
    return ExperimentRecord(
        dataset=dataset,
        algorithm=algorithm,
        params_fingerprint="fp" + algorithm,
        fraction=fraction,
        seed=seed,
        ndcg_mean=ndcg,
        n_evaluated=10,
        fit_seconds=fit,
        eval_seconds=ev,
        status=status,
        error="" if status == "ok" else "boom",
        completed_at="2024-01-01T00:00:00+00:00",
    )


class TestGroupMap:
    def test_default_groups_partition(self):
        g = DEFAULT_GROUPS
        assert g.group1 == {"user_knn", "svd", "item_knn", "item_knn_binary", "nmf"}
        assert g.group2 == {"bias", "popularity", "popularity_binary", "funk_svd", "biased_mf"}
        assert "random" not in g.group1 | g.group2

    def test_overlap_rejected(self):
        with pytest.raises(DataError, match="overlap"):
            GroupMap(frozenset({"svd"}), frozenset({"svd"}))

    def test_random_rejected(self):
        with pytest.raises(DataError, match="random"):
            GroupMap(frozenset({"random"}), frozenset())


class TestBuildCurves:
    def test_single_record_anchor(self):
        curves = build_curves([rec("bias", 1.0, 1, 0.4)])
        pt = curves[0].points[1.0]
        assert pt.relative == 1.0
        assert pt.std == 0.0
        assert pt.mean == 0.4

    def test_relative_is_ratio(self):
        curves = build_curves([rec("bias", 0.5, 1, 0.2), rec("bias", 1.0, 1, 0.4)])
        assert curves[0].points[0.5].relative == pytest.approx(0.5, abs=1e-12)

    def test_population_std_over_seeds(self):
        curves = build_curves([rec("bias", 1.0, 1, 0.3), rec("bias", 1.0, 2, 0.5)])
        pt = curves[0].points[1.0]
        assert pt.mean == pytest.approx(0.4, abs=1e-12)
        assert pt.std == pytest.approx(0.1, abs=1e-12)

    def test_missing_baseline_errors(self):
        with pytest.raises(DataError, match="svd"):
            build_curves([rec("svd", 0.5, 1, 0.2)])

    def test_failed_records_ignored(self):
        curves = build_curves(
            [rec("bias", 1.0, 1, 0.4), rec("bias", 0.5, 1, None, status="failed")]
        )
        assert 0.5 not in curves[0].points


class TestGroupSummary:
    def _two_member_curves(self, rel_a, rel_b, fraction=0.3):
        records = [
            rec("svd", 1.0, 1, 0.4),
            rec("svd", fraction, 1, 0.4 * rel_a),
            rec("nmf", 1.0, 1, 0.2),
            rec("nmf", fraction, 1, 0.2 * rel_b),
        ]
        return build_curves(records)

    def test_flat_curves_zero_drop(self):
        curves = self._two_member_curves(1.0, 1.0)
        groups = GroupMap(frozenset({"svd", "nmf"}), frozenset())
        summary = group_summary(curves, groups, [0.3, 1.0])
        assert summary["group1"][0.3] == pytest.approx(0.0, abs=1e-9)
        assert summary["group1"][1.0] == pytest.approx(0.0, abs=1e-9)

    def test_single_member_drop(self):
        records = [rec("svd", 1.0, 1, 1.0), rec("svd", 0.5, 1, 0.77)]
        groups = GroupMap(frozenset({"svd"}), frozenset())
        summary = group_summary(build_curves(records), groups, [0.5])
        assert summary["group1"][0.5] == pytest.approx(23.0, abs=1e-9)

    def test_two_member_mean_then_complement(self):
        curves = self._two_member_curves(0.5, 0.6)
        groups = GroupMap(frozenset({"svd", "nmf"}), frozenset())
        summary = group_summary(curves, groups, [0.3])
        assert summary["group1"][0.3] == pytest.approx(45.0, abs=1e-9)

    def test_missing_member_errors(self):
        curves = build_curves([rec("svd", 1.0, 1, 0.4)])
        groups = GroupMap(frozenset({"svd", "nmf"}), frozenset())
        with pytest.raises(DataError, match="nmf"):
            group_summary(curves, groups, [1.0])

    def test_permutation_invariant(self):
        records = [
            rec("svd", 1.0, 1, 0.4),
            rec("svd", 0.5, 1, 0.3),
            rec("nmf", 1.0, 1, 0.2),
            rec("nmf", 0.5, 1, 0.1),
        ]
        groups = GroupMap(frozenset({"svd", "nmf"}), frozenset())
        a = group_summary(build_curves(records), groups, [0.5])
        b = group_summary(build_curves(records[::-1]), groups, [0.5])
        assert a == b


class TestRuntimeRatios:
    def test_anchor_is_exactly_one(self):
        ratios = runtime_ratios(
            [rec("bias", 1.0, 1, 0.4, fit=2.0, ev=1.0), rec("bias", 0.5, 1, 0.3, fit=1.0, ev=0.5)]
        )
        assert ratios["bias"][1.0] == 1.0
        assert ratios["bias"][0.5] == pytest.approx(0.5, abs=1e-12)

    def test_sums_over_seeds(self):
        ratios = runtime_ratios(
            [
                rec("bias", 1.0, 1, 0.4, fit=2.0, ev=0.0),
                rec("bias", 1.0, 2, 0.4, fit=4.0, ev=0.0),
                rec("bias", 0.5, 1, 0.3, fit=1.0, ev=0.0),
                rec("bias", 0.5, 2, 0.3, fit=2.0, ev=0.0),
            ]
        )
        assert ratios["bias"][0.5] == pytest.approx(0.5, abs=1e-12)


def _full_roster_records():
    records = []
    kinds = sorted(DEFAULT_GROUPS.group1 | DEFAULT_GROUPS.group2 | {"random"})
    for idx, kind in enumerate(kinds):
        steep = kind in DEFAULT_GROUPS.group1
        for seed in (1, 2):
            base = 0.30 + 0.01 * idx
            records.append(rec(kind, 1.0, seed, base, fit=2.0, ev=1.0))
            factor = 0.5 if steep else 0.8
            records.append(rec(kind, 0.5, seed, base * factor, fit=1.2, ev=0.7))
    return records


class TestEmitReport:
    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(DataError, match="no records"):
            emit_report([], DEFAULT_GROUPS, tmp_path)

    def test_two_fraction_row_count(self, tmp_path):
        records = [rec("bias", 0.5, 1, 0.2), rec("bias", 1.0, 1, 0.4)]
        emit_report(records, DEFAULT_GROUPS, tmp_path)
        lines = (tmp_path / "curves.csv").read_text().splitlines()
        assert lines[0] == "algorithm,fraction,mean,std,relative"
        assert len(lines) == 3

    def test_full_artifacts(self, tmp_path):
        records = _full_roster_records()
        written = emit_report(records, DEFAULT_GROUPS, tmp_path)
        names = {p.name for p in written}
        assert names == {
            "curves.csv",
            "groups.csv",
            "runtime_ratios.csv",
            "ds_curves.svg",
            "ds_groups_50v100.svg",
        }

    def test_groups_csv_consistent_with_curves_csv(self, tmp_path):
        emit_report(_full_roster_records(), DEFAULT_GROUPS, tmp_path)
        rel = {}
        for line in (tmp_path / "curves.csv").read_text().splitlines()[1:]:
            algo, fraction, _mean, _std, relative = line.split(",")
            rel[(algo, fraction)] = float(relative)
        for line in (tmp_path / "groups.csv").read_text().splitlines()[1:]:
            group, fraction, drop = line.split(",")
            members = DEFAULT_GROUPS.group1 if group == "group1" else DEFAULT_GROUPS.group2
            expected = 100.0 * (
                1.0 - sum(rel[(m, fraction)] for m in members) / len(members)
            )
            assert float(drop) == pytest.approx(expected, abs=1e-9)

    def test_svg_well_formed_with_one_polyline_per_algorithm(self, tmp_path):
        records = _full_roster_records()
        emit_report(records, DEFAULT_GROUPS, tmp_path)
        tree = ET.parse(tmp_path / "ds_curves.svg")
        polylines = tree.getroot().findall(f".//{SVG}polyline")
        algorithms = {p.get("data-algorithm") for p in polylines}
        assert len(polylines) == 11
        assert algorithms == set(DEFAULT_GROUPS.group1 | DEFAULT_GROUPS.group2 | {"random"})

    def test_box_svg_structure(self, tmp_path):
        emit_report(_full_roster_records(), DEFAULT_GROUPS, tmp_path)
        tree = ET.parse(tmp_path / "ds_groups_50v100.svg")
        boxes = tree.getroot().findall(f".//{SVG}rect[@data-part='box']")
        medians = tree.getroot().findall(f".//{SVG}line[@data-part='median']")
        assert len(boxes) == 4  # two groups x two fractions
        assert len(medians) == 4

    def test_multi_dataset_subdirs(self, tmp_path):
        records = [
            rec("bias", 1.0, 1, 0.4, dataset="a"),
            rec("bias", 1.0, 1, 0.5, dataset="b"),
        ]
        emit_report(records, DEFAULT_GROUPS, tmp_path)
        assert (tmp_path / "a" / "curves.csv").is_file()
        assert (tmp_path / "b" / "curves.csv").is_file()
        assert (tmp_path / "a_curves.svg").is_file()
