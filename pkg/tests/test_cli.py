import json

import pytest

from greenlens.cli import main
from greenlens.ingest import read_canonical_csv, write_canonical_csv


@pytest.fixture()
def raw_tsv(tmp_path, synth_ds):
    # synthetic interactions in the tab-separated raw layout
    path = tmp_path / "raw.data"
    lines = []
    for x in synth_ds.interactions():
        lines.append(f"{x.user_id}\t{x.item_id}\t{x.rating}\t{x.timestamp}")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestEstimate:
    def test_published_example(self, capsys):
        rc = main(["estimate", "--runtime-ratio", "0.72"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["savings_gco2e"] == pytest.approx(27_474.72, rel=1e-9)

    def test_overridable_params(self, capsys):
        rc = main(
            ["estimate", "--runtime-ratio", "0.5", "--overhead-factor", "1",
             "--kwh-per-run", "0.51", "--n-configs", "10", "--intensity", "481"]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["savings_gco2e"] == pytest.approx(1226.55, rel=1e-9)

    def test_bad_ratio_is_data_error(self, capsys):
        rc = main(["estimate", "--runtime-ratio", "1.5"])
        assert rc == 2


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            ["--help"],
            ["ingest", "--help"],
            ["preprocess", "--help"],
            ["split", "--help"],
            ["run", "--help"],
            ["report", "--help"],
            ["estimate", "--help"],
        ],
    )
    def test_help_exits_zero(self, argv, capsys):
        assert main(argv) == 0
        assert "usage" in capsys.readouterr().out.lower()

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["estimate", "--runtime-ratio", "0.5", "--bogus"]) == 1

    def test_missing_subcommand_is_usage_error(self):
        assert main([]) == 1

    def test_unknown_subcommand_is_usage_error(self):
        assert main(["transmogrify"]) == 1


class TestPipelineCommands:
    def test_ingest_writes_canonical(self, tmp_path, raw_tsv, capsys):
        out = tmp_path / "canon.csv"
        rc = main(["ingest", "--in", str(raw_tsv), "--format", "ml100k_tsv", "--out", str(out)])
        assert rc == 0
        stats = json.loads(capsys.readouterr().out)
        ds = read_canonical_csv(out)
        assert stats["n_interactions"] == len(ds)

    def test_preprocess_stats_pair(self, tmp_path, raw_tsv, capsys):
        out = tmp_path / "pre.csv"
        rc = main(
            ["preprocess", "--in", str(raw_tsv), "--format", "ml100k_tsv", "--k", "5", "--out", str(out)]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["before"]["n_interactions"] >= payload["after"]["n_interactions"]
        assert out.is_file()

    def test_split_writes_bundle(self, tmp_path, synth_pre):
        canon = tmp_path / "pre.csv"
        write_canonical_csv(synth_pre, canon)
        out_dir = tmp_path / "split"
        rc = main(["split", "--in", str(canon), "--out-dir", str(out_dir), "--seed", "5"])
        assert rc == 0
        for name in ("train.csv", "validation.csv", "test.csv", "manifest.json"):
            assert (out_dir / name).is_file()
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["seed"] == 5

    def test_run_and_report(self, tmp_path, synth_pre, capsys):
        canon = tmp_path / "pre.csv"
        write_canonical_csv(synth_pre, canon)
        config = {
            "dataset": {"path": str(canon), "format": "canonical_csv", "id": "synth"},
            "algorithms": ["popularity", "bias"],
            "output_dir": str(tmp_path / "out"),
            "k_core": 5,
            "fractions": [0.5, 1.0],
            "seeds": [1],
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        assert main(["run", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "out" / "results.csv").is_file()
        assert main(
            ["report", "--results", str(tmp_path / "out" / "results.csv"), "--out-dir", str(tmp_path / "rep")]
        ) == 0
        assert (tmp_path / "rep" / "curves.csv").is_file()
        assert (tmp_path / "rep" / "synth_curves.svg").is_file()

    def test_run_missing_config_names_file(self, tmp_path, capsys):
        rc = main(["run", "--config", str(tmp_path / "missing.json")])
        assert rc == 2
        assert "missing.json" in capsys.readouterr().err

    def test_ingest_missing_input_is_data_error(self, tmp_path, capsys):
        rc = main(
            ["ingest", "--in", str(tmp_path / "nope.data"), "--format", "ml100k_tsv",
             "--out", str(tmp_path / "o.csv")]
        )
        assert rc == 2

    def test_data_dir_env_resolution(self, tmp_path, raw_tsv, monkeypatch, capsys):
        monkeypatch.setenv("GREENLENS_DATA_DIR", str(raw_tsv.parent))
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "canon.csv"
        rc = main(["ingest", "--in", raw_tsv.name, "--format", "ml100k_tsv", "--out", str(out)])
        assert rc == 0
