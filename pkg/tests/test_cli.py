"""End-to-end CLI: prepare, run, sweep, export, exit codes, resumability."""
import json
from pathlib import Path

import numpy as np
import pytest

from vqclab.cli import main, parse_sweep_file
from vqclab.sweep import (
    FeatureCache,
    SweepConfig,
    derive_seed,
    read_rows_csv,
    run_spec_list,
)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Tiny synthetic data prepared once for all CLI tests."""
    base = tmp_path_factory.mktemp("cli")
    data_dir, out_dir = base / "data", base / "out"
    from vqclab import synth

    synth.make_synthetic_idx(data_dir, "digits", n_train=600, n_test=200)
    return data_dir, out_dir


def run_cli(data_dir, out_dir, *argv):
    return main(["--data-dir", str(data_dir), "--out-dir", str(out_dir), *argv])


FAST_RUN = ["--steps", "6", "--batch", "8", "--subsample", "300", "--test-subsample", "100"]


class TestPrepare:
    def test_featurizes_then_hits_cache(self, workdir, capsys):
        data_dir, out_dir = workdir
        args = ["prepare", "--dataset", "digits", "--pair", "3,8", "--subsample", "300"]
        assert run_cli(data_dir, out_dir, *args) == 0
        assert "featurized" in capsys.readouterr().out
        assert run_cli(data_dir, out_dir, *args) == 0
        assert "cache hit" in capsys.readouterr().out

    def test_corrupted_cache_recomputed(self, workdir, capsys):
        data_dir, out_dir = workdir
        args = ["prepare", "--dataset", "digits", "--pair", "2,5", "--subsample", "300"]
        run_cli(data_dir, out_dir, *args)
        capsys.readouterr()
        entries = list((out_dir / "features").glob("digits-2-5-*.npz"))
        assert entries
        entries[0].write_bytes(b"corrupted")
        assert run_cli(data_dir, out_dir, *args) == 0
        assert "featurized" in capsys.readouterr().out

    def test_missing_dataset_is_data_error(self, workdir, tmp_path):
        _, out_dir = workdir
        assert run_cli(tmp_path / "nowhere", out_dir, "prepare", "--dataset", "fashion",
                       "--pair", "0,1") == 2

    def test_synthetic_flag_generates(self, tmp_path, capsys):
        assert run_cli(tmp_path / "d", tmp_path / "o", "prepare", "--dataset", "digits",
                       "--synthetic", "--pair", "0,1", "--subsample", "3000") == 0


class TestRun:
    def test_produces_artifacts(self, workdir, capsys):
        data_dir, out_dir = workdir
        code = run_cli(data_dir, out_dir, "run", "--dataset", "digits", "--pair", "3,8",
                       "--conv", "CNN7", "--direction", "forward", "--seed", "5", *FAST_RUN)
        assert code == 0
        run_dir = out_dir / "single" / "digits-38-CNN7-forward-s5"
        report = json.loads((run_dir / "report.json").read_text())
        assert 0.0 <= report["sampling_accuracy"] <= 1.0
        assert 0.0 <= report["expectation_accuracy"] <= 1.0
        assert (run_dir / "model.json").exists()
        assert (run_dir / "report.csv").exists()

    def test_rerun_is_bit_identical(self, workdir, capsys):
        data_dir, out_dir = workdir
        args = ["run", "--dataset", "digits", "--pair", "3,8", "--conv", "CNN7",
                "--direction", "reversed", "--seed", "9", *FAST_RUN]
        run_cli(data_dir, out_dir, *args)
        run_dir = out_dir / "single" / "digits-38-CNN7-reversed-s9"
        first = (run_dir / "report.json").read_bytes()
        run_cli(data_dir, out_dir, *args)
        assert (run_dir / "report.json").read_bytes() == first

    def test_exports(self, workdir, capsys):
        data_dir, out_dir = workdir
        code = run_cli(data_dir, out_dir, "run", "--dataset", "digits", "--pair", "3,8",
                       "--conv", "CNN7", "--direction", "forward", "--seed", "2",
                       "--export-histogram", "--export-receptive-field", *FAST_RUN)
        assert code == 0
        run_dir = out_dir / "single" / "digits-38-CNN7-forward-s2"
        hist = (run_dir / "histogram.csv").read_text().splitlines()
        assert hist[0] == "value,label"
        centers = (run_dir / "centers.csv").read_text().splitlines()
        assert len(centers) == 3
        row = [float(v) for v in centers[1].split(",")]
        assert len(row) == 16 and all(0 <= v <= np.pi for v in row)

    def test_bad_pair_is_usage_error(self, workdir, capsys):
        data_dir, out_dir = workdir
        assert run_cli(data_dir, out_dir, "run", "--pair", "7") == 1
        assert run_cli(data_dir, out_dir, "run", "--pair", "3,3") == 1


class TestSweep:
    def test_tiny_sweep_outputs_tables(self, workdir, capsys):
        data_dir, out_dir = workdir
        sweep_out = out_dir / "sweep1"
        code = run_cli(
            data_dir, sweep_out, "sweep",
            "--dataset", "digits", "--conv", "CNN7",
            "--n-pairs", "1", "--repeats", "2", "--seed", "3",
            "--steps", "5", "--batch", "8", "--subsample", "300",
            "--test-subsample", "100",
        )
        assert code == 0
        rows = read_rows_csv(sweep_out / "rows.csv")
        assert len(rows) == 4  # 1 dataset x 1 kind x 2 directions x 1 pair x 2 repeats
        tables = (sweep_out / "tables.csv").read_text().splitlines()
        assert len(tables) == 3  # header + forward + reversed cells
        appendix = (sweep_out / "appendix.csv").read_text().splitlines()
        assert len(appendix) == 3

    def test_resume_uses_cached_runs(self, workdir, capsys):
        data_dir, out_dir = workdir
        sweep_out = out_dir / "sweep1"
        capsys.readouterr()
        code = run_cli(
            data_dir, sweep_out, "sweep",
            "--dataset", "digits", "--conv", "CNN7",
            "--n-pairs", "1", "--repeats", "2", "--seed", "3",
            "--steps", "5", "--batch", "8", "--subsample", "300",
            "--test-subsample", "100",
        )
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("cached") == 4

    def test_aggregation_matches_rows(self, workdir):
        _, out_dir = workdir
        sweep_out = out_dir / "sweep1"
        rows = read_rows_csv(sweep_out / "rows.csv")
        by_cell = {}
        for row in rows:
            by_cell.setdefault((row["dataset"], row["conv_kind"], row["direction"]), []).append(
                row["sampling_accuracy"]
            )
        table_lines = (sweep_out / "tables.csv").read_text().splitlines()[1:]
        for line in table_lines:
            parts = line.split(",")
            key = (parts[0], parts[1], parts[2])
            mean = float(parts[4])
            assert mean == pytest.approx(np.mean(by_cell[key]), abs=5e-7)  # 6-decimal table

    def test_deterministic_spec_derivation(self):
        config = SweepConfig(datasets=("digits",), conv_kinds=("CNN7",), n_pairs=2, repeats=1)
        a = run_spec_list(config)
        b = run_spec_list(config)
        assert a == b
        assert derive_seed(0, "x") != derive_seed(0, "y")
        assert derive_seed(0, "x") == derive_seed(0, "x")

    def test_config_file_and_overrides(self, workdir, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(
            "# sample sweep config\n"
            "datasets = digits\n"
            "conv_kinds = CNN7, CNN8\n"
            "repeats = 3\n"
            "n_steps = 7\n"
            "redraw_pairs_per_unitary = false\n"
        )
        values = parse_sweep_file(cfg)
        assert values["conv_kinds"] == ("CNN7", "CNN8")
        assert values["repeats"] == 3
        assert values["redraw_pairs_per_unitary"] is False

    def test_bad_config_key_is_usage_error(self, workdir, tmp_path, capsys):
        data_dir, out_dir = workdir
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnicate = 1\n")
        assert run_cli(data_dir, out_dir, "sweep", "--config", str(cfg)) == 1


class TestExport:
    def test_export_from_saved_model(self, workdir, capsys):
        data_dir, out_dir = workdir
        model_path = out_dir / "single" / "digits-38-CNN7-forward-s5" / "model.json"
        code = run_cli(
            data_dir, out_dir, "export", "--model", str(model_path),
            "--dataset", "digits", "--pair", "3,8",
            "--subsample", "300", "--test-subsample", "100",
            "--export-histogram",
        )
        assert code == 0
        assert (out_dir / "export" / "histogram.csv").exists()

    def test_export_without_target_is_usage_error(self, workdir, capsys):
        data_dir, out_dir = workdir
        model_path = out_dir / "single" / "digits-38-CNN7-forward-s5" / "model.json"
        assert run_cli(data_dir, out_dir, "export", "--model", str(model_path),
                       "--pair", "3,8", "--subsample", "300",
                       "--test-subsample", "100") == 1


def test_feature_cache_distinct_pairs_never_collide(workdir):
    data_dir, out_dir = workdir
    cache = FeatureCache(data_dir, out_dir / "features")
    a = cache.entry_path("digits", (3, 8), 300, 100, 1)
    b = cache.entry_path("digits", (8, 3), 300, 100, 1)
    c = cache.entry_path("digits", (3, 8), 300, 100, 2)
    assert len({a, b, c}) == 3
