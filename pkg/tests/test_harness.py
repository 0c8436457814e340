import csv
import io
import warnings

import numpy as np
import pytest

import aris_opt.harness as harness
from aris_opt.harness import (CSV_HEADER, EXPERIMENTS, ExperimentConfig, SweepResult,
                              run_experiment, run_trial, write_csv)

FAST_RADAR = dict(experiment="radar_comm_sigma_d", sweep=(0.0,), trials=2, seed=11,
                  params={"num_elements": 8, "m_antennas": 2, "n_antennas": 2})


class TestConfigValidation:
    def test_unknown_experiment(self):
        with pytest.raises(ValueError, match="unknown experiment"):
            ExperimentConfig(experiment="nope")

    def test_unknown_param_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            ExperimentConfig(experiment="radar_comm_sigma_d", params={"bogus": 1})

    def test_defaults_fill_in(self):
        cfg = ExperimentConfig(experiment="radar_comm_sigma_d")
        spec = EXPERIMENTS["radar_comm_sigma_d"]
        assert cfg.sweep == spec.default_sweep
        assert cfg.trials == spec.default_trials
        assert cfg.params["num_elements"] == 64

    def test_bad_modes(self):
        with pytest.raises(ValueError, match="modes"):
            ExperimentConfig(experiment="d2d_power", modes=("aris", "active"))

    def test_pls_variants_cross_jammer(self):
        cfg = ExperimentConfig(experiment="pls_sigma_de")
        assert cfg.variants() == ("aris_jammer", "aris_nojammer",
                                  "conv_jammer", "conv_nojammer")
        cfg = ExperimentConfig(experiment="pls_sigma_de", params={"jammer": 1.0})
        assert cfg.variants() == ("aris", "conventional")


class TestRunExperiment:
    def test_single_trial_equals_trial_metrics(self):
        cfg = ExperimentConfig(**{**FAST_RADAR, "trials": 1})
        res = run_experiment(cfg)
        direct = run_trial(cfg.experiment, 0.0, cfg.params, cfg.variants(),
                           cfg.seed, 0, 0)
        for row in res.rows:
            metric, modulus = direct[row.mode]
            assert row.metric_mean == metric
            assert row.metric_std == 0.0
            assert row.mean_modulus == modulus
            assert (row.trials_ok, row.trials_failed) == (1, 0)

    def test_row_count_is_sweep_times_variants(self):
        cfg = ExperimentConfig(experiment="pls_sigma_de", sweep=(-10.0, 10.0),
                               trials=1, params={"num_elements": 2})
        res = run_experiment(cfg)
        assert len(res.rows) == 2 * 4

    def test_deterministic_across_runs_and_workers(self, tmp_path):
        cfg1 = ExperimentConfig(**FAST_RADAR)
        cfg2 = ExperimentConfig(**{**FAST_RADAR, "workers": 2})
        outs = []
        for cfg in (cfg1, ExperimentConfig(**FAST_RADAR), cfg2):
            path = tmp_path / f"out{len(outs)}.csv"
            write_csv(run_experiment(cfg), path)
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_failure_accounting_and_warning(self, monkeypatch):
        real = harness.run_trial

        def flaky(experiment, sweep_value, params, variants, seed, si, ti):
            if ti == 0:
                raise RuntimeError("injected failure")
            return real(experiment, sweep_value, params, variants, seed, si, ti)

        monkeypatch.setattr(harness, "run_trial", flaky)
        cfg = ExperimentConfig(**{**FAST_RADAR, "trials": 3})
        with pytest.warns(RuntimeWarning, match="failed"):
            res = run_experiment(cfg)
        for row in res.rows:
            assert row.trials_failed == 1
            assert row.trials_ok + row.trials_failed == 3

    def test_constant_metric_mean_is_exact(self, monkeypatch):
        def constant(experiment, sweep_value, params, variants, seed, si, ti):
            return {v: (2.5, 0.5) for v in variants}

        monkeypatch.setattr(harness, "run_trial", constant)
        cfg = ExperimentConfig(**{**FAST_RADAR, "trials": 7})
        res = run_experiment(cfg)
        for row in res.rows:
            assert row.metric_mean == 2.5
            assert row.metric_std == 0.0
            assert row.mean_modulus == 0.5


class TestWriteCsv:
    def test_empty_result_header_only(self, tmp_path):
        cfg = ExperimentConfig(**FAST_RADAR)
        path = tmp_path / "empty.csv"
        write_csv(SweepResult(config=cfg, rows=()), path)
        text = path.read_text(encoding="utf-8")
        assert text == ",".join(CSV_HEADER) + "\n"

    def test_rows_round_trip(self, tmp_path):
        cfg = ExperimentConfig(**FAST_RADAR)
        res = run_experiment(cfg)
        path = tmp_path / "run.csv"
        write_csv(res, path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(res.rows)
        for parsed, row in zip(rows, res.rows):
            assert parsed["experiment"] == row.experiment
            assert parsed["mode"] == row.mode
            # 17 significant digits preserve the double exactly
            assert float(parsed["metric_mean"]) == row.metric_mean
            assert float(parsed["metric_std"]) == row.metric_std
            assert float(parsed["mean_modulus"]) == row.mean_modulus
            assert int(parsed["trials_ok"]) == row.trials_ok

    def test_lf_line_endings(self, tmp_path):
        cfg = ExperimentConfig(**FAST_RADAR)
        path = tmp_path / "lf.csv"
        write_csv(run_experiment(cfg), path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")


class TestPlots:
    def test_svg_written_and_deterministic(self, tmp_path):
        pytest.importorskip("matplotlib")
        from aris_opt.harness import write_plots
        cfg = ExperimentConfig(**FAST_RADAR)
        res = run_experiment(cfg)
        first, second = [], []
        for sub, store in (("a", first), ("b", second)):
            d = tmp_path / sub
            d.mkdir()
            csv_path = d / "run.csv"
            write_csv(res, csv_path)
            for svg in write_plots(res, csv_path):
                store.append(svg.read_bytes())
        assert len(first) == 2
        assert first == second
