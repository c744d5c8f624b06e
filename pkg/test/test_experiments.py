"""
Tests for experiment files, price series, the runner and the command line.
"""

import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from dotenv import dotenv_values

from app.cli import main
from app.cogarch.engine import increments
from app.experiments import runner
from app.experiments.config import config_hash, load_experiment, parse_experiment
from app.experiments.series import (
    PriceSeries,
    load_series,
    log_returns,
    prices_from_path,
    read_price_csv,
    write_price_csv,
)
from app.shared.csv_io import read_numeric_csv
from app.shared.errors import DataError, ParameterError

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"
SEASONAL_FILE = EXPERIMENTS / "seasonal_intensity.env"
ZERO_MEAN_FILE = EXPERIMENTS / "zero_mean_intraday.env"

BASE_KEYS = {
    "tau": "2",
    "lengths": "0.5,1.5",
    "rates": "2,1",
    "jump_dist": "normal(0,1),point(0.5)",
    "p": "1",
    "q": "1",
    "alpha0": "0.1",
    "alpha": "0.2",
    "beta": "0.5",
    "periods": "4",
    "sample_interval": "0.5",
}


def _keys(**overrides):
    values = dict(BASE_KEYS)
    values.update(overrides)
    return {k: v for k, v in values.items() if v is not None}


# ==================== EXPERIMENT FILES ====================

class TestConfig:
    def test_seasonal_file(self, seasonal_experiment, seasonal_cfg, seasonal_params):
        assert seasonal_experiment.semi_levy == seasonal_cfg
        assert seasonal_experiment.cogarch == seasonal_params
        assert seasonal_experiment.samples_per_period == 26
        assert seasonal_experiment.n_samples == 780
        assert seasonal_experiment.seed == 20240601
        assert seasonal_experiment.analysis.M == 240
        assert seasonal_experiment.analysis.max_lag == 104

    def test_zero_mean_file(self, zero_mean_experiment, zero_mean_cfg):
        assert zero_mean_experiment.semi_levy == zero_mean_cfg
        assert zero_mean_experiment.n_samples == 735 * 26
        assert zero_mean_experiment.analysis.M == 550

    def test_defaults(self):
        config = parse_experiment(_keys())
        assert config.semi_levy.drift_delta == 0.0
        assert config.cogarch.y0 is None
        assert config.analysis.M is None
        assert config.analysis.alpha == 0.05

    @pytest.mark.parametrize(
        "overrides",
        [
            {"tau": None},
            {"lengths": "0.5,x"},
            {"jump_dist": "gamma(1,2),normal(0,1)"},
            {"d": "3"},
            {"q": "0"},
            {"beta": "0.5,0.2"},
            {"sample_interval": "0.3"},
            {"lengths": "0.5,1"},
            {"seed": "-1"},
            {"periods": "0"},
        ],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ParameterError):
            parse_experiment(_keys(**overrides))

    def test_unknown_keys_warn(self, caplog):
        with caplog.at_level(logging.WARNING):
            parse_experiment(_keys(colour="blue"))
        assert "colour" in caplog.text

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParameterError):
            load_experiment(tmp_path / "absent.env")

    def test_file_errors_name_the_file(self, tmp_path):
        path = tmp_path / "broken.env"
        path.write_text("tau=6.5\n", encoding="utf-8")
        with pytest.raises(ParameterError, match="broken.env"):
            load_experiment(path)

    def test_seed_override_and_hash(self, seasonal_experiment):
        assert seasonal_experiment.with_seed(None) is seasonal_experiment
        reseeded = seasonal_experiment.with_seed(7)
        assert reseeded.seed == 7
        assert config_hash(seasonal_experiment) == config_hash(load_experiment(SEASONAL_FILE))
        assert config_hash(reseeded) != config_hash(seasonal_experiment)
        with pytest.raises(ParameterError):
            seasonal_experiment.with_seed(2 ** 64)


# ==================== PRICE SERIES ====================

class TestSeries:
    def test_log_returns(self):
        series = PriceSeries(timestamps=np.array([0.0, 1.0]), prices=np.array([100.0, 105.0]))
        np.testing.assert_allclose(log_returns(series), [math.log(1.05)])

    def test_non_positive_price(self):
        series = PriceSeries(timestamps=np.array([0.0, 1.0, 2.0]), prices=np.array([100.0, 0.0, 1.0]))
        with pytest.raises(DataError, match="row 1"):
            log_returns(series)

    def test_timestamps_must_increase(self):
        with pytest.raises(DataError):
            PriceSeries(timestamps=np.array([0.0, 1.0, 1.0]), prices=np.ones(3))

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "prices.csv"
        path.write_text("time,price\n0,100\n1,abc\n", encoding="utf-8")
        with pytest.raises(DataError) as info:
            read_price_csv(path)
        assert info.value.line == 3

    def test_negative_price_reports_line(self, tmp_path):
        path = tmp_path / "prices.csv"
        path.write_text("time,price\n0,100\n1,-2\n2,101\n", encoding="utf-8")
        with pytest.raises(DataError) as info:
            read_price_csv(path)
        assert info.value.line == 3

    def test_missing_column(self, tmp_path):
        path = tmp_path / "prices.csv"
        path.write_text("time,close\n0,100\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_price_csv(path)

    def test_load_kinds(self, tmp_path):
        prices = tmp_path / "prices.csv"
        write_price_csv(PriceSeries(np.arange(3.0), np.array([100.0, 110.0, 99.0])), prices)
        np.testing.assert_allclose(load_series(prices), np.diff(np.log([100.0, 110.0, 99.0])), rtol=1e-12)

        grid = tmp_path / "grid.csv"
        pd.DataFrame({"index": [0, 1, 2], "time": [0.0, 0.5, 1.0], "V": [1.0, 1.0, 1.0], "G": [0.0, 0.25, -0.5]}).to_csv(
            grid, index=False
        )
        np.testing.assert_allclose(load_series(grid), [0.25, -0.75])
        np.testing.assert_allclose(load_series(grid, kind="value", column="V"), [1.0, 1.0, 1.0])

        values = tmp_path / "values.csv"
        values.write_text("value\n1\n2\n4\n", encoding="utf-8")
        np.testing.assert_allclose(load_series(values), [1.0, 2.0, 4.0])

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(DataError):
            load_series(tmp_path / "x.csv", kind="volume")


# ==================== RUNNER ====================

class TestRunner:
    def test_simulate_files(self, seasonal_experiment, tmp_path):
        result = runner.run_simulate(seasonal_experiment, out_dir=tmp_path)
        assert result.exit_code == runner.EXIT_OK
        assert set(result.files) == {"jumps", "grid", "driver", "manifest"}
        grid = pd.read_csv(result.files["grid"])
        assert list(grid.columns) == ["index", "time", "V", "G"]
        assert len(grid) == 780
        jumps = pd.read_csv(result.files["jumps"])
        assert list(jumps.columns) == ["n", "arrival", "V_jump", "G_jump"]
        assert len(jumps) == result.jump_path.size
        manifest = json.loads(result.files["manifest"].read_text(encoding="utf-8"))
        assert manifest["seed"] == 20240601
        assert manifest["config_hash"] == config_hash(seasonal_experiment)
        assert manifest["n_samples"] == 780

    def test_grid_file_matches_path(self, seasonal_experiment, tmp_path):
        result = runner.run_simulate(seasonal_experiment, out_dir=tmp_path)
        grid = read_numeric_csv(result.files["grid"], required=("index", "time", "V", "G"))
        np.testing.assert_array_equal(grid["V"].to_numpy(), result.path.v_grid)
        np.testing.assert_array_equal(grid["G"].to_numpy(), result.path.g_grid)

    def test_reproducible_bytes(self, seasonal_experiment, tmp_path):
        first = runner.run_simulate(seasonal_experiment, out_dir=tmp_path / "a")
        second = runner.run_simulate(seasonal_experiment, out_dir=tmp_path / "b")
        other = runner.run_simulate(seasonal_experiment, out_dir=tmp_path / "c", seed=1)
        for name in ("jumps", "grid", "driver", "manifest"):
            assert first.files[name].read_bytes() == second.files[name].read_bytes()
        assert first.files["grid"].read_bytes() != other.files["grid"].read_bytes()

    def test_check(self, seasonal_experiment, zero_mean_experiment, tmp_path):
        passed = runner.run_check(seasonal_experiment, out_dir=tmp_path)
        assert passed.exit_code == runner.EXIT_OK
        values = dotenv_values(passed.files["conditions"])
        assert values["overall"] == "true"
        assert passed.files["report"].read_text(encoding="utf-8").startswith("Condition report")
        assert runner.run_check(zero_mean_experiment).exit_code == runner.EXIT_CHECK_FAILED

    def test_require_valid(self, zero_mean_experiment):
        result = runner.run_simulate(zero_mean_experiment, require_valid=True)
        assert result.exit_code == runner.EXIT_CHECK_FAILED
        assert result.path is None
        assert not result.report.overall

    def test_require_valid_reuses_report(self, seasonal_experiment, monkeypatch):
        report = runner.run_check(seasonal_experiment).report
        monkeypatch.setattr(runner, "check_conditions", lambda *args, **kwargs: pytest.fail("checked twice"))
        result = runner.run_simulate(seasonal_experiment, require_valid=True, report=report)
        assert result.exit_code == runner.EXIT_OK
        assert result.report is report

    def test_prepare_series(self):
        np.testing.assert_array_equal(runner.prepare_series([1.0, -2.0, 3.0], square=True, tail=2), [4.0, 9.0])
        with pytest.raises(ParameterError):
            runner.prepare_series([1.0, 2.0], tail=3)

    def test_coherence_files(self, rng, tmp_path):
        result = runner.run_coherence(rng.standard_normal(64), 8, out_dir=tmp_path)
        frame = pd.read_csv(result.files["coherence"])
        assert list(frame.columns) == ["P", "Q", "value", "significant"]
        summary = dotenv_values(result.files["summary"])
        assert summary["n"] == "64" and summary["M"] == "8"

    def test_acf_table(self, rng, tmp_path):
        frame = runner.run_acf(rng.standard_normal(200), 10, out_dir=tmp_path)
        assert list(frame.columns) == ["lag", "acf", "band", "robust_band"]
        assert len(frame) == 11
        assert (tmp_path / runner.ACF_FILE).is_file()

    def test_charfn_table(self, seasonal_experiment):
        frame = runner.run_charfn(seasonal_experiment, [1.0, 6.5], [-1.0, 0.0, 1.0])
        assert len(frame) == 6
        origin = frame[frame["u"] == 0.0]
        np.testing.assert_allclose(origin["re"], 1.0)
        np.testing.assert_allclose(origin["im"], 0.0, atol=1e-15)

    def test_fixture_round_trip(self, seasonal_experiment, tmp_path):
        out = runner.write_fixture(seasonal_experiment, tmp_path / "prices.csv", seed=3)
        _, path = runner.simulate(seasonal_experiment.with_seed(3))
        returns = load_series(out)
        assert returns.shape == (path.n_samples - 1,)
        np.testing.assert_allclose(returns, increments(path), rtol=1e-9, atol=1e-12)
        assert out.with_suffix(".manifest.json").is_file()

    def test_prices_from_path(self, seasonal_experiment):
        _, path = runner.simulate(seasonal_experiment)
        series = prices_from_path(path, p0=50.0)
        assert series.prices[0] == pytest.approx(50.0 * math.exp(path.g_grid[0]))
        assert series.samples_per_period == 26
        with pytest.raises(DataError):
            prices_from_path(path, p0=0.0)


# ==================== COMMAND LINE ====================

class TestCli:
    def test_check_exit_codes(self, capsys):
        assert main(["check", "--config", str(SEASONAL_FILE)]) == 0
        assert "overall: OK" in capsys.readouterr().out
        assert main(["check", "--config", str(ZERO_MEAN_FILE)]) == 1

    def test_missing_config(self, tmp_path, capsys):
        assert main(["check", "--config", str(tmp_path / "absent.env")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_simulate_then_analyse(self, tmp_path):
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(SEASONAL_FILE), "--out", str(out)]) == 0
        grid = out / runner.GRID_FILE
        assert grid.is_file()
        assert main(["coherence", "--input", str(grid), "--M", "240", "--out", str(tmp_path / "coh")]) == 0
        assert (tmp_path / "coh" / runner.COHERENCE_FILE).is_file()
        assert main(["acf", "--input", str(grid), "--max-lag", "52", "--square", "--out", str(tmp_path / "acf")]) == 0
        assert len(pd.read_csv(tmp_path / "acf" / runner.ACF_FILE)) == 53

    def test_simulate_require_valid(self, tmp_path):
        code = main(["simulate", "--config", str(ZERO_MEAN_FILE), "--require-valid", "--out", str(tmp_path)])
        assert code == 1
        assert not (tmp_path / runner.GRID_FILE).exists()

    def test_coherence_needs_window(self, tmp_path):
        values = tmp_path / "values.csv"
        values.write_text("value\n" + "\n".join(str(v) for v in range(10)) + "\n", encoding="utf-8")
        assert main(["coherence", "--input", str(values), "--out", str(tmp_path)]) == 2

    def test_bad_input_line(self, tmp_path, capsys):
        prices = tmp_path / "prices.csv"
        prices.write_text("time,price\n0,100\n1,oops\n", encoding="utf-8")
        assert main(["acf", "--input", str(prices), "--max-lag", "1", "--out", str(tmp_path)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_charfn_and_fixture(self, tmp_path):
        assert main(["charfn", "--config", str(SEASONAL_FILE), "--t", "1", "--out", str(tmp_path)]) == 0
        assert len(pd.read_csv(tmp_path / runner.CHARFN_FILE)) == 9
        fixture = tmp_path / "prices.csv"
        assert main(["fixture", "--config", str(SEASONAL_FILE), "--out", str(fixture)]) == 0
        assert len(read_price_csv(fixture)) == 780

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["plot"])
