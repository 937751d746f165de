import json
import os

import pytest

from frachs.cli import main
from frachs.config import ConfigError, parse_config_text

BASE = "[scenario]\npreset = default\n"


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def artifact(out_dir, prefix, suffix=".json"):
    names = [
        f for f in os.listdir(out_dir)
        if f.startswith(prefix) and f.endswith(suffix)
        and not (prefix == "sweep-" and f.startswith("sweep-report-"))
    ]
    assert len(names) == 1, names
    return os.path.join(out_dir, names[0])


class TestConfigParsing:
    def test_round_trips_canonically(self):
        cfg = parse_config_text(BASE)
        canon = cfg.canonical_text()
        again = parse_config_text(canon)
        assert again.canonical_text() == canon
        assert again.config_hash() == cfg.config_hash()

    def test_missing_preset_rejected(self):
        with pytest.raises(ConfigError, match="preset"):
            parse_config_text("[scenario]\nalpha = 0.75\n")

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown field"):
            parse_config_text(BASE + "coolness = 11\n")

    def test_out_of_range_value_rejected(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config_text(BASE + "alpha = 1.5\n")

    def test_unsorted_ladder_rejected(self):
        with pytest.raises(ConfigError, match="ascending"):
            parse_config_text(BASE + "lambdas = 5,2,9\n")

    def test_hash_tracks_content(self):
        a = parse_config_text(BASE)
        b = parse_config_text(BASE + "alpha = 0.8\n")
        assert a.config_hash() != b.config_hash()


class TestExitCodes:
    def test_missing_file_is_config_error(self, tmp_path):
        assert main(["check", "--config", str(tmp_path / "nope.ini")]) == 2

    def test_missing_required_field(self, tmp_path):
        cfg = write(tmp_path, "[scenario]\nalpha = 0.75\n")
        assert main(["check", "--config", cfg]) == 2

    def test_bad_field_value(self, tmp_path):
        cfg = write(tmp_path, BASE + "grid_n = 1000\n")
        assert main(["check", "--config", cfg]) == 2

    def test_bad_lambdas_flag(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert main(["sweep", "--config", cfg, "--lambdas", "a,b,c"]) == 2

    def test_sweep_needs_three_weights(self, tmp_path):
        cfg = write(tmp_path, BASE)
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out, "--lambdas", "2,20"]) == 2

    def test_low_alpha_rejected_for_solve(self, tmp_path):
        cfg = write(tmp_path, BASE + "alpha = 0.4\ngrid_n = 512\n")
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


class TestCheck:
    def test_default_passes(self, tmp_path):
        cfg = write(tmp_path, BASE + "grid_n = 2048\nsobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["check", "--config", cfg, "--out", out]) == 0
        report = json.load(open(artifact(out, "check-")))
        assert report["passed"] is True
        assert report["admissibility"]["passed"] is True

    def test_flattened_envelope_fails_admissibility(self, tmp_path):
        cfg = write(
            tmp_path,
            BASE + "envelope_steepness = 1.0\ngrid_n = 2048\nsobolev_trials = 20\n",
        )
        out = str(tmp_path / "out")
        assert main(["check", "--config", cfg, "--out", out]) == 1
        report = json.load(open(artifact(out, "check-")))
        assert report["admissibility"]["passed"] is False
        assert report["admissibility"]["name"] == "L1-admissibility"

    def test_zero_density_fails_growth(self, tmp_path):
        cfg = write(tmp_path, BASE + "nonlinearity = zero\ngrid_n = 2048\nsobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["check", "--config", cfg, "--out", out]) == 1
        report = json.load(open(artifact(out, "check-")))
        assert report["growth"]["passed"] is False


class TestSolve:
    def test_default_solve(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["solve", "--config", cfg, "--out", out]) == 0
        report = json.load(open(artifact(out, "solve-report-")))
        assert report["converged"] is True
        assert report["energy"] < 0
        csv_path = artifact(out, "solve-solution-", ".csv")
        header = open(csv_path).readline().strip()
        assert header == "t,u_1"

    def test_zero_density_gives_flat_zero(self, tmp_path):
        cfg = write(tmp_path, BASE + "nonlinearity = zero\nsobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["solve", "--config", cfg, "--out", out]) == 0
        report = json.load(open(artifact(out, "solve-report-")))
        assert abs(report["energy"]) <= 1e-12
        assert report["sup_norm"] <= 1e-10

    def test_non_convergence_exits_3_with_artifacts(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\nmax_iters = 2\n")
        out = str(tmp_path / "out")
        assert main(["solve", "--config", cfg, "--out", out]) == 3
        report = json.load(open(artifact(out, "solve-report-")))
        assert report["converged"] is False
        assert os.path.exists(artifact(out, "solve-solution-", ".csv"))

    def test_lambda_below_threshold_is_config_error(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["solve", "--config", cfg, "--out", out, "--lambda", "0.5"]) == 2

    def test_bvp_reports_restricted_level(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\n")
        out = str(tmp_path / "out")
        assert main(["bvp", "--config", cfg, "--out", out]) == 0
        report = json.load(open(artifact(out, "bvp-report-")))
        assert report["c_tilde"] == report["energy"] < 0


class TestSweepCommand:
    def test_short_ladder_runs_clean(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\nlambdas = 2,20,200\n")
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        rows = open(artifact(out, "sweep-", ".csv")).read().strip().splitlines()
        assert rows[0] == "lambda,c_lambda,c_tilde,tail_mass,weighted_mass,dist_alpha,norm_lambda"
        assert len(rows) == 4
        report = json.load(open(artifact(out, "sweep-report-")))
        assert report["flagged"] is False

    def test_ladder_below_threshold_rejected(self, tmp_path):
        cfg = write(tmp_path, BASE + "sobolev_trials = 20\nlambdas = 0.5,2,20\n")
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out]) == 2

    def test_starved_rows_exit_4_with_complete_csv(self, tmp_path):
        cfg = write(
            tmp_path,
            BASE + "sobolev_trials = 20\nlambdas = 2,20,200\nmax_iters = 2\n",
        )
        out = str(tmp_path / "out")
        assert main(["sweep", "--config", cfg, "--out", out]) == 4
        rows = open(artifact(out, "sweep-", ".csv")).read().strip().splitlines()
        assert len(rows) == 4


class TestSelftest:
    def test_default_grid_passes(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert main(["ops-selftest", "--config", cfg]) == 0

    def test_high_order_passes(self, tmp_path):
        cfg = write(tmp_path, BASE + "alpha = 0.999\n")
        assert main(["ops-selftest", "--config", cfg]) == 0

    def test_coarse_grid_fails(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert main(["ops-selftest", "--config", cfg, "--grid-n", "8"]) == 1
