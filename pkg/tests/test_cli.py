import json
import math

import pytest

import cli.main
from cli.main import EXIT_CONSTRAINT, EXIT_IO, EXIT_NUMERICAL, EXIT_PASS, run
from cli.report_builder import format_value
from cli.schemas import ExperimentConfig, build_config, parse_override
from core.errors import ConstraintViolationError
from provenance_chain.hash_chain_ledger import RunLedger


class TestConfig:
    def test_defaults(self):
        cfg = build_config({})
        assert cfg.n == 3
        assert cfg.b == 2.7
        assert cfg.c is None
        assert cfg.sweep_d() == [2.0, 3.7, math.inf]

    def test_unknown_key_rejected(self):
        with pytest.raises(ConstraintViolationError) as exc:
            build_config({"bogus": 1})
        assert exc.value.offenders == ["bogus"]

    def test_field_bounds_rejected(self):
        with pytest.raises(ConstraintViolationError) as exc:
            build_config({"b": 0.5})
        assert "b" in exc.value.offenders

    def test_override_parsing(self):
        assert parse_override("d=.inf") == {"d": math.inf}
        assert parse_override("h_values=[0.0, 0.1]") == {"h_values": [0.0, 0.1]}
        assert parse_override("n = 5") == {"n": 5}

    def test_override_needs_equals(self):
        with pytest.raises(ConstraintViolationError):
            parse_override("tol")

    def test_yaml_round_trip(self):
        cfg = build_config({"n": 5, "b": 1.95, "sigma": 0.1, "d": math.inf, "mode": "local"})
        assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg

    def test_preconditions_collected(self):
        cfg = build_config({"n": 4, "bump_width": 5.0, "r_max": 10.0})
        fields = [v.field for v in cfg.precondition_violations("solve")]
        assert fields == ["n", "bump_width"]
        assert cfg.precondition_violations("params") == []

    def test_format_value(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(math.inf) == "inf"
        assert format_value(True) == "true"
        assert format_value(3) == "3"


class TestRun:
    def test_params_run_passes(self, tmp_path):
        out = tmp_path / "params"
        assert run(["params", "--out", str(out)]) == EXIT_PASS
        for name in ("params.csv", "residuals.csv", "intervals.csv", "beta_identity.csv", "checks.csv", "status.json"):
            assert (out / name).exists()
        status = json.loads((out / "status.json").read_text())
        assert status["status"] == "ok"
        assert status["exit_code"] == 0
        ledger = RunLedger(out)
        assert ledger.verify_chain_integrity()
        assert ledger.get_chain_length() > 1

    def test_params_output_is_deterministic(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run(["params", "--out", str(first)]) == EXIT_PASS
        assert run(["params", "--out", str(second)]) == EXIT_PASS
        assert (first / "params.csv").read_bytes() == (second / "params.csv").read_bytes()

    def test_rerun_starts_fresh_ledger(self, tmp_path):
        out = tmp_path / "rerun"
        run(["params", "--out", str(out)])
        length = RunLedger(out).get_chain_length()
        run(["params", "--out", str(out)])
        ledger = RunLedger(out)
        assert ledger.get_chain_length() == length
        assert ledger.verify_chain_integrity()

    def test_inadmissible_b_exits_with_violation(self, tmp_path, capsys):
        out = tmp_path / "bad"
        assert run(["params", "--out", str(out), "--set", "b=2.0"]) == EXIT_CONSTRAINT
        status = json.loads((out / "status.json").read_text())
        assert status["exit_code"] == EXIT_CONSTRAINT
        assert "b_lower_bound" in [v["field"] for v in status["violations"]]
        assert "b_lower_bound" in capsys.readouterr().err

    def test_config_file_and_flag_precedence(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("b: 2.0\nout: ignored\n")
        out = tmp_path / "flag"
        assert run(["params", "--config", str(config), "--set", "b=2.7", "--out", str(out)]) == EXIT_PASS
        assert (out / "params.csv").exists()

    def test_malformed_yaml_is_io_failure(self, tmp_path):
        config = tmp_path / "broken.yaml"
        config.write_text("b: [2.7\n")
        assert run(["params", "--config", str(config), "--out", str(tmp_path / "io")]) == EXIT_IO

    def test_missing_config_is_io_failure(self, tmp_path):
        assert run(["params", "--config", str(tmp_path / "absent.yaml"), "--out", str(tmp_path / "io")]) == EXIT_IO

    def test_unsupported_dimension_for_solve(self, tmp_path):
        out = tmp_path / "n4"
        assert run(["solve", "--out", str(out), "--set", "n=4", "--set", "b=2.0"]) == EXIT_CONSTRAINT
        status = json.loads((out / "status.json").read_text())
        assert "n" in [v["field"] for v in status["violations"]]

    def test_unexpected_error_exits_with_one(self, tmp_path, monkeypatch, capsys):
        def broken(subcommand, ctx, builder):
            raise ValueError("bad shape")

        monkeypatch.setattr(cli.main, "dispatch", broken)
        out = tmp_path / "crash"
        assert run(["params", "--out", str(out)]) == EXIT_CONSTRAINT
        status = json.loads((out / "status.json").read_text())
        assert status["status"] == "error"
        assert status["exit_code"] == EXIT_CONSTRAINT
        assert status["error_type"] == "ValueError"
        assert "ValueError" in capsys.readouterr().err


SMALL_RUN = [
    "n_r=256", "r_max=10", "lambda_max=12", "t_max=6", "core_points=12", "tail_step=0.1", "t_min=0.01",
    "dispersive_samples=5", "dispersive_t_max=4", "bump_width=1.0", "epsilon=0.01", "horizon_tol=1.0",
]


def small_run(subcommand, out, *extra):
    argv = [subcommand, "--out", str(out)]
    for item in SMALL_RUN + list(extra):
        argv += ["--set", item]
    return run(argv)


class TestSubcommandRuns:
    @pytest.fixture(autouse=True)
    def setup(self, tmp_path):
        self.out = tmp_path

    def completed(self, name, code):
        status = json.loads((self.out / name / "status.json").read_text())
        assert code in (EXIT_PASS, EXIT_NUMERICAL)
        assert status["exit_code"] == code
        assert (self.out / name / "checks.csv").exists()
        assert RunLedger(self.out / name).verify_chain_integrity()
        return status

    def test_selftest(self):
        code = small_run("selftest", self.out / "selftest")
        self.completed("selftest", code)
        assert (self.out / "selftest" / "summary.txt").exists()

    def test_dispersive(self):
        code = small_run("dispersive", self.out / "dispersive")
        self.completed("dispersive", code)
        assert (self.out / "dispersive" / "dispersive_r3.7.csv").exists()
        assert (self.out / "dispersive" / "dispersive_rinf.csv").exists()

    def test_global_solve_passes(self):
        assert small_run("solve", self.out / "solve") == EXIT_PASS
        self.completed("solve", EXIT_PASS)
        for name in ("iterations.csv", "solution.csv"):
            assert (self.out / "solve" / name).exists()

    def test_local_solve(self):
        code = small_run("solve", self.out / "local", "mode=local", "b=2.0", "local_T=0.5")
        self.completed("local", code)
        assert (self.out / "local" / "local.csv").exists()
        assert (self.out / "local" / "solution.csv").exists()

    def test_scatter(self):
        code = small_run("scatter", self.out / "scatter", "h_values=[0.0]")
        self.completed("scatter", code)
        for name in ("asymptotic_plus.csv", "asymptotic_minus.csv", "decay_fits.csv", "defect_plus_h0.csv"):
            assert (self.out / "scatter" / name).exists()

    def test_stability(self):
        code = small_run("stability", self.out / "stability", "threads=2")
        self.completed("stability", code)
        assert (self.out / "stability" / "stability.csv").exists()
