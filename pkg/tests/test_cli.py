import os

import pytest

from igdopt.cli import main
from igdopt.trace import read_trace_csv


def run(argv):
    return main(argv)


class TestIgdCommand:
    def test_smoke_converges(self, tmp_path):
        code = run(["igd", "--fn", "quad", "--mu", "3", "--eps1", "1",
                    "--theta", "0.8", "--output", str(tmp_path)])
        assert code == 0
        files = list(tmp_path.glob("igd_*.csv"))
        assert len(files) == 1
        trace = read_trace_csv(str(files[0]))
        assert len(trace) > 0

    def test_bad_theta_usage_error(self, tmp_path):
        assert run(["igd", "--theta", "1.2",
                    "--output", str(tmp_path)]) == 64

    def test_small_mu_allowed(self, tmp_path):
        assert run(["igd", "--mu", "1.05", "--max-iter", "200",
                    "--output", str(tmp_path)]) in (0, 2)

    def test_unknown_fn(self, tmp_path):
        assert run(["igd", "--fn", "mystery",
                    "--output", str(tmp_path)]) == 64

    def test_budget_exit_code(self, tmp_path):
        code = run(["igd", "--fn", "quad", "--max-iter", "2",
                    "--eps-tol", "0", "--output", str(tmp_path)])
        assert code == 2


class TestConfigPrecedence:
    def test_flags_beat_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mu=3\nmax-iter=2\n")
        # flag max-iter wins over the config's tiny cap
        code = run(["igd", "--fn", "quad", "--config", str(cfg),
                    "--max-iter", "5000", "--eps-tol", "1e-8",
                    "--output", str(tmp_path)])
        assert code == 0

    def test_config_file_used(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("max-iter=2  # tiny budget\n")
        code = run(["igd", "--fn", "quad", "--eps-tol", "0",
                    "--config", str(cfg), "--output", str(tmp_path)])
        assert code == 2

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("this is not a key value pair\n")
        assert run(["igd", "--config", str(cfg),
                    "--output", str(tmp_path)]) == 64


class TestLassoGrid:
    def test_small_grid_row_count(self, tmp_path):
        code = run(["lasso-grid", "--sizes", "30x60", "--seeds", "0,1",
                    "--methods", "GIALM-3,IALM-2", "--time-budget", "60",
                    "--output", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "lasso_grid.csv").read_text().splitlines()
        assert lines[0].startswith("test_id,method,m,n,iter,eta")
        assert len(lines) == 5  # header + 2 seeds x 2 methods

    def test_empty_grid_usage_error(self, tmp_path):
        assert run(["lasso-grid", "--sizes", "", "--output",
                    str(tmp_path)]) == 64

    def test_unknown_method(self, tmp_path):
        assert run(["lasso-grid", "--methods", "ADMM",
                    "--output", str(tmp_path)]) == 64


class TestRatesCommand:
    def test_report_written(self, tmp_path):
        code = run(["rates", "--p", "2,4", "--max-iter", "2000",
                    "--output", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "rate_report.csv").read_text().splitlines()
        assert lines[0] == ("function_p,q,quantity,predicted_exp,"
                            "fitted_exp,residual")
        assert len(lines) >= 3

    def test_p_below_two_rejected(self, tmp_path):
        assert run(["rates", "--p", "1.5", "--output", str(tmp_path)]) == 64


class TestDeblurCommand:
    def test_smoke(self, tmp_path):
        code = run(["deblur", "--side", "12", "--max-iter", "60",
                    "--methods", "GIALM-3", "--output", str(tmp_path)])
        assert code in (0, 2)
        trace = read_trace_csv(str(tmp_path / "deblur_GIALM-3.csv"))
        fs = trace.column("f_val")
        assert all(b <= a + 1e-10 for a, b in zip(fs, fs[1:]))
        pgm = (tmp_path / "deblur_GIALM-3.pgm").read_text().split()
        assert pgm[0] == "P2"
        assert len(pgm[4:]) == 144

    def test_side_cap(self, tmp_path):
        assert run(["deblur", "--side", "100",
                    "--output", str(tmp_path)]) == 64


class TestReproducibility:
    def test_igd_byte_identical(self, tmp_path):
        outs = []
        for sub in ("a", "b"):
            d = tmp_path / sub
            d.mkdir()
            assert run(["igd", "--fn", "quad", "--seed", "5",
                        "--output", str(d)]) == 0
            outs.append((d / "igd_quad_noisy_5.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_env_var_output_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("IGDOPT_OUTPUT", str(tmp_path / "envout"))
        assert run(["igd", "--fn", "quad"]) == 0
        assert (tmp_path / "envout" / "igd_quad_noisy_0.csv").exists()
