import os

import pytest

from qpert import cli

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def run_cli(*args):
    return cli.main(list(args))


class TestSolveCommand:
    def test_qps_file(self, capsys, tmp_path):
        out = tmp_path / "trace.csv"
        code = run_cli("solve", "--qps", os.path.join(FIXTURES, "dq1.qps"),
                       "--out", str(out), "--no-plot")
        assert code == 0
        captured = capsys.readouterr().out
        assert "status converged" in captured
        lines = out.read_text().splitlines()
        assert lines[0].startswith("k,mu_lambda,mu")
        assert len(lines) > 1

    def test_generated_instance(self, capsys):
        code = run_cli("solve", "--suite", "qts2", "--seed", "3", "--no-plot")
        assert code == 0
        assert "status" in capsys.readouterr().out

    def test_solve_figure_rendered(self, tmp_path):
        out = tmp_path / "trace.csv"
        code = run_cli("solve", "--qps", os.path.join(FIXTURES, "dq1.qps"),
                       "--out", str(out))
        assert code == 0
        assert (tmp_path / "trace.png").exists()


class TestExperimentCommands:
    ARGS = ("--m-range", "4,10", "--n-range", "20,40", "--count", "4")

    def test_ratios_writes_csv_and_png(self, tmp_path):
        out = tmp_path / "r.csv"
        code = run_cli("ratios", "--suite", "qts2", "--seed", "0", "--out", str(out),
                       "--stops", "4,8", *self.ARGS)
        assert code == 0
        assert out.exists()
        assert (tmp_path / "r.png").exists()

    def test_crossover_csv_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code = run_cli("crossover", "--suite", "qts2", "--seed", "1",
                           "--out", str(path), "--no-plot", *self.ARGS)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert run_cli("ratios", "--suite", "qts2") == cli.EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_unwritable_output_is_io_error(self, capsys, tmp_path):
        code = run_cli("crossover", "--suite", "qts2", "--seed", "0",
                       "--out", "/nonexistent-dir/x.csv", "--no-plot", *self.ARGS)
        assert code == cli.EXIT_IO

    def test_instance_failures_exit_partial(self, tmp_path):
        # a primal-infeasible instance never converges, so the crossover
        # experiment completes with one recorded failure
        suite = tmp_path / "suite"
        suite.mkdir()
        (suite / "bad.qps").write_text(
            "NAME INFEAS\nROWS\n N  obj\n E  r1\nCOLUMNS\n"
            " x1 r1 1.0 obj 1.0\n x2 r1 1.0\nRHS\n RHS1 r1 -1.0\n"
            "QUADOBJ\n x1 x1 1.0\n x2 x2 1.0\nENDATA\n")
        code = run_cli("crossover", "--suite", str(suite), "--seed", "0",
                       "--out", str(tmp_path / "f.csv"), "--no-plot")
        assert code == cli.EXIT_PARTIAL

    def test_config_file_supplies_defaults(self, tmp_path):
        conf = tmp_path / "exp.conf"
        conf.write_text(
            "suite=qts2\nseed=2\ncount=3\nm_range=4,10\nn_range=20,40\n"
            f"out={tmp_path / 'c.csv'}\nno_plot=true\n")
        code = run_cli("ratios", "--config", str(conf), "--stops", "4,8")
        assert code == 0
        assert (tmp_path / "c.csv").exists()

    def test_cli_flag_overrides_config(self, tmp_path):
        conf = tmp_path / "exp.conf"
        out1 = tmp_path / "one.csv"
        out2 = tmp_path / "two.csv"
        conf.write_text(f"suite=qts2\nseed=2\ncount=3\nm_range=4,10\n"
                        f"n_range=20,40\nout={out1}\nno_plot=true\n")
        code = run_cli("ratios", "--config", str(conf), "--stops", "4", "--out", str(out2))
        assert code == 0
        assert out2.exists() and not out1.exists()


class TestGenerateCommand:
    def test_writes_parseable_instances(self, tmp_path):
        out = tmp_path / "inst"
        code = run_cli("generate", "--suite", "qts1", "--seed", "0",
                       "--out", str(out), "--count", "2",
                       "--m-range", "4,8", "--n-range", "8,14", "--no-plot")
        assert code == 0
        files = sorted(os.listdir(out))
        assert files == ["qts1-0.qps", "qts1-1.qps"]
        from qpert.qpsio import parse_qps, to_standard_form
        with open(out / files[0], encoding="utf-8") as fh:
            qp, _ = to_standard_form(parse_qps(fh.read()))
        assert qp.m < qp.n

    def test_generate_determinism(self, tmp_path):
        outs = []
        for sub in ("g1", "g2"):
            out = tmp_path / sub
            run_cli("generate", "--suite", "qts2", "--seed", "5", "--out", str(out),
                    "--count", "1", "--m-range", "4,8", "--n-range", "8,14",
                    "--no-plot")
            outs.append((out / os.listdir(out)[0]).read_bytes())
        assert outs[0] == outs[1]
