import json

import pytest

from oscillab.cli import main


def run_cli(args):
    return main(args)


class TestSweepCommand:
    def test_default_artifacts(self, tmp_path, capsys):
        code = run_cli([
            "sweep", "--equation", "heat", "--scheme", "btcs",
            "--bc", "dirichlet", "--resolution", "5",
            "--out", str(tmp_path), "--emit", "csv", "image", "svg", "report",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "codes:" in out
        for name in ("heat_btcs_dirichlet.csv", "heat_btcs_dirichlet.ppm",
                     "heat_btcs_dirichlet_curves.svg",
                     "heat_btcs_dirichlet_report.json"):
            assert (tmp_path / name).exists()

    def test_unknown_scheme_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli(["sweep", "--scheme", "dufort"])
        assert exc.value.code == 1
        assert "usage" in capsys.readouterr().err

    def test_unwritable_output_exits_two(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        code = run_cli([
            "sweep", "--scheme", "btcs", "--resolution", "4",
            "--out", str(blocker), "--emit", "csv",
        ])
        assert code == 2
        assert "i/o error" in capsys.readouterr().err

    def test_config_file(self, tmp_path):
        cfg = {
            "equation": "heat", "scheme": "btcs", "bc": "dirichlet",
            "resolution": 4, "emit": ["csv"], "mode_seed": 0.01,
        }
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(json.dumps(cfg))
        code = run_cli(["sweep", "--config", str(cfg_path),
                        "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "heat_btcs_dirichlet.csv").exists()

    def test_bad_range_exits_one(self, tmp_path, capsys):
        code = run_cli(["sweep", "--dx-range", "1.0", "0.5",
                        "--out", str(tmp_path)])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err


class TestSolveCommand:
    def test_prints_trace_and_flags(self, capsys):
        code = run_cli(["solve", "--equation", "heat", "--scheme", "ftcs",
                        "--dx", "0.1", "--dt", "0.002", "--final-time", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "stable=True" in out
        assert "max|u|" in out

    def test_fisher_frozen_solve(self, capsys):
        code = run_cli(["solve", "--equation", "fisher", "--scheme",
                        "btcs-frozen", "--dx", "0.1", "--dt", "0.01",
                        "--final-time", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "stable=True" in out
        assert "eigenvalue verdicts" in out

    def test_divergence_reported(self, capsys):
        code = run_cli(["solve", "--scheme", "ftcs", "--dx", "0.1",
                        "--dt", "0.006"])
        assert code == 0
        out = capsys.readouterr().out
        assert "diverged at step" in out

    def test_png_emission(self, tmp_path, capsys):
        code = run_cli(["solve", "--scheme", "btcs", "--dx", "0.2",
                        "--dt", "0.05", "--final-time", "1",
                        "--out", str(tmp_path), "--emit", "png"])
        assert code == 0
        pngs = list(tmp_path.glob("*.png"))
        assert len(pngs) == 1


class TestSpectrumCommand:
    def test_prints_eigenvalues(self, capsys):
        code = run_cli(["spectrum", "--equation", "heat", "--scheme", "ftcs",
                        "--dx", "0.25", "--dt", "0.015625"])
        assert code == 0
        out = capsys.readouterr().out
        assert "spectral radius" in out
        assert "+0.85" in out  # top eigenvalue at r = 0.25

    def test_mesh_too_coarse_exits_one(self, capsys):
        code = run_cli(["spectrum", "--dx", "0.9", "--dt", "0.01"])
        assert code == 1
        assert "mesh too coarse" in capsys.readouterr().err


class TestAuditCommand:
    def test_from_csv(self, tmp_path, capsys):
        code = run_cli(["sweep", "--scheme", "cn", "--resolution", "10",
                        "--out", str(tmp_path), "--emit", "csv"])
        assert code == 0
        capsys.readouterr()
        csv_path = tmp_path / "heat_cn_dirichlet.csv"
        report_path = tmp_path / "audit.json"
        code = run_cli(["audit", str(csv_path), "--scheme", "cn",
                        "--out", str(report_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "C1" in out and "C2" in out
        assert report_path.exists()

    def test_missing_csv_exits_two(self, tmp_path, capsys):
        code = run_cli(["audit", str(tmp_path / "nope.csv")])
        assert code == 2
