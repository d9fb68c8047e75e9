"""Command-line front-end behavior and output formats."""

import json

import pytest

from robin_asym import cli
from robin_asym.errors import UsageError


class TestParsing:
    def test_curve_specs(self):
        assert cli.parse_curve_spec("circle:2.0") == {"kind": "circle", "radius": 2.0}
        assert cli.parse_curve_spec("ellipse:1.5,1") == {"kind": "ellipse", "a": 1.5, "b": 1.0}
        assert cli.parse_curve_spec("perturbed:0.1,3") == {
            "kind": "perturbed", "delta": 0.1, "mode": 3}

    def test_bad_curve_spec(self):
        with pytest.raises(UsageError):
            cli.parse_curve_spec("triangle:1")
        with pytest.raises(UsageError):
            cli.parse_curve_spec("circle:abc")

    def test_empty_beta_list_is_usage_error(self, tmp_path):
        cfg = {"curve": {"kind": "circle", "radius": 1.0}, "beta_list": []}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli.main(["run", str(path)]) == 2

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = {"curve": {"kind": "circle", "radius": 1.0},
               "beta_list": [10], "bogus": 1}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli.main(["run", str(path)]) == 2

    def test_descending_betas_rejected(self, tmp_path):
        cfg = {"curve": {"kind": "circle", "radius": 1.0}, "beta_list": [40, 20]}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli.main(["run", str(path)]) == 2


class TestSubcommands:
    def test_disc(self, tmp_path, capsys):
        rc = cli.main(["disc", "--R", "1", "--beta", "40", "--levels", "5",
                       "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "disc.csv").read_text().splitlines()
        assert lines[0] == "m,X,lambda,lambda_asymptotic_2term,defect"
        assert len(lines) >= 6

    def test_geometry(self, tmp_path, capsys):
        rc = cli.main(["geometry", "--curve", "ellipse:1.5,1", "--samples", "512",
                       "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "gamma_star = 1.5" in out
        assert (tmp_path / "curvature.csv").exists()

    def test_spectrum1d(self, tmp_path, capsys):
        rc = cli.main(["spectrum1d", "--curve", "circle:1", "--samples", "256",
                       "--modes", "5", "--grid", "128", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mu_1 = -0.25" in out

    def test_transverse(self, tmp_path, capsys):
        rc = cli.main(["transverse", "--a", "0.4", "--betas", "10,20",
                       "--gamma-b", "0.5", "--gamma-plus", "1.0",
                       "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 4
        header = (tmp_path / "transverse.csv").read_text().splitlines()[0]
        assert header.startswith("a,beta,zeta_D")

    def test_trial(self, tmp_path, capsys):
        rc = cli.main(["trial", "--curve", "circle:1", "--samples", "256",
                       "--beta", "20", "--jmax", "2", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "trial.csv").exists()

    def test_fem_quick(self, tmp_path, capsys):
        rc = cli.main(["fem", "--curve", "circle:1", "--samples", "256",
                       "--beta", "4", "--n", "2", "--target-h", "0.12",
                       "--no-refine", "--dump-mesh", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "fem_spectrum.csv").exists()
        assert (tmp_path / "mesh_nodes.csv").exists()
        assert (tmp_path / "mesh_triangles.csv").exists()

    def test_determinism(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert cli.main(["disc", "--beta", "40", "--levels", "4",
                             "--out", str(out)]) == 0
            assert cli.main(["geometry", "--curve", "perturbed:0.1,3",
                             "--samples", "512", "--out", str(out)]) == 0
        assert (out1 / "disc.csv").read_bytes() == (out2 / "disc.csv").read_bytes()
        assert (out1 / "curvature.csv").read_bytes() == (out2 / "curvature.csv").read_bytes()

    def test_csv_float_format(self, tmp_path):
        cli.main(["disc", "--beta", "40", "--levels", "2", "--out", str(tmp_path)])
        row = (tmp_path / "disc.csv").read_text().splitlines()[1].split(",")
        # 17 significant digits in scientific notation
        assert "e" in row[1] and len(row[1].split("e")[0].replace("-", "").replace(".", "")) == 17


class TestFullPipeline:
    def test_run_config_end_to_end(self, tmp_path, capsys):
        cfg = {
            "curve": {"kind": "circle", "radius": 1.0},
            "beta_list": [8.0, 16.0],
            "n_modes": 2,
            "target_h": 0.1,
            "verify_transverse": True,
            "verify_disc": True,
            "output_dir": str(tmp_path / "out"),
            "curve_samples": 512,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        rc = cli.main(["run", str(path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        outdir = tmp_path / "out"
        for name in ("curvature.csv", "spectrum1d.csv", "transverse.csv",
                     "fem_spectrum.csv", "report.csv", "report.json",
                     "plot_lambda_n1.csv", "plot_residuals_n2.csv", "summary.txt"):
            assert (outdir / name).exists(), name
        summary = (outdir / "summary.txt").read_text()
        assert "trial quotient bounds lambda_1" in summary
