"""End-to-end tests of the command-line interface.

Each test invokes ``wavebound.cli.main`` in-process with argv lists and
inspects the produced files, so the full argument-parsing, config-merge,
computation, and serialization path is exercised exactly as a shell user
would hit it.
"""

import json
import math

import numpy as np
import pytest

from wavebound import cli
from wavebound.geometry import Geometry, ModelKind
from wavebound import modematch as mm

MU = math.pi**2 / 4.0


def run(argv, capsys=None):
    code = cli.main(argv)
    return code


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# wavebound-csv v1"
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:]]
    return header, rows


class TestConfigResolution:
    def test_lambda_and_delta_conflict(self, capsys):
        assert run(["spectrum", "--lambda", "0.5", "--delta", "0.5"]) == 2
        assert "exactly one" in capsys.readouterr().err

    def test_missing_geometry(self, capsys):
        assert run(["spectrum", "--model", "A"]) == 2

    def test_negative_lambda(self):
        assert run(["spectrum", "--lambda", "-0.5"]) == 2

    def test_delta_with_width(self, tmp_path):
        """delta/d and lambda parameterizations give identical output."""
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        base = ["spectrum", "--model", "A", "--modes", "16", "--out"]
        assert run(base + [str(out1), "--lambda", "0.5"]) == 0
        assert run(base + [str(out2), "--delta", "1.25", "--d", "2.5"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_config_file_used_and_overridden(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("model=B\nlambda = 0.5 # comment\nmodes=16\n")
        out1 = tmp_path / "file.csv"
        out2 = tmp_path / "flag.csv"
        assert run(["spectrum", "--config", str(conf), "--out", str(out1)]) == 0
        assert run(
            ["spectrum", "--config", str(conf), "--model", "A", "--out", str(out2)]
        ) == 0
        _, rows1 = read_csv(out1)
        _, rows2 = read_csv(out2)
        # model B and model A ground states differ measurably at lam=0.5
        e_b = float(rows1[0]["eigenvalue_over_mu"])
        e_a = float(rows2[0]["eigenvalue_over_mu"])
        assert abs(e_b - e_a) > 1e-3

    def test_malformed_config_file(self, tmp_path, capsys):
        conf = tmp_path / "bad.conf"
        conf.write_text("model B\n")
        assert run(["spectrum", "--config", str(conf)]) == 2

    def test_missing_config_file(self):
        assert run(["spectrum", "--config", "/nonexistent/х.conf"]) == 2

    def test_bad_model_name(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("model=C\nlambda=0.5\n")
        assert run(["spectrum", "--config", str(conf)]) == 2


class TestSpectrumCommand:
    def test_empty_spectrum_is_ok(self, tmp_path):
        """No bound state at lam=0.2 in model A: exit 0, header-only CSV."""
        out = tmp_path / "empty.csv"
        code = run(
            ["spectrum", "--model", "A", "--lambda", "0.2", "--modes", "16",
             "--out", str(out)]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["lambda", "branch_index", "eigenvalue_over_mu",
                          "residual", "stable"]
        assert rows == []

    def test_one_state_csv(self, tmp_path):
        out = tmp_path / "one.csv"
        assert run(
            ["spectrum", "--model", "A", "--lambda", "0.5", "--modes", "32",
             "--out", str(out)]
        ) == 0
        _, rows = read_csv(out)
        assert len(rows) == 1
        assert rows[0]["branch_index"] == "1"
        assert abs(float(rows[0]["eigenvalue_over_mu"]) - 0.8396) < 1e-3
        assert float(rows[0]["residual"]) < 1e-6

    def test_json_schema(self, tmp_path):
        out = tmp_path / "one.json"
        assert run(
            ["spectrum", "--model", "B", "--lambda", "0.5", "--modes", "16",
             "--format", "json", "--out", str(out)]
        ) == 0
        payload = json.loads(out.read_text())
        assert set(payload) == {"config", "results", "provenance"}
        assert payload["provenance"]["tool"] == "wavebound"
        assert "timestamp" not in json.dumps(payload)
        assert payload["config"]["model"] == "B"
        assert len(payload["results"]) == 1

    def test_determinism_byte_identical(self, tmp_path):
        args = ["spectrum", "--model", "A", "--lambda", "0.5", "--modes", "16",
                "--format", "json"]
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestSweepCommand:
    def test_single_point_matches_spectrum(self, tmp_path):
        s_out = tmp_path / "spec.csv"
        w_out = tmp_path / "sweep.csv"
        common = ["--model", "A", "--modes", "16"]
        assert run(["spectrum", "--lambda", "0.75"] + common
                   + ["--out", str(s_out)]) == 0
        assert run(["sweep", "--lambda-min", "0.75", "--lambda-max", "0.75",
                    "--step", "0.1"] + common + ["--out", str(w_out)]) == 0
        assert s_out.read_bytes() == w_out.read_bytes()

    def test_rows_ordered_by_lambda(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run(
            ["sweep", "--model", "A", "--lambda-min", "0.5", "--lambda-max",
             "1.0", "--step", "0.25", "--modes", "16", "--out", str(out)]
        ) == 0
        _, rows = read_csv(out)
        lams = [float(r["lambda"]) for r in rows]
        assert lams == sorted(lams)
        assert lams[0] == 0.5 and lams[-1] == 1.0

    def test_parallel_matches_serial(self, tmp_path):
        base = ["sweep", "--model", "A", "--lambda-min", "0.5", "--lambda-max",
                "1.0", "--step", "0.25", "--modes", "16"]
        out1, out2 = tmp_path / "ser.csv", tmp_path / "par.csv"
        assert run(base + ["--out", str(out1)]) == 0
        assert run(base + ["--jobs", "2", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bad_range(self):
        assert run(["sweep", "--model", "A", "--lambda-min", "1.0",
                    "--lambda-max", "0.5", "--step", "0.1"]) == 2


class TestFieldCommand:
    def test_missing_branch_exit_code(self, tmp_path):
        assert run(
            ["field", "--model", "A", "--lambda", "0.2", "--branch", "1",
             "--modes", "16", "--out", str(tmp_path / "f.csv")]
        ) == 4

    def test_density_grid(self, tmp_path):
        """Density vanishes on Dirichlet parts and integrates to ~1."""
        out = tmp_path / "field.csv"
        nx, ny, W = 241, 33, 7.0
        assert run(
            ["field", "--model", "A", "--lambda", "0.5", "--branch", "1",
             "--modes", "32", "--nx", str(nx), "--ny", str(ny),
             "--x-halfwidth", str(W), "--out", str(out)]
        ) == 0
        _, rows = read_csv(out)
        assert len(rows) == nx * ny
        xs = np.array([float(r["x"]) for r in rows]).reshape(nx, ny)
        ys = np.array([float(r["y"]) for r in rows]).reshape(nx, ny)
        dens = np.array([float(r["density"]) for r in rows]).reshape(nx, ny)

        # Dirichlet rows: bottom wall left of the window, top wall right.
        bottom = dens[:, 0][xs[:, 0] < -0.5]
        top = dens[:, -1][xs[:, -1] > 0.5]
        assert float(bottom.max()) <= 1e-8
        assert float(top.max()) <= 1e-8

        # Grid quadrature over the box plus analytic tails ~ unit norm.
        box = np.trapezoid(np.trapezoid(dens, ys[0], axis=1), xs[:, 0])
        field = mm.solve_field(
            ModelKind.A, Geometry.from_lambda(0.5), 1, N=32
        )
        kap = field.kappa
        tail = float(
            np.sum(field.a**2 / (2 * kap) * np.exp(-2 * kap * (W - 0.5)))
            + np.sum(field.b**2 / (2 * kap) * np.exp(-2 * kap * (W - 0.5)))
        )
        assert abs(box + tail - 1.0) < 1e-4

    def test_bad_grid_args(self):
        assert run(["field", "--model", "A", "--lambda", "0.5", "--nx", "1"]) == 2
        assert run(["field", "--model", "A", "--lambda", "0.5",
                    "--x-halfwidth", "-1"]) == 2
        assert run(["field", "--model", "A", "--lambda", "0.5",
                    "--branch", "0"]) == 2


class TestBoundsCommand:
    def test_reference_point(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert run(["bounds", "--lambda", "2.5", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert rows[0]["n_min"] == "2"
        assert rows[0]["n_max"] == "3"
        assert len(rows) == 3  # one window row per candidate branch
        for m, row in enumerate(rows, start=1):
            assert row["branch_index"] == str(m)
            assert float(row["window_lo"]) <= float(row["window_hi"])


class TestThresholdsCommand:
    @pytest.mark.slow
    def test_values_and_ordering(self, tmp_path):
        out = tmp_path / "thresholds.json"
        assert run(["thresholds", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        res = payload["results"]
        assert 0.075 < res["lambda1"] < 0.085
        assert 0.33 < res["lambda2"] < 0.35
        assert 0.25 < res["lambda0_numeric"] < 0.27
        assert abs(res["kappa0"] - res["lambda0_numeric"]) < 5e-3
        assert res["ordering_ok"] is True


class TestAnalyzeCommand:
    @pytest.mark.slow
    def test_report(self, tmp_path):
        out = tmp_path / "analyze.json"
        assert run(
            ["analyze", "--model", "A", "--lambda", "0.5", "--modes", "32",
             "--lambda-min", "0.3", "--lambda-max", "0.9", "--step", "0.15",
             "--out", str(out)]
        ) == 0
        res = json.loads(out.read_text())["results"]
        assert res["monotonicity"]["ok"] is True
        assert res["scaling"]["ok"] is True
        fits = res["corner_exponents"]["fits"]
        assert set(fits) == {"P1", "P2"}
        for fit in fits.values():
            assert abs(fit["exponent"] - 0.5) < 0.05


class TestOracleCommand:
    @pytest.mark.slow
    def test_agrees_with_spectrum(self, tmp_path):
        o_out = tmp_path / "oracle.csv"
        s_out = tmp_path / "spec.csv"
        common = ["--model", "A", "--lambda", "0.5"]
        assert run(["oracle"] + common + ["--out", str(o_out)]) == 0
        assert run(["spectrum"] + common + ["--modes", "64",
                    "--out", str(s_out)]) == 0
        _, orows = read_csv(o_out)
        _, srows = read_csv(s_out)
        assert len(orows) == len(srows) == 1
        diff = abs(float(orows[0]["eigenvalue_over_mu"])
                   - float(srows[0]["eigenvalue_over_mu"]))
        assert diff < 1e-3
        assert 0.9 < float(orows[0]["order"]) < 1.3
