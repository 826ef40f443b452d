import json
import math

import numpy as np
import pytest

from speckleq import UsageError
from speckleq.cli import RunConfig, execute, main, parse_args, parse_values


def run_cli(tmp_path, *args):
    out = tmp_path / "out.dat"
    rc = main([*args, "--out", str(out)])
    return rc, out


class TestParseValues:
    def test_linear_range(self):
        values = parse_values("0:1.5:0.1", "--values")
        assert len(values) == 16
        assert values[0] == 0.0
        assert values[-1] == pytest.approx(1.5, abs=1e-12)

    def test_log_range(self):
        values = parse_values("1e6:3.5e10:log25", "--budgets")
        assert len(values) == 25
        assert values[0] == pytest.approx(1e6, rel=1e-12)
        assert values[-1] == pytest.approx(3.5e10, rel=1e-12)

    def test_comma_list_and_scalar(self):
        assert parse_values("2,4,6,8", "--s") == [2.0, 4.0, 6.0, 8.0]
        assert parse_values("2", "--s") == [2.0]

    @pytest.mark.parametrize("bad", ["1:2", "1:2:0", "a,b", "1:2:log1", "-1:4:log5"])
    def test_malformed(self, bad):
        with pytest.raises(UsageError):
            parse_values(bad, "--x")


class TestParseArgs:
    def test_default_parameters(self):
        config = parse_args(["fano-scatter", "--g", "1.5", "--s", "2"])
        assert config.command == "fano-scatter"
        assert config.options["alpha2"] == 10000.0
        assert config.options["m"] == 50
        assert config.options["trials"] == 1000
        assert config.options["seed"] == 1
        assert config.fmt == "csv"
        assert str(config.out) == "fano-scatter.csv"

    def test_rejects_weak_disorder(self):
        with pytest.raises(UsageError):
            parse_args(["fano-scatter", "--s", "0.5"])

    def test_rejects_unknown_flag(self):
        with pytest.raises(UsageError):
            parse_args(["fano-scatter", "--bogus", "1"])

    def test_missing_command(self):
        with pytest.raises(UsageError):
            parse_args([])

    def test_json_format_selected(self):
        config = parse_args(["snr-sweep", "--format", "json"])
        assert config.fmt == "json"
        assert str(config.out) == "snr-sweep.json"

    def test_axis_dependent_default_values(self):
        g_axis = parse_args(["snr-sweep", "--axis", "g"])
        s_axis = parse_args(["snr-sweep", "--axis", "s"])
        assert g_axis.options["values"][0] == 0.0
        assert s_axis.options["values"][0] == 2.0

    def test_env_seed_override(self, monkeypatch):
        monkeypatch.setenv("SPECKLE_SEED", "99")
        config = parse_args(["fano-scatter", "--seed", "5"])
        assert config.options["seed"] == 99
        monkeypatch.setenv("SPECKLE_SEED", "zzz")
        with pytest.raises(UsageError):
            parse_args(["fano-scatter"])

    def test_superres_validation(self):
        with pytest.raises(UsageError):
            parse_args(["superres", "--s", "0.5,2"])
        with pytest.raises(UsageError):
            parse_args(["superres", "--budgets", "0,10"])
        with pytest.raises(UsageError):
            parse_args(["superres", "--epsilon", "2"])

    def test_main_exit_codes_for_usage(self, capsys):
        assert main(["fano-scatter", "--s", "0.5"]) == 2
        assert main([]) == 2
        assert "usage error" in capsys.readouterr().err


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestCommands:
    def test_fano_scatter(self, tmp_path, capsys):
        rc, out = run_cli(
            tmp_path, "fano-scatter", "--trials", "50", "--g", "1.5", "--s", "2"
        )
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["trial", "fano"]
        assert len(rows) == 50
        assert all(float(r[1]) < 1.0 for r in rows)
        assert "wrote 50 rows" in capsys.readouterr().out

    def test_snr_sweep_schema(self, tmp_path):
        rc, out = run_cli(
            tmp_path, "snr-sweep", "--axis", "g", "--values", "0:1.5:0.5", "--s", "2",
            "--trials", "60",
        )
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["axis_value", "mean_n", "fano_ratio", "snr_ratio", "stderr_snr", "trials"]
        assert len(rows) == 4
        assert float(rows[0][3]) == 1.0  # g = 0 is exactly shot-noise limited

    def test_nm_sweep(self, tmp_path):
        rc, out = run_cli(tmp_path, "nm-sweep", "--values", "0.2,0.6,1.0", "--trials", "60")
        assert rc == 0
        header, rows = read_csv(out)
        ratio = [float(r[3]) for r in rows]
        assert ratio[0] < ratio[1] < ratio[2]

    def test_universal_fano(self, tmp_path):
        rc, out = run_cli(
            tmp_path, "universal-fano", "--values", "0.2,0.9,0.99", "--trials", "60"
        )
        assert rc == 0
        _, rows = read_csv(out)
        fanos = [float(r[2]) for r in rows]
        assert fanos[0] > fanos[1] > fanos[2]

    def test_loss_sweep(self, tmp_path):
        rc, out = run_cli(
            tmp_path, "loss-sweep", "--g", "1.5", "--loss-grid", "0:0.4:0.2",
            "--trials", "60",
        )
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["g", "axis_value", "mean_n", "fano_ratio", "snr_ratio", "stderr_snr", "trials"]
        ratios = [float(r[4]) for r in rows]
        assert ratios[0] > ratios[1] > ratios[2] > 1.0

    def test_superres_schema(self, tmp_path):
        rc, out = run_cli(
            tmp_path, "superres", "--s", "2,6", "--budgets", "1e7:1e10:log4",
            "--trials", "60",
        )
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["s", "mean_n", "Q", "W", "W_Q", "J"]
        assert len(rows) == 12  # coherent + two squeezed curves, 4 budgets each
        assert {r[0] for r in rows} == {"0", "2", "6"}

    def test_superres_too_dim_exit_code(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, "superres", "--budgets", "1,2", "--trials", "10")
        assert rc == 3
        assert "error" in capsys.readouterr().err

    def test_psf_profiles(self, tmp_path):
        rc, out = run_cli(tmp_path, "psf", "--q", "7", "--step", "0.01")
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["z", "classical", "reconstruction"]
        assert float(rows[0][1]) == pytest.approx(1.0 / math.pi, rel=1e-12)
        beyond_support = [float(r[2]) for r in rows if float(r[0]) > 1.0]
        assert beyond_support and all(v == 0.0 for v in beyond_support)

    def test_prolate_basis_export(self, tmp_path):
        rc, out = run_cli(tmp_path, "prolate-basis", "--modes", "5")
        assert rc == 0
        text = out.read_text().splitlines()
        assert text[0].startswith("# prolate basis")
        assert len(text) == 3 + 256

    def test_oracle_check(self, tmp_path, capsys):
        rc, out = run_cli(tmp_path, "oracle-check", "--cases", "100", "--seed", "7")
        assert rc == 0
        captured = capsys.readouterr().out
        assert "worst case" in captured
        header, rows = read_csv(out)
        assert header[:3] == ["case", "M", "N"]
        assert len(rows) == 100
        assert all(float(r[6]) < 1e-10 and float(r[7]) < 1e-10 for r in rows)

    def test_photon_budget(self, tmp_path):
        rc, out = run_cli(tmp_path, "photon-budget")
        assert rc == 0
        _, rows = read_csv(out)
        assert float(rows[0][4]) == pytest.approx(3.47e10, rel=0.01)

    def test_json_output_mirrors_csv(self, tmp_path):
        out_csv = tmp_path / "a.csv"
        out_json = tmp_path / "a.json"
        base = ["snr-sweep", "--values", "0:1:0.5", "--trials", "40"]
        assert main([*base, "--out", str(out_csv)]) == 0
        assert main([*base, "--format", "json", "--out", str(out_json)]) == 0
        header, rows = read_csv(out_csv)
        payload = json.loads(out_json.read_text())
        assert payload["command"] == "snr-sweep"
        assert len(payload["rows"]) == len(rows)
        for row, json_row in zip(rows, payload["rows"]):
            assert list(json_row) == header
            for key, token in zip(header, row):
                assert json_row[key] == pytest.approx(float(token), rel=0, abs=0)


class TestRoundTripAndReproducibility:
    def test_csv_floats_roundtrip_exactly(self, tmp_path):
        from speckleq import run_fano_scatter

        out = tmp_path / "fano.csv"
        assert main(["fano-scatter", "--trials", "25", "--seed", "11", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        expected = run_fano_scatter(50, 2.0, 1.5, 1e4, 25, 11)
        parsed = np.array([float(r[1]) for r in rows])
        assert np.array_equal(parsed, expected)

    def test_rerun_is_byte_identical(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["snr-sweep", "--values", "0:1.5:0.5", "--trials", "50", "--seed", "4"]
        assert main([*args, "--out", str(a)]) == 0
        assert main([*args, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["snr-sweep", "--values", "0:1.5:0.5", "--trials", "50", "--seed", "4"]
        assert main([*args, "--workers", "1", "--out", str(a)]) == 0
        assert main([*args, "--workers", "4", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExecuteSurface:
    def test_execute_returns_paths(self, tmp_path):
        config = parse_args(
            ["photon-budget", "--out", str(tmp_path / "pb.csv")]
        )
        status, paths = execute(config)
        assert status == 0
        assert paths == [tmp_path / "pb.csv"]

    def test_execute_numerical_error_status(self, tmp_path):
        config = RunConfig(
            command="superres",
            options=parse_args(
                ["superres", "--budgets", "1", "--trials", "5", "--out", str(tmp_path / "x.csv")]
            ).options,
            out=tmp_path / "x.csv",
            fmt="csv",
        )
        status, paths = execute(config)
        assert status == 3
        assert paths == []
