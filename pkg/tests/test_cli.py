import json
import math
import re

import numpy as np
import pytest

from kerrsqueeze.cli import main


def run_cli(args):
    return main([str(a) for a in args])


def strip_timestamps(text: str) -> str:
    lines = [
        ln
        for ln in text.splitlines()
        if not ln.startswith("# timestamp:") and not re.match(r'\s*"timestamp":', ln)
    ]
    return "\n".join(lines)


def read_csv_rows(path):
    header = None
    rows = []
    for ln in path.read_text().splitlines():
        if ln.startswith("#"):
            continue
        if header is None:
            header = ln.split(",")
            continue
        rows.append(ln.split(","))
    return header, rows


class TestUsageErrors:
    def test_missing_required_fields(self, capsys):
        assert run_cli(["quadrature"]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "ConfigError"

    def test_unknown_config_key(self, tmp_path, capsys):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"alpha": 2.0, "phi0": 0.3, "t": 0.8, "oops": 1}))
        assert run_cli(["quadrature", "--config", cfgfile]) == 2
        assert "oops" in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path):
        assert run_cli(["power", "--config", tmp_path / "nope.json"]) == 2

    def test_unknown_experiment_rejected_by_argparse(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["warp-drive"])
        assert exc.value.code == 2

    def test_bad_grid_spec(self, tmp_path):
        assert run_cli([
            "quadrature", "--alpha", 2.0, "--phi0", 0.3, "--t", 0.8,
            "--p-grid=1:2", "--out", tmp_path / "x.csv",
        ]) == 2


class TestNumericalErrors:
    def test_degenerate_post_selection_exits_3(self, tmp_path, capsys):
        code = run_cli([
            "optimize", "--alpha", 2.0, "--phi0", 0.0,
            "--t", 1.0 / math.sqrt(2.0), "--delta", 0.0,
            "--out", tmp_path / "opt.json",
        ])
        assert code == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "DegeneratePostSelectionError"


class TestPower:
    def test_default_table(self, tmp_path):
        out = tmp_path / "power.csv"
        assert run_cli(["power", "--out", out]) == 0
        header, rows = read_csv_rows(out)
        assert header == ["flux_per_s", "wavelength_m", "power_w"]
        assert len(rows) == 4
        powers = [float(r[2]) for r in rows]
        assert powers[0] == pytest.approx(1.24, rel=0.01)
        assert powers[1] == pytest.approx(0.23e-12, rel=0.05)
        assert powers[2] == pytest.approx(0.16e-3, rel=0.03)
        assert powers[3] == pytest.approx(1.24, rel=0.02)  # 3e6 photons / 0.6 ps

    def test_custom_flux(self, tmp_path):
        out = tmp_path / "power.csv"
        assert run_cli(["power", "--flux", 1e9, "--wavelength", 1064e-9, "--out", out]) == 0
        _, rows = read_csv_rows(out)
        assert len(rows) == 1
        assert float(rows[0][2]) == pytest.approx(1e9 * 6.62607015e-34 * 299792458 / 1064e-9)

    def test_json_format(self, tmp_path):
        out = tmp_path / "power.json"
        assert run_cli(["power", "--format", "json", "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert doc["result"]["columns"] == ["flux_per_s", "wavelength_m", "power_w"]
        assert doc["meta"]["experiment"] == "power"


class TestDensityProfiles:
    def test_full_transmission_profile_is_gaussian(self, tmp_path):
        out = tmp_path / "fig4.csv"
        assert run_cli(["fig4", "--t", 1.0, "--out", out]) == 0
        header, rows = read_csv_rows(out)
        assert header == ["p", "density_postselected", "density_coherent_ref", "shift_applied"]
        assert len(rows) == 801
        ps = np.array([float(r[0]) for r in rows])
        dens = np.array([float(r[1]) for r in rows])
        assert dens.max() == pytest.approx(1 / math.sqrt(math.pi), rel=1e-4)
        total = np.trapezoid(dens, ps)
        mean = np.trapezoid(ps * dens, ps) / total
        var = np.trapezoid((ps - mean) ** 2 * dens, ps) / total
        assert total == pytest.approx(1.0, abs=1e-6)
        assert var == pytest.approx(0.5, abs=1e-4)

    def test_align_peaks_records_shift(self, tmp_path):
        out = tmp_path / "fig5.csv"
        assert run_cli(["fig5", "--align-peaks", "--out", out]) == 0
        _, rows = read_csv_rows(out)
        shifts = {r[3] for r in rows}
        assert len(shifts) == 1
        shift = float(shifts.pop())
        assert shift != 0.0
        ps = np.array([float(r[0]) for r in rows])
        dens = np.array([float(r[1]) for r in rows])
        ref = np.array([float(r[2]) for r in rows])
        # aligned: both peaks at the same grid location to within one step
        assert abs(ps[dens.argmax()] - ps[ref.argmax()]) <= (ps[1] - ps[0]) + 1e-12

    def test_quadrature_with_explicit_params(self, tmp_path):
        out = tmp_path / "quad.csv"
        assert run_cli([
            "quadrature", "--alpha", 2.0, "--phi0", 0.3, "--t", 0.8,
            "--p-grid=-4:4:101", "--out", out,
        ]) == 0
        _, rows = read_csv_rows(out)
        assert len(rows) == 101
        assert float(rows[0][0]) == -4.0
        assert float(rows[-1][0]) == 4.0


class TestFlagsOverrideConfigFile:
    def test_override(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({
            "alpha": 2.0, "phi0": 0.3, "t": 0.8, "p_grid": "-3:3:11",
        }))
        out = tmp_path / "quad.csv"
        assert run_cli([
            "quadrature", "--config", cfgfile, "--alpha", 2.5, "--out", out,
        ]) == 0
        meta_line = [ln for ln in out.read_text().splitlines() if ln.startswith("# config:")][0]
        cfg = json.loads(meta_line.removeprefix("# config: "))
        assert cfg["alpha"] == 2.5
        assert cfg["phi0"] == 0.3


class TestSmallScaleEstimatorCommands:
    def test_optimize(self, tmp_path):
        out = tmp_path / "opt.json"
        assert run_cli([
            "optimize", "--alpha", 2.0, "--phi0", 0.3, "--t", 0.8, "--out", out,
        ]) == 0
        doc = json.loads(out.read_text())
        res = doc["result"]
        assert 0.0 <= res["F"] <= 1.0
        assert res["converged"] is True

    def test_find_t(self, tmp_path):
        out = tmp_path / "findt.json"
        assert run_cli([
            "find-t", "--alpha", 2.0, "--phi0", 0.3,
            "--fidelity-target", 0.95, "--out", out,
        ]) == 0
        res = json.loads(out.read_text())["result"]
        assert 1 / math.sqrt(2) < res["t"] < 1.0
        assert res["F"] == pytest.approx(0.95, abs=1e-4)


class TestGoldenStability:
    @pytest.mark.parametrize("args, name", [
        ((["fig4", "--t", "1.0"]), "fig4.csv"),
        ((["fig5"]), "fig5.csv"),
        ((["power"]), "power.csv"),
    ])
    def test_repeat_runs_byte_identical(self, tmp_path, args, name):
        a = tmp_path / ("a_" + name)
        b = tmp_path / ("b_" + name)
        assert run_cli(list(args) + ["--out", a]) == 0
        assert run_cli(list(args) + ["--out", b]) == 0
        assert strip_timestamps(a.read_text()) == strip_timestamps(b.read_text())
