import json
import shutil
import subprocess

import numpy as np
import pytest

from krqr_figures import (
    PlotSpec,
    SchemaError,
    plot_energy_series,
    plot_filter,
    plot_reconstruction,
    read_filter_csv,
    read_series_csv,
)
from krqr_figures.cli import cli_main


def write_series_csv(path, engines=("numeric", "analytic"), n_t=12):
    lines = ["t,engine,mean_p,mean_e"]
    for t in range(n_t + 1):
        for eng in engines:
            lines.append(f"{t},{eng},0,{25.0 * t * t}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_filter_csv(path, times=(8, 60)):
    lines = ["beta,t,exact,approx,gaussian,square"]
    for t in times:
        for b in np.linspace(-0.04, 0.04, 41):
            x = np.pi * (b + 0.5) * 2
            exact = np.sin(x * t) ** 2 / max(np.sin(x) ** 2, 1e-300)
            approx = f"{t * t * np.cos(np.pi * b * t) ** 2}" \
                if abs(b) * t <= 1 else ""
            gauss = np.exp(-b**2 / (2 * 0.0115**2)) / 0.0288
            square = 25.0 if abs(b) <= 0.02 else 0.0
            lines.append(f"{b},{t},{exact},{approx},{gauss},{square}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_result_json(path, with_reconstruction=True):
    beta = np.linspace(-0.5, 0.5, 201, endpoint=False)
    dens = np.where(np.abs(beta) <= 0.01, 50.0, 0.0)
    doc = {
        "config": {"scenario": "reconstruction", "delta": 0.02,
                   "params": {"K": 10.0, "ell": 1, "n_kicks": 50}},
        "series": {"numeric": {"t": [0, 1], "mean_p": [0, 0],
                               "mean_e": [0.0, 25.0]}},
        "fits": [],
        "reconstruction": {"beta": beta.tolist(),
                           "density": dens.tolist()}
        if with_reconstruction else None,
        "engine_deviation": None,
    }
    path.write_text(json.dumps(doc))
    return path


class TestReaders:
    def test_series_reader_groups_engines(self, tmp_path):
        path = write_series_csv(tmp_path / "s.csv")
        series = read_series_csv(path)
        assert set(series) == {"numeric", "analytic"}
        assert series["numeric"]["mean_e"][2] == 100.0

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,engine,mean_p\n0,numeric,0\n")
        with pytest.raises(SchemaError, match="mean_e"):
            read_series_csv(path)

    def test_filter_reader_masks_empty_approx(self, tmp_path):
        path = write_filter_csv(tmp_path / "f.csv", times=(60,))
        groups = read_filter_csv(path)
        g = groups[60]
        assert np.isnan(g["approx"][0])       # outside the lobe
        assert np.isfinite(g["approx"][20])   # center


class TestEnergyPlot:
    def test_two_file_overlay_with_inset(self, tmp_path):
        a = write_series_csv(tmp_path / "fig2.csv")
        b = write_series_csv(tmp_path / "fig2b.csv", engines=("numeric",))
        out = tmp_path / "fig2.png"
        plot_energy_series(PlotSpec(inputs=(a, b), output=out,
                                    inset=(0, 5)))
        assert out.stat().st_size > 0

    def test_single_series(self, tmp_path):
        a = write_series_csv(tmp_path / "one.csv", engines=("numeric",))
        out = tmp_path / "one.png"
        plot_energy_series(PlotSpec(inputs=(a,), output=out,
                                    subtract_initial=True, log_y=True))
        assert out.exists()

    def test_rerun_byte_identical(self, tmp_path):
        a = write_series_csv(tmp_path / "s.csv")
        out1, out2 = tmp_path / "p1.png", tmp_path / "p2.png"
        plot_energy_series(PlotSpec(inputs=(a,), output=out1))
        plot_energy_series(PlotSpec(inputs=(a,), output=out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_header_only_csv_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("t,engine,mean_p,mean_e\n")
        with pytest.raises(SchemaError, match="no data"):
            plot_energy_series(PlotSpec(inputs=(path,),
                                        output=tmp_path / "x.png"))


class TestFilterPlot:
    def test_two_panels(self, tmp_path):
        path = write_filter_csv(tmp_path / "fig4.csv")
        out = tmp_path / "fig4.png"
        plot_filter(PlotSpec(inputs=(path,), output=out, kind="filter"))
        assert out.stat().st_size > 0

    def test_missing_approx_warns_but_plots(self, tmp_path):
        path = tmp_path / "noapprox.csv"
        lines = ["beta,t,exact,approx,gaussian,square"]
        for b in np.linspace(-0.04, 0.04, 11):
            lines.append(f"{b},60,1.0,,0.5,0.0")
        path.write_text("\n".join(lines) + "\n")
        out = tmp_path / "na.png"
        with pytest.warns(UserWarning, match="exact filter only"):
            plot_filter(PlotSpec(inputs=(path,), output=out, kind="filter"))
        assert out.exists()


class TestReconstructionPlot:
    def test_overlay_with_truth(self, tmp_path):
        path = write_result_json(tmp_path / "r.json")
        out = tmp_path / "r.png"
        plot_reconstruction(PlotSpec(inputs=(path,), output=out,
                                     kind="reconstruction"))
        assert out.stat().st_size > 0

    def test_missing_reconstruction_rejected(self, tmp_path):
        path = write_result_json(tmp_path / "r.json",
                                 with_reconstruction=False)
        with pytest.raises(SchemaError, match="reconstruction"):
            plot_reconstruction(PlotSpec(inputs=(path,),
                                         output=tmp_path / "x.png",
                                         kind="reconstruction"))


class TestCLI:
    def test_energy_command(self, tmp_path):
        a = write_series_csv(tmp_path / "s.csv")
        out = tmp_path / "fig.png"
        assert cli_main(["energy", "--in", str(a), "--out", str(out)]) == 0
        assert out.exists()

    def test_schema_error_exit_code(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,engine\n")
        assert cli_main(["energy", "--in", str(path),
                         "--out", str(tmp_path / "x.png")]) == 1

    def test_unknown_kind_rejected(self, tmp_path):
        assert cli_main(["sculpture", "--in", "x", "--out", "y"]) == 1

    def test_filter_and_reconstruction_commands(self, tmp_path):
        f = write_filter_csv(tmp_path / "f.csv")
        r = write_result_json(tmp_path / "r.json")
        assert cli_main(["filter", "--in", str(f),
                         "--out", str(tmp_path / "f.png")]) == 0
        assert cli_main(["reconstruction", "--in", str(r),
                         "--out", str(tmp_path / "r.png")]) == 0


@pytest.mark.skipif(shutil.which("krqr") is None,
                    reason="primary component CLI not installed")
class TestEndToEnd:
    def test_simulate_then_plot(self, tmp_path):
        csv_out = tmp_path / "fig1a.csv"
        res = subprocess.run(
            ["krqr", "scenario", "fig1a", "--kicks", "6",
             "--out", str(csv_out)],
            capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        out = tmp_path / "fig1a.png"
        assert cli_main(["energy", "--in", str(csv_out),
                         "--out", str(out), "--inset", "0", "3"]) == 0
        assert out.stat().st_size > 0

    def test_filter_preset_roundtrip(self, tmp_path):
        csv_out = tmp_path / "fig4.csv"
        res = subprocess.run(
            ["krqr", "scenario", "fig4", "--out", str(csv_out)],
            capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert cli_main(["filter", "--in", str(csv_out),
                         "--out", str(tmp_path / "fig4.png")]) == 0
