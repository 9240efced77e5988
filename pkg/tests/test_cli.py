"""CLI surface: subcommands, product schemas, exit codes, reproducibility."""

import json
import math

import pytest

from synlab.cli import main

SUMMARY_HEADER = "delta_t,mean,std,mode,analytic_mean,analytic_mode,tvd"
SAMPLES_HEADER = "delta_t,epoch,delta_g,delta_g_noisy"
CURVES_HEADER = "delta_t,device_index,alpha,v_set_peak,v_reset_peak,p_set,p_reset"
STATES_HEADER = "delta_t,g,probability"


def run_cli(*argv) -> int:
    return main(list(argv))


def small_config(tmp_path, **protocol):
    cfg = {"protocol": {"dt_min": -3.0, "dt_max": 3.0, "dt_step": 0.5, "epochs": 150, **protocol}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


class TestDeviceCurve:
    def test_row_count_and_midpoint(self, capsys):
        assert run_cli("device-curve", "--vmin", "0", "--vmax", "2", "--steps", "201") == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "voltage,p_set,p_reset"
        assert len(lines) == 202
        row = dict(zip(("v", "ps", "pr"), lines[101].split(",")))
        assert float(row["v"]) == pytest.approx(1.0)
        assert float(row["ps"]) == pytest.approx(0.5, abs=1e-6)

    def test_out_file(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run_cli("device-curve", "--steps", "11", "--out", str(out)) == 0
        assert out.read_text().startswith("voltage,p_set,p_reset\n")


class TestWaveformCommand:
    def test_default_sampling(self, capsys):
        assert run_cli("waveform") == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "t,voltage"
        data = {float(r.split(",")[0]): float(r.split(",")[1]) for r in lines[1:]}
        assert data[0.5] == pytest.approx(0.9)
        assert data[-2.5] == pytest.approx(-0.2)
        assert data[min(data)] == 0.0

    def test_lf_line_endings_and_decimal_point(self, tmp_path):
        out = tmp_path / "w.csv"
        run_cli("waveform", "--out", str(out))
        raw = out.read_bytes()
        assert b"\r" not in raw
        assert b"0.9" in raw


class TestStdpWindowCommand:
    def test_products_and_schemas(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "run"
        assert run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out)) == 0
        for name in ("samples.csv", "summary.csv", "states.csv", "curves.csv",
                     "fits.json", "run.json", "window.svg"):
            assert (out / name).exists(), name
        assert (out / "samples.csv").read_text().splitlines()[0] == SAMPLES_HEADER
        assert (out / "summary.csv").read_text().splitlines()[0] == SUMMARY_HEADER
        assert (out / "states.csv").read_text().splitlines()[0] == STATES_HEADER
        assert (out / "curves.csv").read_text().splitlines()[0] == CURVES_HEADER
        fits = json.loads((out / "fits.json").read_text())
        assert len(fits) == 4
        assert {f["model"] for f in fits} == {"exponential", "linear"}

    def test_samples_row_count_and_empty_noise_column(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "run"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out))
        lines = (out / "samples.csv").read_text().splitlines()
        assert len(lines) == 1 + 13 * 150  # grid points x epochs
        assert lines[1].endswith(",")  # no noise column outside figure mode

    def test_figure_mode_fills_noise_column(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "run"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out), "--figure-mode")
        first = (out / "samples.csv").read_text().splitlines()[1]
        assert first.split(",")[3] != ""

    def test_run_json_round_trip_reproduces_samples(self, tmp_path):
        cfg = small_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out1), "--seed", "9")
        run_cli("stdp-window", "--config", str(out1 / "run.json"), "--out-dir", str(out2))
        assert (out1 / "samples.csv").read_bytes() == (out2 / "samples.csv").read_bytes()
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()

    def test_thread_override_keeps_bytes_identical(self, tmp_path):
        cfg = small_config(tmp_path)
        outs = []
        for name, threads in (("t1", "1"), ("t2", "2"), ("t8", "8")):
            out = tmp_path / name
            run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out),
                    "--threads", threads)
            outs.append((out / "samples.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_histograms_sum_to_epochs(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "run"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out))
        rows = (out / "samples.csv").read_text().splitlines()[1:]
        per_dt = {}
        for row in rows:
            dt = row.split(",")[0]
            per_dt[dt] = per_dt.get(dt, 0) + 1
        assert set(per_dt.values()) == {150}


class TestExitCodes:
    def test_unknown_config_key_is_1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"not_a_section": {}}))
        assert run_cli("stdp-window", "--config", str(path), "--out-dir", str(tmp_path / "o")) == 1

    def test_bad_flag_is_1(self):
        assert run_cli("stdp-window", "--bogus") == 1

    def test_strict_fit_non_convergence_is_2(self, tmp_path):
        # crafted summary whose positive branch defeats the exponential fit
        summary = tmp_path / "summary.csv"
        lines = [SUMMARY_HEADER]
        for dt, y in ((0.0, 1.0), (100.0, 1e290), (200.0, 1.0)):
            lines.append(f"{dt},{y},0.1,1,0,0,0")
        summary.write_text("\n".join(lines) + "\n")
        code = run_cli("fit", "--input", str(summary), "--target", "mean",
                       "--set-domain", "0", "200", "--reset-domain", "-5", "-1", "--strict")
        assert code == 2

    def test_io_error_is_3(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("i am a file")
        cfg = small_config(tmp_path)
        code = run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(blocker))
        assert code == 3

    def test_missing_summary_is_1(self, tmp_path):
        assert run_cli("fit", "--input", str(tmp_path / "none.csv")) == 1


class TestFitCommand:
    def test_refit_from_summary(self, tmp_path, capsys):
        cfg = small_config(tmp_path, epochs=400)
        out = tmp_path / "run"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out))
        capsys.readouterr()
        assert run_cli("fit", "--input", str(out / "summary.csv"), "--target", "mean",
                       "--set-domain", "1", "3", "--reset-domain", "-3", "-1") == 0
        fits = json.loads(capsys.readouterr().out)
        assert len(fits) == 4
        assert {(f["model"], f["side"]) for f in fits} == {
            ("exponential", "set"), ("exponential", "reset"),
            ("linear", "set"), ("linear", "reset"),
        }


class TestCurvesAndStates:
    def test_curves_schema_and_flat_invariance(self, tmp_path, capsys):
        cfg = tmp_path / "flat.json"
        cfg.write_text(json.dumps({
            "synapse": {"alpha_min": 1.0, "alpha_max": 1.0},
            "protocol": {"dt_min": -2.0, "dt_max": 2.0, "dt_step": 1.0},
        }))
        assert run_cli("curves", "--config", str(cfg)) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == CURVES_HEADER
        assert len(lines) == 1 + 5 * 16
        by_dt = {}
        for row in lines[1:]:
            cells = row.split(",")
            by_dt.setdefault(cells[0], set()).add(cells[5])
        assert all(len(ps) == 1 for ps in by_dt.values())  # identical p_set per dt

    def test_states_rows_normalised(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"protocol": {"dt_min": -1.0, "dt_max": 1.0, "dt_step": 1.0}}))
        assert run_cli("states", "--config", str(cfg)) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == STATES_HEADER
        totals = {}
        for row in lines[1:]:
            dt, g, q = row.split(",")
            totals[dt] = totals.get(dt, 0.0) + float(q)
        assert all(math.isclose(t, 1.0, abs_tol=1e-9) for t in totals.values())


class TestCompareCommand:
    def test_layout_and_fit_tables(self, tmp_path):
        cfg = small_config(tmp_path, epochs=250)
        out = tmp_path / "cmp"
        assert run_cli("compare", "--config", str(cfg), "--out-dir", str(out), "--seed", "7") == 0
        for mode in ("dendritic", "flat"):
            for name in ("samples.csv", "summary.csv", "states.csv", "curves.csv",
                         "fits.json", "run.json", "window.svg"):
                assert (out / mode / name).exists(), f"{mode}/{name}"
        doc = json.loads((out / "comparison.json").read_text())
        assert doc["seed"] == 7
        assert len(doc["dendritic"]["fits"]) == 4
        assert len(doc["flat"]["fits"]) == 4

    def test_flat_run_curves_all_identical(self, tmp_path):
        cfg = small_config(tmp_path, epochs=100)
        out = tmp_path / "cmp"
        run_cli("compare", "--config", str(cfg), "--out-dir", str(out))
        rows = (out / "flat" / "curves.csv").read_text().splitlines()[1:]
        by_dt = {}
        for row in rows:
            cells = row.split(",")
            by_dt.setdefault(cells[0], set()).add((cells[5], cells[6]))
        assert all(len(v) == 1 for v in by_dt.values())

    def test_flat_run_json_reproduces_flat_mode(self, tmp_path):
        cfg = small_config(tmp_path, epochs=80)
        out = tmp_path / "cmp"
        run_cli("compare", "--config", str(cfg), "--out-dir", str(out))
        rerun = tmp_path / "rerun"
        assert run_cli("stdp-window", "--config", str(out / "flat" / "run.json"),
                       "--out-dir", str(rerun)) == 0
        assert (rerun / "samples.csv").read_bytes() == (out / "flat" / "samples.csv").read_bytes()


class TestWindowSvg:
    def test_svg_is_valid_and_deterministic(self, tmp_path):
        cfg = small_config(tmp_path, epochs=120)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out1), "--figure-mode")
        run_cli("stdp-window", "--config", str(cfg), "--out-dir", str(out2), "--figure-mode")
        svg = (out1 / "window.svg").read_bytes()
        assert svg.startswith(b"<?xml")
        assert b'version="1.1"' in svg
        assert b"time units" in svg  # axis labels live in the document as text
        assert svg == (out2 / "window.svg").read_bytes()
