"""Report layer: formatting, atomic writes, figure fallbacks."""

import json
import os

import numpy as np
import pytest

from synlab.experiment import (
    StdpProtocol,
    StdpWindowResult,
    run_stdp_window,
    state_probability_curves,
)
from synlab.fitting import fit_exponential
from synlab.report import (
    atomic_write_text,
    fits_json,
    fmt,
    render_window_svg,
    samples_csv,
    states_csv,
    states_entries_from_curves,
    states_entries_from_result,
    summary_csv,
)
from synlab.synapse import CompoundSynapse, make_linear_attenuators
from synlab.waveform import WaveformParams, make_default_waveform

WAVE = make_default_waveform(WaveformParams())


def small_run(figure_mode=False):
    synapse = CompoundSynapse(branches=make_linear_attenuators(16, 0.6, 1.0))
    proto = StdpProtocol(dt_min=-2.0, dt_max=2.0, dt_step=1.0, epochs=60,
                         seed=3, figure_mode=figure_mode)
    return run_stdp_window(synapse, WAVE, WAVE, proto)


class TestFormatting:
    def test_fmt_floats_shortest_roundtrip(self):
        assert fmt(0.1) == "0.1"
        assert fmt(-3.0) == "-3.0"
        assert fmt(1.22) == "1.22"
        assert float(fmt(1 / 3)) == 1 / 3

    def test_fmt_integers(self):
        assert fmt(7) == "7"
        assert fmt(np.int32(-4)) == "-4"

    def test_fits_json_turns_nan_into_null(self):
        skipped = fit_exponential([(1.0, -1.0), (2.0, -1.0), (3.0, -1.0)])
        doc = json.loads(fits_json([skipped]))
        assert doc[0]["a"] is None
        assert doc[0]["status"] == "skipped"


class TestAtomicWrite:
    def test_creates_parents_and_replaces(self, tmp_path):
        target = tmp_path / "deep" / "dir" / "file.csv"
        atomic_write_text(target, "one\n")
        atomic_write_text(target, "two\n")
        assert target.read_text() == "two\n"
        assert list(target.parent.iterdir()) == [target]  # no stray temp files


class TestCsvBodies:
    def test_summary_has_one_row_per_grid_point(self):
        res = small_run()
        lines = summary_csv(res).splitlines()
        assert len(lines) == 1 + len(res.points)

    def test_samples_noisy_column_empty_without_figure_mode(self):
        res = small_run()
        line = samples_csv(res).splitlines()[1]
        assert line.endswith(",")

    def test_states_paths_agree(self):
        res = small_run()
        synapse = CompoundSynapse(branches=make_linear_attenuators(16, 0.6, 1.0))
        curves = state_probability_curves(synapse, WAVE, WAVE, res.protocol.dt_grid())
        assert states_csv(states_entries_from_result(res)) == states_csv(
            states_entries_from_curves(curves)
        )


class TestRenderFallbacks:
    def test_empty_result_renders_axes_only(self):
        empty = StdpWindowResult(
            protocol=StdpProtocol(epochs=1),
            n_devices=16,
            points=[],
            delta_g=np.zeros((0, 0), dtype=np.int32),
            delta_g_noisy=None,
            wall_time_s=0.0,
        )
        svg = render_window_svg(empty, []).decode()
        modal = render_window_svg(small_run(), []).decode()
        assert svg.startswith("<?xml")
        assert "PathCollection" not in svg  # no density scatter
        # the only glyph uses left are the axis tick marks
        assert svg.count("<use") < modal.count("<use")
        assert "time units" in svg  # axes still labelled

    def test_modal_fallback_without_figure_mode(self):
        svg = render_window_svg(small_run(), []).decode()
        assert "<use" in svg  # modal markers present

    def test_density_scatter_in_figure_mode(self):
        res = small_run(figure_mode=True)
        svg = render_window_svg(res, [], title="demo").decode()
        assert "PathCollection" in svg  # scatter markers
        assert "demo" in svg

    def test_render_is_deterministic(self):
        res = small_run(figure_mode=True)
        assert render_window_svg(res, []) == render_window_svg(res, [])


class TestThreadsEnvFallback:
    def test_env_variable_used_when_flag_absent(self, monkeypatch):
        from synlab.experiment import resolve_threads

        monkeypatch.setenv("SYNLAB_THREADS", "5")
        assert resolve_threads(None) == 5
        monkeypatch.delenv("SYNLAB_THREADS")
        assert resolve_threads(None) == 1
        assert resolve_threads(0) == (os.cpu_count() or 1)
        assert resolve_threads(3) == 3

    def test_negative_threads_rejected(self):
        from synlab.errors import ConfigurationError
        from synlab.experiment import resolve_threads

        with pytest.raises(ConfigurationError):
            resolve_threads(-1)
