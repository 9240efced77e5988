"""Data products: CSV/JSON emitters and the learning-window figure.

All files are written atomically (temp file in the target directory, then
rename), so an interrupted run never leaves a truncated product behind.
CSV output uses '.' decimals, LF line endings and fixed field orders;
floats are formatted with repr, the shortest round-trippable form.

The window figure is rendered with matplotlib to SVG 1.1.  Rendering is
deterministic for a given input: the SVG hash salt is pinned and the
creation date is stripped from the metadata.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import DeviceCurves, StateCurves, StdpWindowResult
from .fitting import FitResult

_SVG_HASHSALT = "synlab"
_DENSITY_BIN = 0.25  # level bins for the noisy scatter


def fmt(value) -> str:
    """Canonical CSV field: shortest exact form for floats."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def csv_text(header: str, rows: Iterable[str]) -> str:
    lines = [header]
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def samples_csv(result: StdpWindowResult) -> str:
    """Raw per-epoch samples; delta_g_noisy is empty outside figure mode."""
    noisy = result.delta_g_noisy

    def rows():
        for d, point in enumerate(result.points):
            dt_s = fmt(point.dt)
            levels = result.delta_g[d].tolist()
            if noisy is None:
                for epoch, g in enumerate(levels):
                    yield f"{dt_s},{epoch},{g},"
            else:
                noisy_row = noisy[d].tolist()
                for epoch, (g, gn) in enumerate(zip(levels, noisy_row)):
                    yield f"{dt_s},{epoch},{g},{fmt(gn)}"

    return csv_text("delta_t,epoch,delta_g,delta_g_noisy", rows())


def summary_csv(result: StdpWindowResult) -> str:
    def rows():
        for p in result.points:
            yield ",".join(
                [
                    fmt(p.dt),
                    fmt(p.mean),
                    fmt(p.std),
                    fmt(p.mode),
                    fmt(p.analytic_mean),
                    fmt(p.analytic_mode),
                    fmt(p.tvd),
                ]
            )

    return csv_text("delta_t,mean,std,mode,analytic_mean,analytic_mode,tvd", rows())


def states_csv(entries: Iterable[tuple[float, np.ndarray, np.ndarray]]) -> str:
    """Rows of (delta_t, signed level, probability)."""

    def rows():
        for dt, levels, probs in entries:
            dt_s = fmt(dt)
            for g, q in zip(levels.tolist(), probs.tolist()):
                yield f"{dt_s},{g},{fmt(q)}"

    return csv_text("delta_t,g,probability", rows())


def states_entries_from_result(result: StdpWindowResult):
    for p in result.points:
        yield p.dt, p.analytic_levels, p.analytic_pmf


def states_entries_from_curves(curves: StateCurves):
    for i, dt in enumerate(curves.dts.tolist()):
        yield dt, curves.levels[i], curves.probs[i]


def curves_csv(curves: DeviceCurves) -> str:
    def rows():
        for i, dt in enumerate(curves.dts.tolist()):
            dt_s = fmt(dt)
            for j in range(len(curves.alphas)):
                yield ",".join(
                    [
                        dt_s,
                        str(j),
                        fmt(curves.alphas[j]),
                        fmt(curves.v_set_peak[i, j]),
                        fmt(curves.v_reset_peak[i, j]),
                        fmt(curves.p_set[i, j]),
                        fmt(curves.p_reset[i, j]),
                    ]
                )

    return csv_text(
        "delta_t,device_index,alpha,v_set_peak,v_reset_peak,p_set,p_reset", rows()
    )


def device_curve_csv(table: np.ndarray) -> str:
    rows = (f"{fmt(v)},{fmt(ps)},{fmt(pr)}" for v, ps, pr in table.tolist())
    return csv_text("voltage,p_set,p_reset", rows)


def waveform_csv(samples: Iterable[tuple[float, float]]) -> str:
    rows = (f"{fmt(t)},{fmt(v)}" for t, v in samples)
    return csv_text("t,voltage", rows)


def fits_json(fits: Sequence[FitResult]) -> str:
    return json.dumps([f.to_record() for f in fits], indent=2) + "\n"


def run_json(config_tree: dict, seed: int, wall_time_s: float, threads: int) -> str:
    doc = {
        "config": config_tree,
        "seed": seed,
        "threads": threads,
        "wall_time_s": wall_time_s,
    }
    return json.dumps(doc, indent=2) + "\n"


def comparison_json(
    seed: int, dendritic_fits: Sequence[FitResult], flat_fits: Sequence[FitResult]
) -> str:
    doc = {
        "seed": seed,
        "dendritic": {"fits": [f.to_record() for f in dendritic_fits]},
        "flat": {"fits": [f.to_record() for f in flat_fits]},
    }
    return json.dumps(doc, indent=2) + "\n"


def _scatter_bins(result: StdpWindowResult):
    """Bin the noisy samples per grid point; returns xs, ys, density in (0, 1]."""
    n = result.n_devices
    edges = np.arange(-(n + 2), n + 2 + _DENSITY_BIN, _DENSITY_BIN)
    centers = 0.5 * (edges[:-1] + edges[1:])
    xs, ys, counts = [], [], []
    for d, point in enumerate(result.points):
        hist, _ = np.histogram(result.delta_g_noisy[d], bins=edges)
        keep = hist > 0
        xs.append(np.full(int(keep.sum()), point.dt))
        ys.append(centers[keep])
        counts.append(hist[keep])
    xs = np.concatenate(xs) if xs else np.empty(0)
    ys = np.concatenate(ys) if ys else np.empty(0)
    counts = np.concatenate(counts).astype(float) if counts else np.empty(0)
    if counts.size:
        counts /= counts.max()
    return xs, ys, counts


def render_window_svg(
    result: StdpWindowResult,
    fits: Sequence[FitResult] = (),
    title: str = "",
) -> bytes:
    """Learning-window figure as SVG bytes.

    Figure-mode runs get a density scatter of the noisy samples (marker
    opacity proportional to local density); otherwise the modal level per
    grid point is drawn.  Converged fits are overlaid, mirrored below zero
    on the reset side.
    """
    n = result.n_devices
    # fonttype "none" keeps labels as real text nodes, so the axes and tick
    # labels stay inspectable in the output
    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        if result.delta_g_noisy is not None and result.delta_g_noisy.size:
            xs, ys, density = _scatter_bins(result)
            if xs.size:
                ax.scatter(
                    xs, ys, s=8, c="midnightblue", alpha=density,
                    edgecolors="none", zorder=2,
                )
        else:
            dts = result.dts
            modes = [p.mode for p in result.points]
            ax.plot(dts, modes, "s", color="black", markersize=3, zorder=2)

        styles = {"exponential": ("crimson", "-"), "linear": ("darkorange", "--")}
        for fit in fits:
            if fit.status != "ok" or not fit.converged:
                continue
            color, linestyle = styles.get(fit.model, ("gray", ":"))
            grid = np.linspace(fit.domain[0], fit.domain[1], 200)
            values = fit.predict(grid)
            if fit.side == "reset":
                values = -values
            ax.plot(
                grid, values, linestyle, color=color, linewidth=1.6,
                label=f"{fit.model} ({fit.side})", zorder=3,
            )

        ax.axhline(0.0, color="0.75", linewidth=0.6, zorder=1)
        ax.axvline(0.0, color="0.75", linewidth=0.6, zorder=1)
        ax.set_xlabel(r"$\Delta t$ (time units)")
        ax.set_ylabel(r"$\Delta g$ (conductance levels)")
        ax.set_ylim(-(n + 2), n + 2)
        if title:
            ax.set_title(title)
        if fits:
            handles, _ = ax.get_legend_handles_labels()
            if handles:
                ax.legend(fontsize=8, loc="upper right", framealpha=0.9)
        fig.tight_layout()
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buffer.getvalue()
