"""Command-line entry point.

Subcommands: stdp-window, device-curve, curves, states, waveform, fit,
compare.  Exit codes: 0 success, 1 configuration error, 2 fit
non-convergence (strict mode only), 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import report
from .config import RunConfig, load_config
from .device import device_curve
from .errors import ConfigurationError, FitNonConvergenceError
from .experiment import (
    compare_modes,
    flat_variant,
    per_device_probability_curves,
    resolve_threads,
    run_stdp_window,
    state_probability_curves,
)
from .fitting import FitOptions, fit_window


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors."""

    def error(self, message):
        raise ConfigurationError(message)


def _add_common(sub: argparse.ArgumentParser, out_dir: bool = False) -> None:
    sub.add_argument("--config", metavar="PATH", help="JSON configuration file")
    if out_dir:
        sub.add_argument("--out-dir", metavar="DIR", default="out", help="output directory")


def _add_run_overrides(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--epochs", type=int, help="override protocol.epochs")
    sub.add_argument("--seed", type=int, help="override protocol.seed")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker threads (0 = auto; default SYNLAB_THREADS or 1)")
    sub.add_argument("--figure-mode", action="store_true", default=None,
                     help="enable timing jitter and level noise")
    sub.add_argument("--strict", action="store_true",
                     help="exit with code 2 if any fit fails to converge")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synlab", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("stdp-window", help="run the Monte Carlo learning-window sweep")
    _add_common(p, out_dir=True)
    _add_run_overrides(p)
    p.set_defaults(handler=cmd_stdp_window)

    p = subs.add_parser("compare", help="run dendritic and flat modes side by side")
    _add_common(p, out_dir=True)
    _add_run_overrides(p)
    p.set_defaults(handler=cmd_compare)

    p = subs.add_parser("device-curve", help="switching-probability sweep of one device")
    _add_common(p)
    p.add_argument("--vmin", type=float, default=-2.0)
    p.add_argument("--vmax", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")
    p.set_defaults(handler=cmd_device_curve)

    p = subs.add_parser("waveform", help="sample the spike waveform to CSV")
    _add_common(p)
    p.add_argument("--step", type=float, default=0.01, help="sampling step, time units")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(handler=cmd_waveform)

    p = subs.add_parser("curves", help="per-device probability curves over the dt grid")
    _add_common(p)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(handler=cmd_curves)

    p = subs.add_parser("states", help="analytic level-change distribution over the dt grid")
    _add_common(p)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(handler=cmd_states)

    p = subs.add_parser("fit", help="re-run the window fits on an existing summary.csv")
    _add_common(p)
    p.add_argument("--input", metavar="FILE", required=True, help="summary.csv to fit")
    p.add_argument("--target", choices=("mode", "mean"), default=None)
    p.add_argument("--set-domain", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--reset-domain", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(handler=cmd_fit)

    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        report.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _check_strict(fits, strict: bool) -> None:
    if not strict:
        return
    bad = [f for f in fits if f.status == "ok" and not f.converged]
    if bad:
        names = ", ".join(f"{f.model}/{f.side}" for f in bad)
        raise FitNonConvergenceError(f"fits did not converge: {names}")


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        epochs=getattr(args, "epochs", None),
        seed=getattr(args, "seed", None),
        figure_mode=getattr(args, "figure_mode", None),
    )


def _write_window_products(
    out_dir: Path, cfg: RunConfig, result, fits, synapse, wave, threads: int, title: str
) -> None:
    grid = result.protocol.dt_grid()
    curves = per_device_probability_curves(synapse, wave, wave, grid)
    report.atomic_write_text(out_dir / "samples.csv", report.samples_csv(result))
    report.atomic_write_text(out_dir / "summary.csv", report.summary_csv(result))
    report.atomic_write_text(
        out_dir / "states.csv",
        report.states_csv(report.states_entries_from_result(result)),
    )
    report.atomic_write_text(out_dir / "curves.csv", report.curves_csv(curves))
    report.atomic_write_text(out_dir / "fits.json", report.fits_json(fits))
    report.atomic_write_text(
        out_dir / "run.json",
        report.run_json(cfg.raw, result.protocol.seed, result.wall_time_s, threads),
    )
    report.atomic_write_bytes(
        out_dir / "window.svg", report.render_window_svg(result, fits, title)
    )


def cmd_stdp_window(args) -> int:
    cfg = _load(args)
    threads = resolve_threads(args.threads)
    synapse = cfg.build_synapse()
    wave = cfg.build_waveform()
    result = run_stdp_window(synapse, wave, wave, cfg.protocol, threads)
    result.config = cfg.raw
    opts = cfg.fit_options
    fits = fit_window(result, opts.target, opts.set_domain, opts.reset_domain)
    _check_strict(fits, args.strict)
    _write_window_products(
        Path(args.out_dir), cfg, result, fits, synapse, wave, threads, "stdp window"
    )
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    threads = resolve_threads(args.threads)
    synapse = cfg.build_synapse()
    wave = cfg.build_waveform()
    comparison = compare_modes(
        synapse, wave, wave, cfg.protocol, cfg.fit_options, threads
    )
    _check_strict(list(comparison.dendritic_fits) + list(comparison.flat_fits), args.strict)
    out = Path(args.out_dir)
    comparison.dendritic.config = cfg.raw
    flat_cfg = cfg.flat_baseline()
    comparison.flat.config = flat_cfg.raw
    _write_window_products(
        out / "dendritic", cfg, comparison.dendritic, comparison.dendritic_fits,
        synapse, wave, threads, "dendritic",
    )
    _write_window_products(
        out / "flat", flat_cfg, comparison.flat, comparison.flat_fits,
        flat_variant(synapse), wave, threads, "flat",
    )
    report.atomic_write_text(
        out / "comparison.json",
        report.comparison_json(
            cfg.protocol.seed, comparison.dendritic_fits, comparison.flat_fits
        ),
    )
    return 0


def cmd_device_curve(args) -> int:
    cfg = _load(args)
    table = device_curve(cfg.device_model, args.vmin, args.vmax, args.steps)
    _emit(report.device_curve_csv(table), args.out)
    return 0


def cmd_waveform(args) -> int:
    cfg = _load(args)
    wave = cfg.build_waveform()
    if args.step <= 0.0:
        raise ConfigurationError(f"--step must be > 0, got {args.step}")
    lo, hi = wave.support()
    t_min = args.t_min if args.t_min is not None else lo - 0.5
    t_max = args.t_max if args.t_max is not None else hi + 0.5
    if t_max < t_min:
        raise ConfigurationError("need --t-min <= --t-max")
    count = int(np.floor((t_max - t_min) / args.step + 1e-9)) + 1
    ts = np.round(t_min + args.step * np.arange(count), 9)
    _emit(report.waveform_csv(zip(ts.tolist(), wave.values(ts).tolist())), args.out)
    return 0


def cmd_curves(args) -> int:
    cfg = _load(args)
    wave = cfg.build_waveform()
    sweep = per_device_probability_curves(
        cfg.build_synapse(), wave, wave, cfg.protocol.dt_grid()
    )
    _emit(report.curves_csv(sweep), args.out)
    return 0


def cmd_states(args) -> int:
    cfg = _load(args)
    wave = cfg.build_waveform()
    curves = state_probability_curves(
        cfg.build_synapse(), wave, wave, cfg.protocol.dt_grid()
    )
    _emit(report.states_csv(report.states_entries_from_curves(curves)), args.out)
    return 0


def _read_summary(path: str) -> list[SimpleNamespace]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    required = {"delta_t", "mean", "mode"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ConfigurationError(
            f"{path} does not look like a summary.csv (needs columns {sorted(required)})"
        )
    points = []
    for row in reader:
        points.append(
            SimpleNamespace(
                dt=float(row["delta_t"]),
                mean=float(row["mean"]),
                mode=float(row["mode"]),
            )
        )
    return points


def cmd_fit(args) -> int:
    cfg = _load(args)
    opts = cfg.fit_options
    target = args.target or opts.target
    set_domain = tuple(args.set_domain) if args.set_domain else opts.set_domain
    reset_domain = tuple(args.reset_domain) if args.reset_domain else opts.reset_domain
    FitOptions(set_domain=set_domain, reset_domain=reset_domain, target=target)
    window = SimpleNamespace(points=_read_summary(args.input))
    fits = fit_window(window, target, set_domain, reset_domain)
    _check_strict(fits, args.strict)
    _emit(report.fits_json(fits), args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"synlab: configuration error: {exc}", file=sys.stderr)
        return 1
    except FitNonConvergenceError as exc:
        print(f"synlab: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"synlab: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
