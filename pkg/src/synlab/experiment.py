"""Epoch-based Monte Carlo sweeps of the STDP learning window.

Each epoch is one independent trial: a fresh bank of device states is
initialised, one spike pair at relative timing dt is applied, and the
resulting signed level change is recorded.  Aggregation per grid point
yields the empirical window; the exact Poisson binomial law of the same
event is attached as an analytic reference column.

Draw layout (fixed per configuration, one Philox row per epoch):
  [jitter draw?][bernoulli init draws?][n device draws][noise draw?]
where the optional slots exist only in figure mode / under the bernoulli
init policy.  The polarity of the recorded change and the polarity-split
initial bank follow the nominal grid dt; timing jitter perturbs only the
switching probabilities.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import fitting
from .device import reset_probability, set_probability
from .errors import ConfigurationError
from .rng import RngStream, gaussian_from_uniform
from .synapse import (
    BranchProbabilities,
    CompoundSynapse,
    DendriticBranch,
    branch_probabilities,
    state_distribution,
)
from .waveform import SpikeWaveform, net_peak_values

INIT_POLICIES = ("polarity-split", "all-off", "all-on")


def _parse_init_policy(policy: str) -> tuple[str, float]:
    """Split an init-policy string into (kind, bernoulli_p)."""
    if policy in INIT_POLICIES:
        return policy, 0.0
    if policy.startswith("bernoulli:"):
        try:
            p = float(policy.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad bernoulli probability in {policy!r}") from None
        if not (0.0 <= p <= 1.0):
            raise ConfigurationError(f"bernoulli probability must be in [0, 1], got {p}")
        return "bernoulli", p
    raise ConfigurationError(
        f"init_policy must be one of {INIT_POLICIES} or 'bernoulli:<p>', got {policy!r}"
    )


@dataclass(frozen=True)
class StdpProtocol:
    """Sweep protocol; defaults follow the stock simulation setup."""

    dt_min: float = -5.0
    dt_max: float = 5.0
    dt_step: float = 0.1
    epochs: int = 10000
    init_policy: str = "polarity-split"
    jitter_sigma: float = 0.05  # figure-mode only, time units
    noise_sigma: float = 0.25   # figure-mode only, conductance levels
    figure_mode: bool = False
    seed: int = 42

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if not (self.dt_step > 0.0):
            raise ConfigurationError(f"dt_step must be > 0, got {self.dt_step}")
        if self.dt_max < self.dt_min:
            raise ConfigurationError(
                f"need dt_min <= dt_max, got ({self.dt_min}, {self.dt_max})"
            )
        if self.jitter_sigma < 0.0 or self.noise_sigma < 0.0:
            raise ConfigurationError("jitter_sigma and noise_sigma must be >= 0")
        _parse_init_policy(self.init_policy)

    def dt_grid(self) -> np.ndarray:
        """Arithmetic dt grid, rounded to 9 decimals to keep clean labels."""
        count = int(math.floor((self.dt_max - self.dt_min) / self.dt_step + 0.5)) + 1
        return np.round(self.dt_min + self.dt_step * np.arange(count), 9)


@dataclass(frozen=True)
class GridPointStats:
    """Aggregates for one dt of the sweep."""

    dt: float
    histogram: dict[int, int]     # observed signed level change -> count
    mean: float
    std: float
    mode: int
    analytic_levels: np.ndarray   # signed levels, ascending
    analytic_pmf: np.ndarray      # aligned with analytic_levels
    analytic_mean: float
    analytic_mode: int
    tvd: float                    # total variation empirical vs analytic


@dataclass
class StdpWindowResult:
    """Full sweep output: per-point aggregates plus the raw sample matrix."""

    protocol: StdpProtocol
    n_devices: int
    points: list[GridPointStats]
    delta_g: np.ndarray                 # (grid, epochs) signed level changes
    delta_g_noisy: np.ndarray | None    # (grid, epochs), figure mode only
    wall_time_s: float
    config: dict | None = None          # effective config echo, set by the CLI

    @property
    def dts(self) -> np.ndarray:
        return np.array([p.dt for p in self.points])

    @property
    def seed(self) -> int:
        return self.protocol.seed


def _mode_from_weights(levels: np.ndarray, weights: np.ndarray) -> int:
    """Heaviest level; ties break toward the smallest magnitude."""
    w = np.asarray(weights, dtype=float)
    ties = levels[w == w.max()]
    return int(ties[np.argmin(np.abs(ties))])


def _batch_peaks(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    dts: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised per-branch peaks and probabilities over an array of dts.

    Returns (v_set, v_reset, p_set, p_reset), each of shape (len(dts), n).
    Agrees with branch_probabilities applied one dt at a time.
    """
    n = synapse.n
    v_set = np.empty((len(dts), n))
    v_reset = np.empty((len(dts), n))
    for i, branch in enumerate(synapse.branches):
        vs, vr = net_peak_values(
            pre, post, branch.alpha, branch.delay, dts, synapse.attenuate_side
        )
        v_set[:, i] = vs
        v_reset[:, i] = vr
    model = synapse.device_model
    return (
        v_set,
        v_reset,
        np.asarray(set_probability(model, v_set)),
        np.asarray(reset_probability(model, v_reset)),
    )


def _analytic_reference(
    bp: BranchProbabilities, dt: float, n: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """Polarity-split law at the nominal dt: SET counts for dt >= 0, negated
    RESET counts for dt < 0.  Returns (levels ascending, pmf, mean)."""
    if dt >= 0.0:
        return np.arange(0, n + 1), state_distribution(bp.p_set), float(bp.p_set.sum())
    pmf = state_distribution(bp.p_reset)
    return np.arange(-n, 1), pmf[::-1].copy(), -float(bp.p_reset.sum())


def _run_grid_point(
    grid_index: int,
    dt: float,
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    protocol: StdpProtocol,
    stream: RngStream,
) -> tuple[GridPointStats, np.ndarray, np.ndarray | None]:
    n = synapse.n
    epochs = protocol.epochs
    kind, bern_p = _parse_init_policy(protocol.init_policy)
    fm = protocol.figure_mode

    draws_per_epoch = n + (n if kind == "bernoulli" else 0) + (2 if fm else 0)
    draws = stream.uniform_matrix(grid_index, epochs, draws_per_epoch)
    col = 0
    if fm:
        jitter_u = draws[:, col]
        col += 1
    if kind == "bernoulli":
        on0 = draws[:, col : col + n] < bern_p  # (epochs, n)
        col += n
    elif kind == "all-on":
        on0 = np.ones(n, dtype=bool)
    elif kind == "all-off":
        on0 = np.zeros(n, dtype=bool)
    else:  # polarity-split: full headroom in the direction the pair drives
        on0 = np.full(n, dt < 0.0)
    device_u = draws[:, col : col + n]
    col += n
    if fm:
        noise_u = draws[:, col]

    bp = branch_probabilities(synapse, pre, post, dt)
    if fm:
        dts_eff = dt + gaussian_from_uniform(jitter_u, protocol.jitter_sigma)
        _, _, p_set, p_reset = _batch_peaks(synapse, pre, post, dts_eff)
    else:
        p_set, p_reset = bp.p_set, bp.p_reset  # (n,), broadcasts over epochs

    sets = (~on0) & (device_u < p_set)
    resets = on0 & (device_u < p_reset)
    if dt >= 0.0:
        delta_g = sets.sum(axis=1).astype(np.int32)
    else:
        delta_g = (-resets.sum(axis=1)).astype(np.int32)
    noisy = delta_g + gaussian_from_uniform(noise_u, protocol.noise_sigma) if fm else None

    counts = np.bincount(delta_g + n, minlength=2 * n + 1)  # levels -n..n
    levels_all = np.arange(-n, n + 1)
    histogram = {int(l): int(c) for l, c in zip(levels_all, counts) if c}
    a_levels, a_pmf, a_mean = _analytic_reference(bp, dt, n)
    side_counts = counts[n:] if dt >= 0.0 else counts[: n + 1]
    tvd = 0.5 * float(np.abs(side_counts / epochs - a_pmf).sum())

    stats = GridPointStats(
        dt=dt,
        histogram=histogram,
        mean=float(delta_g.mean()),
        std=float(delta_g.std()),
        mode=_mode_from_weights(levels_all, counts),
        analytic_levels=a_levels,
        analytic_pmf=a_pmf,
        analytic_mean=a_mean,
        analytic_mode=_mode_from_weights(a_levels, a_pmf),
        tvd=tvd,
    )
    return stats, delta_g, noisy


def resolve_threads(threads: int | None) -> int:
    """--threads semantics: None -> SYNLAB_THREADS or 1; 0 -> auto-detect."""
    if threads is None:
        env = os.environ.get("SYNLAB_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 0:
        raise ConfigurationError(f"threads must be >= 0, got {threads}")
    return threads if threads > 0 else (os.cpu_count() or 1)


def run_stdp_window(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    protocol: StdpProtocol,
    threads: int = 1,
) -> StdpWindowResult:
    """Run the full sweep.

    Deterministic for a fixed (configuration, seed) no matter the thread
    count: every grid point owns its own counter-based substream and the
    results are assembled in grid order.
    """
    t_start = time.perf_counter()
    grid = protocol.dt_grid()
    stream = RngStream(protocol.seed)
    workers = resolve_threads(threads)

    def job(args: tuple[int, float]):
        d, dt = args
        return _run_grid_point(d, dt, synapse, pre, post, protocol, stream)

    tasks = list(enumerate(grid.tolist()))
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, tasks))
    else:
        outcomes = [job(t) for t in tasks]

    points = [o[0] for o in outcomes]
    delta_g = np.stack([o[1] for o in outcomes])
    noisy = np.stack([o[2] for o in outcomes]) if protocol.figure_mode else None
    return StdpWindowResult(
        protocol=protocol,
        n_devices=synapse.n,
        points=points,
        delta_g=delta_g,
        delta_g_noisy=noisy,
        wall_time_s=time.perf_counter() - t_start,
    )


@dataclass(frozen=True)
class DeviceCurves:
    """Per-device peak and probability sweep (no randomness involved)."""

    dts: np.ndarray          # (m,)
    alphas: np.ndarray       # (n,)
    v_set_peak: np.ndarray   # (m, n)
    v_reset_peak: np.ndarray
    p_set: np.ndarray
    p_reset: np.ndarray


def per_device_probability_curves(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    dts,
) -> DeviceCurves:
    dts = np.asarray(dts, dtype=float)
    v_set, v_reset, p_set, p_reset = _batch_peaks(synapse, pre, post, dts)
    return DeviceCurves(
        dts=dts,
        alphas=synapse.alphas,
        v_set_peak=v_set,
        v_reset_peak=v_reset,
        p_set=p_set,
        p_reset=p_reset,
    )


@dataclass(frozen=True)
class StateCurves:
    """Analytic level-change distribution across the sweep."""

    dts: np.ndarray     # (m,)
    levels: np.ndarray  # (m, n+1) signed levels, ascending per row
    probs: np.ndarray   # (m, n+1) PMF rows aligned with levels


def state_probability_curves(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    dts,
) -> StateCurves:
    dts = np.asarray(dts, dtype=float)
    n = synapse.n
    levels = np.empty((len(dts), n + 1), dtype=int)
    probs = np.empty((len(dts), n + 1))
    for i, dt in enumerate(dts):
        bp = branch_probabilities(synapse, pre, post, float(dt))
        lv, pmf, _ = _analytic_reference(bp, float(dt), n)
        levels[i] = lv
        probs[i] = pmf
    return StateCurves(dts=dts, levels=levels, probs=probs)


def flat_variant(synapse: CompoundSynapse) -> CompoundSynapse:
    """Same synapse with dendritic processing switched off: every branch at
    unit attenuation and zero delay."""
    return replace(
        synapse,
        branches=tuple(DendriticBranch(1.0) for _ in synapse.branches),
    )


@dataclass
class ComparisonResult:
    """Dendritic and flat runs on the same seed, with their fit tables."""

    dendritic: StdpWindowResult
    flat: StdpWindowResult
    dendritic_fits: list["fitting.FitResult"]
    flat_fits: list["fitting.FitResult"]


def compare_modes(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    protocol: StdpProtocol,
    fit_options: "fitting.FitOptions | None" = None,
    threads: int = 1,
) -> ComparisonResult:
    """Run the dendritic configuration and its flat baseline side by side."""
    opts = fit_options or fitting.FitOptions()
    dendritic = run_stdp_window(synapse, pre, post, protocol, threads)
    flat = run_stdp_window(flat_variant(synapse), pre, post, protocol, threads)
    return ComparisonResult(
        dendritic=dendritic,
        flat=flat,
        dendritic_fits=fitting.fit_window(
            dendritic, opts.target, opts.set_domain, opts.reset_domain
        ),
        flat_fits=fitting.fit_window(
            flat, opts.target, opts.set_domain, opts.reset_domain
        ),
    )
