"""Piecewise-linear spike waveforms and exact spike-pair net-potential peaks.

Geometry of the default spike
-----------------------------
The default spike puts a negative tail on [-t_minus, 0), ramping linearly
from 0 V down to -a_minus just before the fire time, followed by a constant
positive pulse of +a_plus on [0, t_plus).  Placing the tail ahead of the
pulse, with its magnitude growing toward the pulse, is what gives the model
its characteristic behaviour:

* a causal pair (post fires dt > 0 after pre) superimposes the pre pulse on
  the post tail, so the set-side peak is a_plus * alpha + a_minus * f(dt);
* while 0 < dt < t_plus the pulse still touches the tail at full magnitude,
  producing a flat plateau in the learning window;
* on the depression side the attenuators scale the smaller tail amplitude,
  which packs the per-device switching-probability curves closer together
  there than on the potentiation side.

Sign convention: net(t) = alpha * pre(t - delay) - post(t - dt) with
dt = t_post - t_pre.  Positive net potential drives SET, negative drives
RESET.  The attenuation (and the branch delay) can be moved to the post
spike instead, which mirrors the roles of the two waveforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError

Segment = tuple[float, float, float, float]  # (t_start, t_end, v_start, v_end)


@dataclass(frozen=True)
class WaveformParams:
    """Shape parameters of the stock two-segment spike."""

    a_plus: float = 0.9   # positive pulse amplitude, volts
    t_plus: float = 1.0   # pulse width, time units
    a_minus: float = 0.4  # negative-tail peak magnitude, volts
    t_minus: float = 5.0  # tail span, time units

    def __post_init__(self) -> None:
        if not (self.a_plus > 0.0):
            raise ConfigurationError(f"a_plus must be > 0, got {self.a_plus}")
        if not (self.t_plus > 0.0):
            raise ConfigurationError(f"t_plus must be > 0, got {self.t_plus}")
        if self.a_minus < 0.0:
            raise ConfigurationError(f"a_minus must be >= 0, got {self.a_minus}")
        if self.t_minus < 0.0:
            raise ConfigurationError(f"t_minus must be >= 0, got {self.t_minus}")


class SpikeWaveform:
    """Voltage versus time as sorted, non-overlapping, half-open linear
    segments; exactly 0 V outside their union.

    Instances are immutable after construction, so they can be shared
    freely between worker threads.
    """

    def __init__(self, segments: Iterable[Segment]):
        segs = [tuple(float(v) for v in seg) for seg in segments]
        for seg in segs:
            if len(seg) != 4:
                raise ConfigurationError(f"segment must have 4 fields, got {seg}")
            if not seg[0] < seg[1]:
                raise ConfigurationError(f"segment needs t_start < t_end, got {seg}")
        segs.sort(key=lambda s: s[0])
        for a, b in zip(segs, segs[1:]):
            if b[0] < a[1]:
                raise ConfigurationError(f"segments overlap: {a} and {b}")
        self._segments: tuple[Segment, ...] = tuple(segs)
        self._starts = np.array([s[0] for s in segs], dtype=float)
        self._ends = np.array([s[1] for s in segs], dtype=float)
        self._v0 = np.array([s[2] for s in segs], dtype=float)
        slopes = [(s[3] - s[2]) / (s[1] - s[0]) for s in segs]
        self._slopes = np.array(slopes, dtype=float)
        self._v_end = np.array([s[3] for s in segs], dtype=float)

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self._segments

    def breakpoints(self) -> np.ndarray:
        """Unique segment edges, ascending."""
        if not self._segments:
            return np.empty(0, dtype=float)
        return np.unique(np.concatenate([self._starts, self._ends]))

    def support(self) -> tuple[float, float]:
        """Smallest closed interval outside which the waveform is 0."""
        if not self._segments:
            return (0.0, 0.0)
        return (float(self._starts[0]), float(self._ends[-1]))

    def value(self, t: float) -> float:
        """Voltage at time t (segments are closed at the start, open at the end)."""
        return float(self.values(np.asarray(t, dtype=float)))

    def values(self, t) -> np.ndarray:
        """Vectorised evaluation; any array shape is accepted."""
        t = np.asarray(t, dtype=float)
        if not self._segments:
            return np.zeros_like(t)
        flat = t.ravel()
        idx = np.searchsorted(self._starts, flat, side="right") - 1
        safe = np.clip(idx, 0, len(self._segments) - 1)
        inside = (idx >= 0) & (flat < self._ends[safe])
        out = np.where(
            inside, self._v0[safe] + self._slopes[safe] * (flat - self._starts[safe]), 0.0
        )
        return out.reshape(t.shape)

    def left_values(self, t) -> np.ndarray:
        """Vectorised one-sided limit from below, lim s->t- of value(s).

        Differs from values() only at segment edges: at a segment end the
        limit is v_end even though the point itself lies outside the
        half-open segment.
        """
        t = np.asarray(t, dtype=float)
        if not self._segments:
            return np.zeros_like(t)
        flat = t.ravel()
        idx = np.searchsorted(self._starts, flat, side="left") - 1
        safe = np.clip(idx, 0, len(self._segments) - 1)
        inside = (idx >= 0) & (flat <= self._ends[safe])
        out = np.where(
            inside, self._v0[safe] + self._slopes[safe] * (flat - self._starts[safe]), 0.0
        )
        return out.reshape(t.shape)

    def __repr__(self) -> str:
        return f"SpikeWaveform({list(self._segments)!r})"


def make_default_waveform(params: WaveformParams) -> SpikeWaveform:
    """Build the stock spike: rising-magnitude negative tail, then a constant
    positive pulse, with the nominal fire time at t = 0."""
    segments: list[Segment] = []
    if params.t_minus > 0.0:
        segments.append((-params.t_minus, 0.0, 0.0, -params.a_minus))
    segments.append((0.0, params.t_plus, params.a_plus, params.a_plus))
    return SpikeWaveform(segments)


def evaluate(waveform: SpikeWaveform, t: float) -> float:
    """Piecewise-linear evaluation at a single time."""
    return waveform.value(t)


def scale_waveform(waveform: SpikeWaveform, factor: float) -> SpikeWaveform:
    """Copy of the waveform with every voltage multiplied by factor."""
    return SpikeWaveform(
        (t0, t1, v0 * factor, v1 * factor) for (t0, t1, v0, v1) in waveform.segments
    )


@dataclass(frozen=True)
class NetPeaks:
    """Extrema of the pair net potential over all time."""

    v_set_peak: float    # global maximum, drives SET
    v_reset_peak: float  # global minimum, drives RESET
    t_at_set: float
    t_at_reset: float

    def __post_init__(self) -> None:
        if self.v_set_peak < self.v_reset_peak:
            raise ValueError("net-potential maximum below minimum")


def _shifts(alpha: float, delay: float, dt: float, attenuate_side: str):
    """Per-side scale factors and time shifts for the net potential.

    The branch delay rides on whichever spike passes through the attenuator.
    """
    if attenuate_side == "pre":
        return alpha, delay, 1.0, dt
    if attenuate_side == "post":
        return 1.0, 0.0, alpha, dt + delay
    raise ConfigurationError(f"attenuate_side must be 'pre' or 'post', got {attenuate_side!r}")


def net_potential(
    pre: SpikeWaveform,
    post: SpikeWaveform,
    alpha: float,
    delay: float,
    dt: float,
    t: float,
    attenuate_side: str = "pre",
) -> float:
    """Net potential across one device at time t for a pre/post pair with
    relative timing dt = t_post - t_pre (pre fire time at t = 0)."""
    a_pre, s_pre, a_post, s_post = _shifts(alpha, delay, dt, attenuate_side)
    return a_pre * pre.value(t - s_pre) - a_post * post.value(t - s_post)


def net_peaks(
    pre: SpikeWaveform,
    post: SpikeWaveform,
    alpha: float,
    delay: float,
    dt: float,
    attenuate_side: str = "pre",
) -> NetPeaks:
    """Exact extrema of the net potential over all t.

    The net potential is piecewise linear, so its extrema sit at the merged
    breakpoints of the two shifted waveforms; both one-sided limits are
    examined at every breakpoint because segments are half-open.  Each
    candidate is evaluated in per-waveform time coordinates so that the
    breakpoint it came from enters its own waveform exactly (a round trip
    through the shifted frame can land half an ulp across a jump).  The
    zero level outside both supports is always a candidate, hence
    v_set_peak >= 0 >= v_reset_peak.
    """
    a_pre, s_pre, a_post, s_post = _shifts(alpha, delay, dt, attenuate_side)
    bp_pre = pre.breakpoints()
    bp_post = post.breakpoints()
    if bp_pre.size + bp_post.size == 0:
        return NetPeaks(0.0, 0.0, 0.0, 0.0)
    # per-candidate arguments: the originating waveform sees its breakpoint
    # exactly, the other waveform absorbs the single rounded shift
    t_pre = np.concatenate([bp_pre, bp_post + (s_post - s_pre)])
    t_post = np.concatenate([bp_pre + (s_pre - s_post), bp_post])
    times = np.concatenate([bp_pre + s_pre, bp_post + s_post])

    right = a_pre * pre.values(t_pre) - a_post * post.values(t_post)
    left = a_pre * pre.left_values(t_pre) - a_post * post.left_values(t_post)
    values = np.concatenate([right, left])
    times = np.concatenate([times, times])
    i_max = int(np.argmax(values))
    i_min = int(np.argmin(values))
    return NetPeaks(
        v_set_peak=float(values[i_max]),
        v_reset_peak=float(values[i_min]),
        t_at_set=float(times[i_max]),
        t_at_reset=float(times[i_min]),
    )


def net_peak_values(
    pre: SpikeWaveform,
    post: SpikeWaveform,
    alpha: float,
    delay: float,
    dts,
    attenuate_side: str = "pre",
) -> tuple[np.ndarray, np.ndarray]:
    """Batched net_peaks over an array of relative timings.

    Returns (v_set_peaks, v_reset_peaks) aligned with dts.  Used by the
    Monte Carlo hot loop, where every epoch can carry its own jittered dt;
    agrees exactly with net_peaks applied one dt at a time.
    """
    dts = np.asarray(dts, dtype=float)
    if attenuate_side == "pre":
        a_pre, a_post = alpha, 1.0
        s_pre = np.zeros_like(dts) + delay
        s_post = dts
    elif attenuate_side == "post":
        a_pre, a_post = 1.0, alpha
        s_pre = np.zeros_like(dts)
        s_post = dts + delay
    else:
        raise ConfigurationError(f"attenuate_side must be 'pre' or 'post', got {attenuate_side!r}")

    bp_pre = pre.breakpoints()
    bp_post = post.breakpoints()
    m1, m2 = bp_pre.size, bp_post.size
    if m1 + m2 == 0:
        return np.zeros_like(dts), np.zeros_like(dts)

    # same per-frame coordinates as net_peaks, broadcast over dts
    t_pre = np.empty(dts.shape + (m1 + m2,), dtype=float)
    t_post = np.empty_like(t_pre)
    t_pre[..., :m1] = bp_pre
    t_pre[..., m1:] = bp_post + (s_post - s_pre)[..., None]
    t_post[..., :m1] = bp_pre + (s_pre - s_post)[..., None]
    t_post[..., m1:] = bp_post

    right = a_pre * pre.values(t_pre) - a_post * post.values(t_post)
    left = a_pre * pre.left_values(t_pre) - a_post * post.left_values(t_post)
    v_set = np.maximum(right.max(axis=-1), left.max(axis=-1))
    v_reset = np.minimum(right.min(axis=-1), left.min(axis=-1))
    return v_set, v_reset
