"""Compound synapse: n dendritic branches feeding n bistable devices.

Each branch attenuates (and optionally delays) the spike it carries, so the
n devices see n different net-potential peaks for the same spike pair and
switch with n different probabilities.  The number of ON devices is then a
sum of independent non-identical Bernoulli trials, whose exact law is the
Poisson binomial distribution computed here by iterative convolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .device import DeviceModel, DeviceState, reset_probability, sample_transition, set_probability
from .errors import ConfigurationError
from .waveform import SpikeWaveform, net_peaks

ATTENUATE_SIDES = ("pre", "post")


@dataclass(frozen=True)
class DendriticBranch:
    alpha: float        # attenuation factor in (0, 1]
    delay: float = 0.0  # extra propagation delay, time units

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigurationError(f"alpha must be in (0, 1], got {self.alpha}")
        if not np.isfinite(self.delay):
            raise ConfigurationError(f"delay must be finite, got {self.delay}")


def make_linear_attenuators(
    n: int, alpha_min: float, alpha_max: float
) -> tuple[DendriticBranch, ...]:
    """n branches with attenuations spaced linearly from alpha_min to
    alpha_max (all equal to alpha_min when n == 1), zero delays."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if not (0.0 < alpha_min <= alpha_max <= 1.0):
        raise ConfigurationError(
            f"need 0 < alpha_min <= alpha_max <= 1, got ({alpha_min}, {alpha_max})"
        )
    if n == 1:
        return (DendriticBranch(alpha_min),)
    step = (alpha_max - alpha_min) / (n - 1)
    return tuple(DendriticBranch(alpha_min + i * step) for i in range(n))


@dataclass(frozen=True)
class CompoundSynapse:
    """Immutable synapse configuration plus an initial device-state bank.

    The state bank is a value: apply_spike_pair returns a fresh bank rather
    than mutating, so one configuration can be shared across parallel epochs.
    """

    branches: tuple[DendriticBranch, ...]
    device_model: DeviceModel = field(default_factory=DeviceModel)
    states: tuple[DeviceState, ...] = ()
    attenuate_side: str = "pre"

    def __post_init__(self) -> None:
        if len(self.branches) < 1:
            raise ConfigurationError("a synapse needs at least one branch")
        if self.attenuate_side not in ATTENUATE_SIDES:
            raise ConfigurationError(
                f"attenuate_side must be one of {ATTENUATE_SIDES}, got {self.attenuate_side!r}"
            )
        if not self.states:
            object.__setattr__(
                self, "states", tuple(DeviceState.OFF for _ in self.branches)
            )
        if len(self.states) != len(self.branches):
            raise ConfigurationError(
                f"{len(self.branches)} branches but {len(self.states)} device states"
            )

    @property
    def n(self) -> int:
        return len(self.branches)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([b.alpha for b in self.branches], dtype=float)

    def with_states(self, states: Sequence[DeviceState]) -> "CompoundSynapse":
        return replace(self, states=tuple(states))


@dataclass(frozen=True)
class BranchProbabilities:
    """Per-device peaks and switching probabilities for one relative timing."""

    dt: float
    alphas: np.ndarray       # (n,) attenuation factors, for reporting
    v_set_peak: np.ndarray   # (n,)
    v_reset_peak: np.ndarray
    p_set: np.ndarray
    p_reset: np.ndarray

    @property
    def n(self) -> int:
        return len(self.p_set)


def branch_probabilities(
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    dt: float,
) -> BranchProbabilities:
    """Exact per-device net-potential peaks and switching probabilities."""
    n = synapse.n
    v_set = np.empty(n)
    v_reset = np.empty(n)
    for i, branch in enumerate(synapse.branches):
        peaks = net_peaks(
            pre, post, branch.alpha, branch.delay, dt, synapse.attenuate_side
        )
        v_set[i] = peaks.v_set_peak
        v_reset[i] = peaks.v_reset_peak
    model = synapse.device_model
    return BranchProbabilities(
        dt=float(dt),
        alphas=synapse.alphas,
        v_set_peak=v_set,
        v_reset_peak=v_reset,
        p_set=np.asarray(set_probability(model, v_set)),
        p_reset=np.asarray(reset_probability(model, v_reset)),
    )


def expected_conductance(
    synapse: CompoundSynapse,
    probs: BranchProbabilities,
    polarity: str = "set-from-all-off",
) -> float:
    """Average compound conductance in siemens, OFF-branch included.

    For "set-from-all-off" each device is ON with probability p_set; for
    "reset-from-all-on" it stays ON with probability 1 - p_reset.
    """
    if polarity == "set-from-all-off":
        p_on = probs.p_set
    elif polarity == "reset-from-all-on":
        p_on = 1.0 - probs.p_reset
    else:
        raise ConfigurationError(
            f"polarity must be 'set-from-all-off' or 'reset-from-all-on', got {polarity!r}"
        )
    model = synapse.device_model
    g_on = 1.0 / model.r_on
    g_off = 0.0 if np.isinf(model.r_off) else 1.0 / model.r_off
    return float(np.sum(p_on * g_on + (1.0 - p_on) * g_off))


def expected_normalized_conductance(probs: BranchProbabilities) -> float:
    """Expected ON count with r_on normalised to 1 and the OFF branch
    neglected: the sum of the per-device SET probabilities.

    This sum is an expectation, not a probability (it can exceed 1); the
    full distribution over conductance levels is state_distribution.
    """
    return float(np.sum(probs.p_set))


def state_distribution(p: Sequence[float]) -> np.ndarray:
    """Exact Poisson binomial PMF over success counts 0..n.

    Iterative convolution: fold each Bernoulli(p_i) into the running PMF,
    O(n^2) multiply-adds total.
    """
    probs = np.asarray(p, dtype=float)
    if probs.ndim != 1:
        raise ConfigurationError("state_distribution expects a 1-d probability vector")
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise ConfigurationError("probabilities must lie in [0, 1]")
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for k, pi in enumerate(probs, start=1):
        pmf[1 : k + 1] = pmf[1 : k + 1] * (1.0 - pi) + pmf[:k] * pi
        pmf[0] *= 1.0 - pi
    return pmf


def apply_spike_pair(
    synapse: CompoundSynapse,
    probs: BranchProbabilities,
    draws: Sequence[float],
) -> tuple[tuple[DeviceState, ...], int, int]:
    """One stochastic programming event across the whole bank.

    Device i consumes draws[i] only.  OFF devices attempt a SET with
    p_set[i], ON devices a RESET with p_reset[i].  Returns the new state
    bank and the transition counts.
    """
    if len(draws) != synapse.n:
        raise ConfigurationError(f"need {synapse.n} draws, got {len(draws)}")
    new_states = []
    set_count = 0
    reset_count = 0
    for state, p_set, p_reset, u in zip(
        synapse.states, probs.p_set, probs.p_reset, draws
    ):
        after = sample_transition(state, p_set, p_reset, u)
        if after is not state:
            if after is DeviceState.ON:
                set_count += 1
            else:
                reset_count += 1
        new_states.append(after)
    return tuple(new_states), set_count, reset_count
