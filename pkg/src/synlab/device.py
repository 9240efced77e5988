"""Bistable stochastic resistive device: Gaussian-threshold switching model.

A device is ON (low resistance) or OFF (high resistance).  Its switching
threshold is a Gaussian random variable redrawn at every programming event,
so the probability that a voltage peak v switches temporarily follows the
Gaussian CDF accumulated from 0 to v.  The model is amplitude-only: pulse
duration plays no role, and the probability depends on the extremal net
potential seen during a spike-pair overlap.

Note the model is deliberately not hard-gated at the mean threshold: a
sub-threshold peak keeps a small but nonzero switching probability (about
0.159 for a lone 0.9 V pulse against a 1 V / 0.1 V-sigma threshold).  That
"leakage" is an emergent property of treating the threshold itself as the
random variable.  Set gate_below_threshold to force such probabilities to
zero for sensitivity studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .mathutils import normal_cdf


class DeviceState(Enum):
    OFF = 0
    ON = 1


@dataclass(frozen=True)
class DeviceModel:
    """Immutable device parameters, shared by all devices of a synapse."""

    v_th_set: float = 1.0     # mean SET threshold, volts (> 0)
    v_th_reset: float = -1.0  # mean RESET threshold, volts (< 0)
    sigma_set: float = 0.1
    sigma_reset: float = 0.1
    r_on: float = 1.0         # ohms
    r_off: float = 1e6        # ohms; math.inf means "neglect the OFF branch"
    gate_below_threshold: bool = False

    def __post_init__(self) -> None:
        if not (self.v_th_set > 0.0):
            raise ConfigurationError(f"v_th_set must be > 0, got {self.v_th_set}")
        if not (self.v_th_reset < 0.0):
            raise ConfigurationError(f"v_th_reset must be < 0, got {self.v_th_reset}")
        if not (self.sigma_set > 0.0 and self.sigma_reset > 0.0):
            raise ConfigurationError("sigma_set and sigma_reset must be > 0")
        if not (self.r_on > 0.0):
            raise ConfigurationError(f"r_on must be > 0, got {self.r_on}")
        if not (self.r_off > self.r_on):
            raise ConfigurationError(
                f"r_off must exceed r_on, got r_off={self.r_off}, r_on={self.r_on}"
            )

    def conductance(self, state: DeviceState) -> float:
        if state is DeviceState.ON:
            return 1.0 / self.r_on
        return 0.0 if math.isinf(self.r_off) else 1.0 / self.r_off


def set_probability(model: DeviceModel, v_peak):
    """Probability that a positive peak v_peak SETs an OFF device.

    Gaussian CDF mass between 0 and v_peak around the mean SET threshold;
    0 for v_peak <= 0.  Accepts scalars or arrays.
    """
    v = np.asarray(v_peak, dtype=float)
    z = (v - model.v_th_set) / model.sigma_set
    base = normal_cdf(z) - normal_cdf(-model.v_th_set / model.sigma_set)
    p = np.where(v > 0.0, np.clip(base, 0.0, 1.0), 0.0)
    if model.gate_below_threshold:
        p = np.where(v > model.v_th_set, p, 0.0)
    return float(p) if p.ndim == 0 else p


def reset_probability(model: DeviceModel, v_peak):
    """Mirror of set_probability on the negative axis: probability that the
    magnitude of a negative peak beats the Gaussian RESET threshold."""
    v = np.asarray(v_peak, dtype=float)
    th = abs(model.v_th_reset)
    z = (np.abs(v) - th) / model.sigma_reset
    base = normal_cdf(z) - normal_cdf(-th / model.sigma_reset)
    p = np.where(v < 0.0, np.clip(base, 0.0, 1.0), 0.0)
    if model.gate_below_threshold:
        p = np.where(np.abs(v) > th, p, 0.0)
    return float(p) if p.ndim == 0 else p


def sample_transition(
    state: DeviceState, p_set: float, p_reset: float, u: float
) -> DeviceState:
    """Apply one stochastic switching attempt.

    OFF -> ON iff u < p_set; ON -> OFF iff u < p_reset; otherwise unchanged.
    Pure function of its arguments; consumes exactly the one draw it is given.
    """
    if state is DeviceState.OFF:
        return DeviceState.ON if u < p_set else DeviceState.OFF
    return DeviceState.OFF if u < p_reset else DeviceState.ON


def device_curve(model: DeviceModel, v_min: float, v_max: float, steps: int) -> np.ndarray:
    """Uniform voltage sweep of the switching probabilities.

    Returns an array of shape (steps, 3) with columns
    (voltage, p_set, p_reset).
    """
    if steps < 2:
        raise ConfigurationError(f"steps must be >= 2, got {steps}")
    if not v_min < v_max:
        raise ConfigurationError(f"need v_min < v_max, got {v_min} >= {v_max}")
    v = np.linspace(v_min, v_max, steps)
    return np.column_stack([v, set_probability(model, v), reset_probability(model, v)])
