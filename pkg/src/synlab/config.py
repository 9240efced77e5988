"""Run configuration: one JSON tree, every field optional, strict keys.

The effective (post-default) tree is echoed verbatim into run.json, and
feeding run.json back through --config reproduces the identical run, so a
data product always carries its own recipe.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .device import DeviceModel
from .errors import ConfigurationError
from .experiment import StdpProtocol
from .fitting import FitOptions
from .synapse import CompoundSynapse, DendriticBranch, make_linear_attenuators
from .waveform import SpikeWaveform, WaveformParams, make_default_waveform

DEFAULT_CONFIG: dict = {
    "waveform": {"a_plus": 0.9, "t_plus": 1.0, "a_minus": 0.4, "t_minus": 5.0},
    "device": {
        "v_th_set": 1.0,
        "v_th_reset": -1.0,
        "sigma_set": 0.1,
        "sigma_reset": 0.1,
        "r_on": 1.0,
        "r_off": 1e6,
        "gate_below_threshold": False,
    },
    "synapse": {
        "n": 16,
        "alpha_min": 0.6,
        "alpha_max": 1.0,
        "alphas": None,
        "delays": None,
        "attenuate_side": "pre",
    },
    "protocol": {
        "dt_min": -5.0,
        "dt_max": 5.0,
        "dt_step": 0.1,
        "epochs": 10000,
        "init_policy": "polarity-split",
        "jitter_sigma": 0.05,
        "noise_sigma": 0.25,
        "figure_mode": False,
        "seed": 42,
    },
    "fit": {
        "set_domain": [1.0, 5.0],
        "reset_domain": [-5.0, -1.0],
        "target": "mode",
    },
}


def default_config_dict() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def _merge_strict(defaults: dict, user: dict, path: str = "") -> dict:
    for key in user:
        if key not in defaults:
            raise ConfigurationError(f"unknown configuration key: {path}{key}")
    merged = {}
    for key, default_value in defaults.items():
        if key in user:
            value = user[key]
            if isinstance(default_value, dict):
                if not isinstance(value, dict):
                    raise ConfigurationError(f"configuration key {path}{key} must be an object")
                merged[key] = _merge_strict(default_value, value, f"{path}{key}.")
            else:
                merged[key] = copy.deepcopy(value)
        else:
            merged[key] = copy.deepcopy(default_value)
    return merged


def _as_float(tree: dict, section: str, key: str) -> float:
    value = tree[section][key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _as_int(tree: dict, section: str, key: str) -> int:
    value = tree[section][key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{section}.{key} must be an integer, got {value!r}")
    return value


def _as_bool(tree: dict, section: str, key: str) -> bool:
    value = tree[section][key]
    if not isinstance(value, bool):
        raise ConfigurationError(f"{section}.{key} must be true or false, got {value!r}")
    return value


def _as_domain(tree: dict, section: str, key: str) -> tuple[float, float]:
    value = tree[section][key]
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigurationError(f"{section}.{key} must be a [lo, hi] pair, got {value!r}")
    return (float(value[0]), float(value[1]))


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; `raw` is the effective tree echoed to run.json."""

    raw: dict

    @property
    def waveform_params(self) -> WaveformParams:
        return WaveformParams(
            a_plus=_as_float(self.raw, "waveform", "a_plus"),
            t_plus=_as_float(self.raw, "waveform", "t_plus"),
            a_minus=_as_float(self.raw, "waveform", "a_minus"),
            t_minus=_as_float(self.raw, "waveform", "t_minus"),
        )

    def build_waveform(self) -> SpikeWaveform:
        """The spike shape (the same shape serves the pre and post neurons)."""
        return make_default_waveform(self.waveform_params)

    @property
    def device_model(self) -> DeviceModel:
        return DeviceModel(
            v_th_set=_as_float(self.raw, "device", "v_th_set"),
            v_th_reset=_as_float(self.raw, "device", "v_th_reset"),
            sigma_set=_as_float(self.raw, "device", "sigma_set"),
            sigma_reset=_as_float(self.raw, "device", "sigma_reset"),
            r_on=_as_float(self.raw, "device", "r_on"),
            r_off=_as_float(self.raw, "device", "r_off"),
            gate_below_threshold=_as_bool(self.raw, "device", "gate_below_threshold"),
        )

    def build_synapse(self) -> CompoundSynapse:
        section = self.raw["synapse"]
        n = _as_int(self.raw, "synapse", "n")
        alphas = section["alphas"]
        delays = section["delays"]
        if alphas is not None:
            if not isinstance(alphas, (list, tuple)) or not alphas:
                raise ConfigurationError("synapse.alphas must be a non-empty list or null")
            if len(alphas) != n:
                raise ConfigurationError(
                    f"synapse.alphas has {len(alphas)} entries but synapse.n is {n}"
                )
            alpha_values = [float(a) for a in alphas]
        else:
            alpha_values = [
                b.alpha
                for b in make_linear_attenuators(
                    n,
                    _as_float(self.raw, "synapse", "alpha_min"),
                    _as_float(self.raw, "synapse", "alpha_max"),
                )
            ]
        if delays is None:
            delay_values = [0.0] * n
        else:
            if not isinstance(delays, (list, tuple)) or len(delays) != n:
                raise ConfigurationError(f"synapse.delays must be null or a list of {n} numbers")
            delay_values = [float(d) for d in delays]
        side = section["attenuate_side"]
        if not isinstance(side, str):
            raise ConfigurationError(f"synapse.attenuate_side must be a string, got {side!r}")
        branches = tuple(
            DendriticBranch(alpha=a, delay=d) for a, d in zip(alpha_values, delay_values)
        )
        return CompoundSynapse(
            branches=branches, device_model=self.device_model, attenuate_side=side
        )

    @property
    def protocol(self) -> StdpProtocol:
        policy = self.raw["protocol"]["init_policy"]
        if not isinstance(policy, str):
            raise ConfigurationError(f"protocol.init_policy must be a string, got {policy!r}")
        return StdpProtocol(
            dt_min=_as_float(self.raw, "protocol", "dt_min"),
            dt_max=_as_float(self.raw, "protocol", "dt_max"),
            dt_step=_as_float(self.raw, "protocol", "dt_step"),
            epochs=_as_int(self.raw, "protocol", "epochs"),
            init_policy=policy,
            jitter_sigma=_as_float(self.raw, "protocol", "jitter_sigma"),
            noise_sigma=_as_float(self.raw, "protocol", "noise_sigma"),
            figure_mode=_as_bool(self.raw, "protocol", "figure_mode"),
            seed=_as_int(self.raw, "protocol", "seed"),
        )

    @property
    def fit_options(self) -> FitOptions:
        target = self.raw["fit"]["target"]
        if not isinstance(target, str):
            raise ConfigurationError(f"fit.target must be a string, got {target!r}")
        return FitOptions(
            set_domain=_as_domain(self.raw, "fit", "set_domain"),
            reset_domain=_as_domain(self.raw, "fit", "reset_domain"),
            target=target,
        )

    def validate(self) -> "RunConfig":
        """Force-build every section so bad values fail fast."""
        self.build_waveform()
        self.build_synapse()
        self.protocol
        self.fit_options
        return self

    def flat_baseline(self) -> "RunConfig":
        """Same run with dendritic processing switched off (all alphas 1)."""
        raw = copy.deepcopy(self.raw)
        raw["synapse"]["alpha_min"] = 1.0
        raw["synapse"]["alpha_max"] = 1.0
        raw["synapse"]["alphas"] = None
        raw["synapse"]["delays"] = None
        return RunConfig(raw)

    def with_overrides(
        self,
        epochs: int | None = None,
        seed: int | None = None,
        figure_mode: bool | None = None,
    ) -> "RunConfig":
        raw = copy.deepcopy(self.raw)
        if epochs is not None:
            raw["protocol"]["epochs"] = epochs
        if seed is not None:
            raw["protocol"]["seed"] = seed
        if figure_mode is not None:
            raw["protocol"]["figure_mode"] = figure_mode
        return RunConfig(raw)


def config_from_dict(user: dict) -> RunConfig:
    if not isinstance(user, dict):
        raise ConfigurationError("configuration root must be a JSON object")
    return RunConfig(_merge_strict(DEFAULT_CONFIG, user)).validate()


def load_config(path: str | Path | None) -> RunConfig:
    """Load a config file, or the pure defaults when path is None.

    A run.json produced by an earlier run (recognised by its "config" key)
    is accepted as-is, which makes any run reproducible from its own echo.
    """
    if path is None:
        return config_from_dict({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return config_from_dict(data)
