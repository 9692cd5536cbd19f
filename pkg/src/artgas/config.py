"""Flat ``dotted.key = value`` configuration files and scenario presets.

Example::

    # 20-device network, half the devices heavy
    scheme = artgas
    superframe.bo = 3
    traffic.n_heavy = 10
    device.3.class = heavy
    device.3.data_priority = 45

Blank lines and ``#`` comments are ignored; keys are case-insensitive.
Any key can be overridden from the environment as ``ARTGAS_<KEY>`` with
dots written as double underscores (``ARTGAS_SUPERFRAME__BO=4``).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Callable, Mapping

from .allocator import AllocationError, ThresholdParams
from .channel import ChannelError, LinkBudget, PathLossParams
from .engine import CapMode, CapModel, ConfigError, DeviceSpec, Scheme, SimConfig
from .priority import PriorityError, RateUpdateParams
from .superframe import SuperframeConfig, SuperframeError
from .traffic import ArrivalMode, TrafficClass, TrafficError, TrafficProfile

ENV_PREFIX = "ARTGAS_"

# wrapped as ConfigError so the CLI can map all of them to one exit code
_VALIDATION_ERRORS = (AllocationError, ChannelError, PriorityError, SuperframeError, TrafficError, ValueError)


@dataclass(frozen=True, slots=True)
class ScenarioPreset:
    name: str
    data_priority: int
    rate_priority: int


SCENARIOS = (
    ScenarioPreset("scenario1", 5, 10),
    ScenarioPreset("scenario2", 10, 10),
    ScenarioPreset("scenario3", 25, 15),
    ScenarioPreset("scenario4", 25, 20),
    ScenarioPreset("scenario5", 50, 10),
)


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _opt_float(v: str) -> float | None:
    return None if v.strip().lower() in ("", "none", "null") else float(v)


# key -> parser; device.<i>.* keys are handled separately
SCHEMA: dict[str, Callable[[str], object]] = {
    "scheme": lambda v: Scheme(v.strip().lower()),
    "seed": int,
    "duration_superframes": int,
    "scenario": lambda v: v.strip().lower(),
    "superframe.bo": int,
    "superframe.so": int,
    "superframe.symbol_rate": int,
    "superframe.base_superframe_symbols": int,
    "superframe.min_cap_symbols": int,
    "phy.data_rate_bps": float,
    "traffic.n_devices": int,
    "traffic.n_heavy": int,
    "traffic.chi_h": float,
    "traffic.chi_l": float,
    "traffic.frame_bytes": int,
    "traffic.buffer_size": int,
    "traffic.mode": lambda v: ArrivalMode(v.strip().lower()),
    "priority.initial_rate": float,
    "priority.floor": float,
    "priority.ceiling": float,
    "priority.base_importance": int,
    "priority.realtime_prob": float,
    "priority.exception_prob": float,
    "priority.lambda_csma_miss": float,
    "priority.lambda_gts_miss": float,
    "priority.lambda_csma_hit": float,
    "priority.lambda_gts_hit": float,
    "priority.hit_exponent_cap": int,
    "allocator.mu_m": float,
    "allocator.mu_l": float,
    "allocator.delta": float,
    "allocator.artgas_idle_limit": int,
    "allocator.explicit_dealloc": _bool,
    "cap.mode": lambda v: CapMode(v.strip().lower()),
    "cap.success_prob": float,
    "cap.backoff_exponent": int,
    "channel.coeff_d": float,
    "channel.coeff_f": float,
    "channel.offset": float,
    "channel.shadow_sigma_db": float,
    "channel.frequency": float,
    "channel.a": _opt_float,
    "channel.b": float,
    "channel.c": float,
    "channel.tx_power_dbm": float,
    "channel.sensitivity_dbm": float,
    "channel.distance_mm": float,
    "metrics.utilization": lambda v: v.strip().lower(),
}

DEVICE_KEYS: dict[str, Callable[[str], object]] = {
    "class": lambda v: TrafficClass(v.strip().lower()),
    "rate": float,
    "data_priority": int,
    "base_importance": int,
    "realtime_prob": float,
    "exception_prob": float,
    "initial_rate": float,
    "distance_mm": float,
    "stop_after_s": float,
}

DEFAULTS: dict[str, object] = {
    "scheme": Scheme.ARTGAS,
    "seed": 1,
    "duration_superframes": 1000,
    "scenario": "none",
    "superframe.bo": 3,
    "superframe.so": 3,
    "superframe.symbol_rate": 62_500,
    "superframe.base_superframe_symbols": 960,
    "superframe.min_cap_symbols": 440,
    "phy.data_rate_bps": 200_000.0,
    "traffic.n_devices": 20,
    "traffic.n_heavy": 5,
    "traffic.chi_h": 0.35,
    "traffic.chi_l": 0.15,
    "traffic.frame_bytes": 127,
    "traffic.buffer_size": 150,
    "traffic.mode": ArrivalMode.POISSON,
    "priority.initial_rate": 10.0,
    "priority.floor": 1.0,
    "priority.ceiling": 59.0,
    "priority.base_importance": 0,
    "priority.realtime_prob": 0.0,
    "priority.exception_prob": 0.0,
    "priority.lambda_csma_miss": 1.0,
    "priority.lambda_gts_miss": 1.0,
    "priority.lambda_csma_hit": 1.0,
    "priority.lambda_gts_hit": 1.0,
    "priority.hit_exponent_cap": 16,
    "allocator.mu_m": 0.5,
    "allocator.mu_l": 0.7,
    "allocator.delta": 0.9,
    "allocator.artgas_idle_limit": 1,
    "allocator.explicit_dealloc": False,
    "cap.mode": CapMode.IDEAL,
    "cap.success_prob": 1.0,
    "cap.backoff_exponent": 3,
    "channel.coeff_d": -27.6,
    "channel.coeff_f": -46.5,
    "channel.offset": 157.0,
    "channel.shadow_sigma_db": 4.12,
    "channel.frequency": 2400.0,
    "channel.a": None,
    "channel.b": 0.0,
    "channel.c": 0.0,
    "channel.tx_power_dbm": 0.0,
    "channel.sensitivity_dbm": -85.0,
    "channel.distance_mm": 500.0,
    "metrics.utilization": "allocated",
}

ALIASES = {
    "mu_m": "allocator.mu_m",
    "mu_l": "allocator.mu_l",
    "delta": "allocator.delta",
    "bo": "superframe.bo",
    "so": "superframe.so",
    "n_heavy": "traffic.n_heavy",
    "artgas_idle_limit": "allocator.artgas_idle_limit",
    "success_prob": "cap.success_prob",
}

_DEVICE_RE = re.compile(r"^device\.(\d+)\.([a-z_]+)$")


def canonical_key(key: str) -> str:
    k = key.strip().lower()
    return ALIASES.get(k, k)


def parse_value(key: str, raw: str) -> object:
    key = canonical_key(key)
    try:
        m = _DEVICE_RE.match(key)
        if m:
            field = m.group(2)
            if field not in DEVICE_KEYS:
                raise ConfigError(f"unknown device key {key!r}")
            return DEVICE_KEYS[field](raw)
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        return SCHEMA[key](raw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None


def parse_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        values[canonical_key(key)] = parse_value(key, raw)
    return values


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, object]:
    environ = os.environ if environ is None else environ
    out = {}
    for name, raw in sorted(environ.items()):
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].replace("__", ".").lower()
            out[canonical_key(key)] = parse_value(key, raw)
    return out


def load(path: str | None = None, overrides: Mapping[str, object] | None = None, environ: Mapping[str, str] | None = None) -> dict[str, object]:
    """Merge defaults, the file at ``path``, the environment, then ``overrides``."""
    values = dict(DEFAULTS)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_text(fh.read()))
    values.update(env_overrides(environ))
    if overrides:
        values.update({canonical_key(k): v for k, v in overrides.items()})
    return values


def scenario_of(device_id: int, values: Mapping[str, object]) -> int | None:
    """Priority scenario number (1-5) a device is pinned to, if any."""
    name = values["scenario"]
    if name == "table2":
        return device_id % len(SCENARIOS) + 1
    for i, preset in enumerate(SCENARIOS, 1):
        if name == preset.name:
            return i
    if name != "none":
        raise ConfigError(f"unknown scenario {name!r}")
    return None


def _device_overrides(values: Mapping[str, object]) -> dict[int, dict[str, object]]:
    out: dict[int, dict[str, object]] = {}
    for key, v in values.items():
        m = _DEVICE_RE.match(key)
        if m:
            out.setdefault(int(m.group(1)), {})[m.group(2)] = v
    return out


def build_devices(values: Mapping[str, object]) -> tuple[DeviceSpec, ...]:
    n = int(values["traffic.n_devices"])
    n_heavy = int(values["traffic.n_heavy"])
    if not 0 <= n_heavy <= n:
        raise ConfigError(f"traffic.n_heavy={n_heavy} must lie in 0..{n}")
    per_device = _device_overrides(values)
    unknown = [i for i in per_device if not 0 <= i < n]
    if unknown:
        raise ConfigError(f"device overrides for ids outside 0..{n - 1}: {unknown}")
    devices = []
    for i in range(n):
        ov = per_device.get(i, {})
        cls = ov.get("class", TrafficClass.HEAVY if i < n_heavy else TrafficClass.LIGHT)
        default_rate = values["traffic.chi_h"] if cls is TrafficClass.HEAVY else values["traffic.chi_l"]
        profile = TrafficProfile(cls, float(ov.get("rate", default_rate)), int(values["traffic.frame_bytes"]), values["traffic.mode"])
        common = dict(
            profile=profile,
            initial_rate=float(ov.get("initial_rate", values["priority.initial_rate"])),
            distance_mm=float(ov.get("distance_mm", values["channel.distance_mm"])),
            stop_after_s=ov.get("stop_after_s"),
        )
        scen = scenario_of(i, values)
        pd = ov.get("data_priority")
        if pd is None and scen is not None:
            preset = SCENARIOS[scen - 1]
            pd = preset.data_priority
            if "initial_rate" not in ov:
                common["initial_rate"] = float(preset.rate_priority)
        if pd is not None:
            spec = DeviceSpec.with_data_priority(i, int(pd), **common)
        else:
            spec = DeviceSpec(
                i,
                base_importance=int(ov.get("base_importance", values["priority.base_importance"])),
                realtime_prob=float(ov.get("realtime_prob", values["priority.realtime_prob"])),
                exception_prob=float(ov.get("exception_prob", values["priority.exception_prob"])),
                **common,
            )
        devices.append(spec)
    return tuple(devices)


def build(values: Mapping[str, object]) -> SimConfig:
    """Turn merged key/values into a validated :class:`SimConfig`."""
    try:
        sf = SuperframeConfig(
            beacon_order=int(values["superframe.bo"]),
            superframe_order=int(values["superframe.so"]),
            symbol_rate=int(values["superframe.symbol_rate"]),
            base_superframe_symbols=int(values["superframe.base_superframe_symbols"]),
            min_cap_symbols=int(values["superframe.min_cap_symbols"]),
        )
        path_loss = PathLossParams(
            coeff_d=values["channel.coeff_d"],
            coeff_f=values["channel.coeff_f"],
            offset=values["channel.offset"],
            shadow_sigma_db=values["channel.shadow_sigma_db"],
            frequency=values["channel.frequency"],
            a=values["channel.a"],
            b=values["channel.b"],
            c=values["channel.c"],
        )
        cap = CapModel(
            mode=values["cap.mode"],
            success_prob=float(values["cap.success_prob"]),
            budget=LinkBudget(values["channel.tx_power_dbm"], values["channel.sensitivity_dbm"]),
            path_loss=path_loss,
        )
        rate_params = RateUpdateParams(
            lambda_csma_miss=values["priority.lambda_csma_miss"],
            lambda_gts_miss=values["priority.lambda_gts_miss"],
            lambda_csma_hit=values["priority.lambda_csma_hit"],
            lambda_gts_hit=values["priority.lambda_gts_hit"],
            hit_exponent_cap=int(values["priority.hit_exponent_cap"]),
        )
        thresholds = ThresholdParams(
            mu_m=float(values["allocator.mu_m"]),
            mu_l=float(values["allocator.mu_l"]),
            delta=float(values["allocator.delta"]),
        )
        if values["metrics.utilization"] not in ("allocated", "total"):
            raise ConfigError("metrics.utilization must be 'allocated' or 'total'")
        return SimConfig(
            scheme=values["scheme"],
            superframe=sf,
            devices=build_devices(values),
            duration_superframes=int(values["duration_superframes"]),
            seed=int(values["seed"]),
            cap_model=cap,
            data_rate_bps=float(values["phy.data_rate_bps"]),
            queue_capacity=int(values["traffic.buffer_size"]),
            rate_params=rate_params,
            rate_floor=float(values["priority.floor"]),
            rate_ceiling=float(values["priority.ceiling"]),
            thresholds=thresholds,
            artgas_idle_limit=int(values["allocator.artgas_idle_limit"]),
            explicit_dealloc=bool(values["allocator.explicit_dealloc"]),
            backoff_exponent=int(values["cap.backoff_exponent"]),
        )
    except ConfigError:
        raise
    except _VALIDATION_ERRORS as exc:
        raise ConfigError(str(exc)) from exc
