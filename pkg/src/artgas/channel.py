"""On-body path loss with log-normal shadowing and a CAP link budget.

The body-surface model is ``coeff_d*log10(d) + coeff_f*log10(f) + offset + Q``
with ``Q ~ N(0, sigma^2)`` in dB. With the stock coefficients the printed
formula is negative; the link budget uses its magnitude as attenuation.
Distances are in millimetres and frequencies in MHz by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ChannelError(ValueError):
    pass


D_MIN_MM = 150.0
D_MAX_MM = 1000.0


@dataclass(frozen=True, slots=True)
class PathLossParams:
    coeff_d: float = -27.6
    coeff_f: float = -46.5
    offset: float = 157.0
    shadow_sigma_db: float = 4.12
    frequency: float = 2400.0
    # generic narrow-band form a*log10(d) + b + c + N; unused unless a is set
    a: float | None = None
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.shadow_sigma_db < 0:
            raise ChannelError("shadowing sigma must be non-negative")
        if self.frequency <= 0:
            raise ChannelError("frequency must be positive")


@dataclass(frozen=True, slots=True)
class LinkBudget:
    tx_power_dbm: float = 0.0
    sensitivity_dbm: float = -85.0

    def __post_init__(self):
        if not self.tx_power_dbm > self.sensitivity_dbm:
            raise ChannelError("transmit power must exceed receiver sensitivity")

    @property
    def margin_db(self) -> float:
        return self.tx_power_dbm - self.sensitivity_dbm


def path_loss_db(d_mm: float, f: float, params: PathLossParams = PathLossParams(), shadow_draw: float = 0.0) -> float:
    if d_mm <= 0 or f <= 0:
        raise ChannelError("distance and frequency must be positive")
    if not D_MIN_MM <= d_mm <= D_MAX_MM:
        raise ChannelError(f"distance {d_mm} mm outside the {D_MIN_MM:g}-{D_MAX_MM:g} mm validity range")
    return params.coeff_d * math.log10(d_mm) + params.coeff_f * math.log10(f) + params.offset + shadow_draw


def narrowband_path_loss_db(d_mm: float, params: PathLossParams, shadow_draw: float = 0.0) -> float:
    """Generic ``a*lg(d) + b + c + N`` form, for configured fits such as 400 MHz."""
    if params.a is None:
        raise ChannelError("narrow-band coefficients are not configured")
    if d_mm <= 0:
        raise ChannelError("distance must be positive")
    return params.a * math.log10(d_mm) + params.b + params.c + shadow_draw


def shadow(params: PathLossParams, rng: np.random.Generator) -> float:
    if params.shadow_sigma_db == 0:
        return 0.0
    return float(rng.normal(0.0, params.shadow_sigma_db))


def cap_frame_received(pl_db: float, budget: LinkBudget) -> bool:
    return budget.tx_power_dbm - abs(pl_db) >= budget.sensitivity_dbm
