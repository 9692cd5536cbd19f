"""Service differentiation: data-based states and rate-based priorities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

N_DATA = 60
N_RATE = 60
BAND_WIDTH = 20
HIGH_THRESHOLD = 40


class PriorityError(ValueError):
    pass


class DataState(IntEnum):
    LOW = 0
    MIDDLE = 1
    HIGH = 2


@dataclass(frozen=True, slots=True)
class DataPriority:
    state: DataState
    number: int

    def __post_init__(self):
        lo = int(self.state) * BAND_WIDTH
        if not lo <= self.number < lo + BAND_WIDTH:
            raise PriorityError(f"{self.state.name} priority must lie in {lo}..{lo + BAND_WIDTH - 1}, got {self.number}")

    @property
    def base_importance(self) -> int:
        return self.number - int(self.state) * BAND_WIDTH

    @classmethod
    def from_number(cls, number: int) -> DataPriority:
        if not 0 <= number < N_DATA:
            raise PriorityError(f"data priority {number} outside 0..{N_DATA - 1}")
        return cls(DataState(number // BAND_WIDTH), number)


@dataclass(frozen=True, slots=True)
class RatePriority:
    value: float
    floor: float = 1.0
    ceiling: float = float(N_RATE - 1)

    def __post_init__(self):
        if not self.floor > 0:
            raise PriorityError("rate priority floor must be positive")
        if self.ceiling < self.floor:
            raise PriorityError("rate priority ceiling below floor")
        if not self.floor <= self.value <= self.ceiling:
            raise PriorityError(f"rate priority {self.value} outside [{self.floor}, {self.ceiling}]")


@dataclass(frozen=True, slots=True)
class SuperframeObservation:
    csma_hit_count: int = 0
    gts_hit_count: int = 0
    csma_attempted: bool = False
    gts_active: bool = False

    def __post_init__(self):
        if self.csma_hit_count < 0 or self.gts_hit_count < 0:
            raise PriorityError("hit counts cannot be negative")
        if (self.csma_hit_count > 0) != self.csma_attempted:
            raise PriorityError("a CSMA/CA hit is recorded exactly when the channel was attempted")
        if self.gts_hit_count > 0 and not self.gts_active:
            raise PriorityError("GTS hit without GTS activity")


@dataclass(frozen=True, slots=True)
class RateUpdateParams:
    lambda_csma_miss: float = 1.0
    lambda_gts_miss: float = 1.0
    lambda_csma_hit: float = 1.0
    lambda_gts_hit: float = 1.0
    hit_exponent_cap: int = 16

    def __post_init__(self):
        for name in ("lambda_csma_miss", "lambda_gts_miss", "lambda_csma_hit", "lambda_gts_hit"):
            if not getattr(self, name) > 0:
                raise PriorityError(f"{name} must be positive")
        if self.hit_exponent_cap < 0:
            raise PriorityError("hit_exponent_cap must be non-negative")


def transition_data_state(
    current: DataPriority,
    has_realtime_requirement: bool,
    has_exception: bool,
    base_importance: int,
) -> DataPriority:
    """Move a device between Low/Middle/High for the coming superframe.

    One active condition (real-time data *or* a data exception) puts the
    device in Middle, both put it in High, neither returns it to Low. The
    number keeps the device's static importance as its offset in the band.
    """
    if not 0 <= base_importance < BAND_WIDTH:
        raise PriorityError(f"base importance {base_importance} outside 0..{BAND_WIDTH - 1}")
    state = DataState(int(has_realtime_requirement) + int(has_exception))
    return DataPriority(state, int(state) * BAND_WIDTH + base_importance)


def rate_update_raw(prev: float, obs: SuperframeObservation, params: RateUpdateParams) -> float:
    """Unclamped rate priority after one superframe of feedback."""
    if not math.isfinite(prev):
        raise PriorityError(f"non-finite rate priority {prev!r}")
    if prev <= 0:
        raise PriorityError("rate priority must be positive before an update")
    cap = params.hit_exponent_cap
    value = prev
    if obs.csma_hit_count > 0:
        value += params.lambda_csma_hit / prev * 2.0 ** min(obs.csma_hit_count, cap)
    else:
        value -= params.lambda_csma_miss / prev
    if obs.gts_hit_count > 0:
        value += params.lambda_gts_hit / prev * 2.0 ** min(obs.gts_hit_count, cap)
    else:
        value -= params.lambda_gts_miss / prev
    return value


def update_rate_priority(prev: RatePriority, obs: SuperframeObservation, params: RateUpdateParams) -> RatePriority:
    raw = rate_update_raw(prev.value, obs, params)
    return RatePriority(min(max(raw, prev.floor), prev.ceiling), prev.floor, prev.ceiling)


def effective_priority(data: DataPriority, rate: RatePriority) -> float:
    if data.state is DataState.HIGH:
        return float(data.number)
    if data.state is DataState.MIDDLE:
        return math.sqrt(data.number * rate.value)
    return rate.value
