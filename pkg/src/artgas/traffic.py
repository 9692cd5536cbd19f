"""Frame arrivals, offered load and bounded device queues."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

CHI_HEAVY = 0.35
CHI_LIGHT = 0.15
MAX_FRAME_BYTES = 127


class TrafficError(ValueError):
    pass


class TrafficClass(str, Enum):
    HEAVY = "heavy"
    LIGHT = "light"


class ArrivalMode(str, Enum):
    POISSON = "poisson"
    PERIODIC = "periodic"


@dataclass(frozen=True, slots=True)
class TrafficProfile:
    cls: TrafficClass = TrafficClass.LIGHT
    rate: float = CHI_LIGHT
    frame_bytes: int = MAX_FRAME_BYTES
    mode: ArrivalMode = ArrivalMode.POISSON

    def __post_init__(self):
        if not self.rate > 0:
            raise TrafficError(f"arrival rate must be positive, got {self.rate}")
        if not 0 < self.frame_bytes <= MAX_FRAME_BYTES:
            raise TrafficError(f"frame size {self.frame_bytes} outside 1..{MAX_FRAME_BYTES} bytes")

    @classmethod
    def heavy(cls, rate: float = CHI_HEAVY, **kw) -> TrafficProfile:
        return cls(TrafficClass.HEAVY, rate, **kw)

    @classmethod
    def light(cls, rate: float = CHI_LIGHT, **kw) -> TrafficProfile:
        return cls(TrafficClass.LIGHT, rate, **kw)


def offered_load(n_devices: int, n_heavy: int, chi_h: float = CHI_HEAVY, chi_l: float = CHI_LIGHT) -> float:
    """Aggregate arrival rate Γ in frames per second."""
    if not 0 <= n_heavy <= n_devices:
        raise TrafficError(f"n_heavy={n_heavy} must lie in 0..{n_devices}")
    return n_heavy * chi_h + (n_devices - n_heavy) * chi_l


def exponential_gap(rate: float, u: float) -> float:
    """Inverse-CDF exponential gap for a uniform draw ``u`` in (0, 1]."""
    return -math.log(u) / rate


def next_arrival(profile: TrafficProfile, now: float, rng: np.random.Generator) -> float:
    if not math.isfinite(now):
        raise TrafficError("current time must be finite")
    if profile.mode is ArrivalMode.PERIODIC:
        return now + 1.0 / profile.rate
    # 1 - U maps [0, 1) onto (0, 1] so the log stays finite
    return now + exponential_gap(profile.rate, 1.0 - rng.random())


@dataclass(slots=True)
class Frame:
    frame_id: int
    device_id: int
    generated_at: int  # symbols since start


@dataclass(slots=True)
class DeviceQueue:
    capacity: int = 150
    entries: deque = field(default_factory=deque)
    dropped: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise TrafficError("queue capacity must be at least one frame")

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def popleft(self) -> Frame:
        return self.entries.popleft()


def enqueue(queue: DeviceQueue, frame: Frame) -> bool:
    """Append ``frame`` unless the buffer is full; a refused frame is counted as dropped."""
    if len(queue.entries) >= queue.capacity:
        queue.dropped += 1
        return False
    queue.entries.append(frame)
    return True
