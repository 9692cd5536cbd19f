"""Run accumulators and the S/D/W/B summary."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple


class MetricsError(ValueError):
    pass


class FrameRecord(NamedTuple):
    device_id: int
    generated_s: float
    tx_start_s: float
    received_s: float


@dataclass(slots=True)
class Counters:
    frames_generated: int = 0
    frames_delivered: int = 0
    frames_dropped: int = 0
    sum_delay_s: float = 0.0
    sum_wait_s: float = 0.0
    cfp_slots_allocated: int = 0
    cfp_slots_used: int = 0

    def merge(self, other: Counters):
        self.frames_generated += other.frames_generated
        self.frames_delivered += other.frames_delivered
        self.frames_dropped += other.frames_dropped
        self.sum_delay_s += other.sum_delay_s
        self.sum_wait_s += other.sum_wait_s
        self.cfp_slots_allocated += other.cfp_slots_allocated
        self.cfp_slots_used += other.cfp_slots_used


@dataclass(slots=True)
class MetricsLedger:
    """Streaming totals plus a per-device breakdown.

    ``frames`` holds one :class:`FrameRecord` per delivered frame when the
    run was asked to keep them.
    """

    n_superframes: int = 0
    horizon_s: float = 0.0
    totals: Counters = field(default_factory=Counters)
    per_device: dict[int, Counters] = field(default_factory=dict)
    frames_in_queues: int = 0
    frames: list[FrameRecord] | None = None

    def device(self, device_id: int) -> Counters:
        c = self.per_device.get(device_id)
        if c is None:
            c = self.per_device[device_id] = Counters()
        return c

    def generated(self, device_id: int):
        self.totals.frames_generated += 1
        self.device(device_id).frames_generated += 1

    def dropped(self, device_id: int):
        self.totals.frames_dropped += 1
        self.device(device_id).frames_dropped += 1

    def delivered(self, device_id: int, generated_s: float, tx_start_s: float, received_s: float):
        wait = tx_start_s - generated_s
        delay = received_s - generated_s
        for c in (self.totals, self.device(device_id)):
            c.frames_delivered += 1
            c.sum_wait_s += wait
            c.sum_delay_s += delay
        if self.frames is not None:
            self.frames.append(FrameRecord(device_id, generated_s, tx_start_s, received_s))

    def cfp_slot(self, device_id: int, used: bool):
        for c in (self.totals, self.device(device_id)):
            c.cfp_slots_allocated += 1
            c.cfp_slots_used += used

    def subset(self, device_ids: Iterable[int]) -> Counters:
        out = Counters()
        for d in device_ids:
            if d in self.per_device:
                out.merge(self.per_device[d])
        return out

    # keep attribute access to the totals short for callers
    def __getattr__(self, name):
        if name in Counters.__dataclass_fields__:
            return getattr(self.totals, name)
        raise AttributeError(name)


@dataclass(frozen=True, slots=True)
class Summary:
    success_prob: float | None
    avg_delay_s: float | None
    avg_wait_s: float | None
    bandwidth_util: float | None


def success_probability(counters: Counters | MetricsLedger, gamma: float, horizon_s: float) -> float:
    """Delivered throughput over offered load."""
    if not horizon_s > 0:
        raise MetricsError("horizon must be positive")
    if not gamma > 0:
        raise MetricsError("offered load must be positive")
    return counters.frames_delivered / horizon_s / gamma


def summarize(
    counters: Counters | MetricsLedger,
    gamma: float | None = None,
    horizon_s: float | None = None,
    utilization: str = "allocated",
    n_superframes: int | None = None,
) -> Summary:
    """S, D, W and B; any quantity with an empty denominator is ``None``.

    ``utilization="allocated"`` divides used CFP slots by allocated ones;
    ``"total"`` divides by all 16 slots of every superframe.
    """
    if isinstance(counters, MetricsLedger):
        horizon_s = counters.horizon_s if horizon_s is None else horizon_s
        n_superframes = counters.n_superframes if n_superframes is None else n_superframes
        counters = counters.totals
    s = None
    if gamma and horizon_s:
        s = success_probability(counters, gamma, horizon_s)
    n = counters.frames_delivered
    d = counters.sum_delay_s / n if n else None
    w = counters.sum_wait_s / n if n else None
    if utilization == "allocated":
        denom = counters.cfp_slots_allocated
    elif utilization == "total":
        denom = 16 * (n_superframes or 0)
    else:
        raise MetricsError(f"unknown utilization mode {utilization!r}")
    b = counters.cfp_slots_used / denom if denom else None
    return Summary(s, d, w, b)


def summarize_records(records: Iterable[FrameRecord]) -> tuple[float | None, float | None]:
    """Mean delay and mean wait recomputed from raw frame records."""
    records = list(records)
    if not records:
        return None, None
    n = len(records)
    return (
        sum(r.received_s - r.generated_s for r in records) / n,
        sum(r.tx_start_s - r.generated_s for r in records) / n,
    )
