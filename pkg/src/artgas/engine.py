"""Discrete-event superframe simulator.

One run is a single-threaded event loop over integer symbol times. Every
beacon closes the previous superframe: priorities are updated (ART-GAS),
expired or unused GTSs are revoked, the requests delivered during the last
CAP are allocated, and the new CFP layout is scheduled. Between beacons,
frame arrivals enqueue traffic, devices without a GTS send one GTS request
per superframe in the CAP, and GTS owners drain their queues in their slot.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, NamedTuple

import numpy as np

from . import allocator as alloc
from .channel import LinkBudget, PathLossParams, cap_frame_received, path_loss_db, shadow
from .metrics import MetricsLedger
from .priority import (
    DataPriority,
    DataState,
    RatePriority,
    RateUpdateParams,
    SuperframeObservation,
    effective_priority,
    transition_data_state,
    update_rate_priority,
)
from .superframe import SuperframeConfig, derive_timing
from .traffic import DeviceQueue, Frame, TrafficProfile, enqueue, next_arrival

log = logging.getLogger(__name__)

UNIT_BACKOFF_SYMBOLS = 20
DEFAULT_BACKOFF_EXPONENT = 3


class ConfigError(ValueError):
    pass


class Scheme(str, Enum):
    FCFS = "fcfs"
    ARTGAS = "artgas"


class CapMode(str, Enum):
    IDEAL = "ideal"
    BERNOULLI = "bernoulli"
    BUDGET = "budget"


@dataclass(frozen=True, slots=True)
class CapModel:
    mode: CapMode = CapMode.IDEAL
    success_prob: float = 1.0
    budget: LinkBudget = LinkBudget()
    path_loss: PathLossParams = PathLossParams()

    def __post_init__(self):
        if not 0.0 <= self.success_prob <= 1.0:
            raise ConfigError("success_prob must lie in [0, 1]")


@dataclass(frozen=True, slots=True)
class DeviceSpec:
    device_id: int
    profile: TrafficProfile = TrafficProfile()
    base_importance: int = 0
    realtime_prob: float = 0.0
    exception_prob: float = 0.0
    initial_rate: float = 10.0
    distance_mm: float = 500.0
    stop_after_s: float | None = None

    def __post_init__(self):
        if not 0 <= self.base_importance <= 19:
            raise ConfigError(f"device {self.device_id}: base importance outside 0..19")
        for p in (self.realtime_prob, self.exception_prob):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"device {self.device_id}: marker probability {p} outside [0, 1]")

    @classmethod
    def with_data_priority(cls, device_id: int, data_priority: int, **kw) -> DeviceSpec:
        """Pin a device to the band of ``data_priority`` for the whole run."""
        dp = DataPriority.from_number(data_priority)
        return cls(
            device_id,
            base_importance=dp.base_importance,
            realtime_prob=1.0 if dp.state >= DataState.MIDDLE else 0.0,
            exception_prob=1.0 if dp.state is DataState.HIGH else 0.0,
            **kw,
        )


@dataclass(frozen=True, slots=True)
class SimConfig:
    scheme: Scheme = Scheme.ARTGAS
    superframe: SuperframeConfig = SuperframeConfig()
    devices: tuple[DeviceSpec, ...] = ()
    duration_superframes: int = 1000
    seed: int = 1
    cap_model: CapModel = CapModel()
    data_rate_bps: float = 200_000.0
    queue_capacity: int = 150
    rate_params: RateUpdateParams = RateUpdateParams()
    rate_floor: float = 1.0
    rate_ceiling: float = 59.0
    thresholds: alloc.ThresholdParams = alloc.ThresholdParams()
    artgas_idle_limit: int = 1
    explicit_dealloc: bool = False
    backoff_exponent: int = DEFAULT_BACKOFF_EXPONENT

    def __post_init__(self):
        if not 0 <= self.backoff_exponent <= 8:
            raise ConfigError("backoff_exponent must lie in 0..8")
        if self.duration_superframes < 1:
            raise ConfigError("duration must be at least one superframe")
        if not self.devices:
            raise ConfigError("at least one device is required")
        ids = [d.device_id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate device ids")
        if self.data_rate_bps <= 0:
            raise ConfigError("data rate must be positive")
        if self.queue_capacity < 1:
            raise ConfigError("queue capacity must be at least one frame")
        if self.artgas_idle_limit < 1:
            raise ConfigError("artgas_idle_limit must be at least 1")
        if not 0 < self.rate_floor <= self.rate_ceiling:
            raise ConfigError("rate priority bounds must satisfy 0 < floor <= ceiling")
        for d in self.devices:
            if not self.rate_floor <= d.initial_rate <= self.rate_ceiling:
                raise ConfigError(f"device {d.device_id}: initial rate priority outside bounds")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


class EventKind(IntEnum):
    # tie order at equal times
    BEACON = 0
    FRAME_ARRIVAL = 1
    CAP_REQUEST_ATTEMPT = 2
    CFP_SLOT_START = 3
    SIM_END = 4


class SimEvent(NamedTuple):
    time: int
    kind: EventKind
    seq: int
    payload: Any = None


class CapOutcome(NamedTuple):
    delivered: bool
    attempted: bool


class Stream(IntEnum):
    ARRIVALS = 0
    CAP = 1
    MARKERS = 2


def device_rng(seed: int, device_id: int, stream: Stream) -> np.random.Generator:
    """Counter-based stream keyed on (seed, device, purpose)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(device_id, int(stream)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(slots=True)
class DeviceState:
    spec: DeviceSpec
    queue: DeviceQueue
    data: DataPriority
    rate: RatePriority
    arrivals_rng: np.random.Generator
    cap_rng: np.random.Generator
    marker_rng: np.random.Generator
    clock_s: float = 0.0
    csma_hits: int = 0
    gts_hits: int = 0
    gts_active: bool = False
    requested_this_sf: bool = False
    request_since: int | None = None
    dealloc_pending: bool = False

    @property
    def device_id(self) -> int:
        return self.spec.device_id

    def observation(self) -> SuperframeObservation:
        return SuperframeObservation(self.csma_hits, self.gts_hits, self.csma_hits > 0, self.gts_active)


def cap_attempt(device: DeviceState, cap_model: CapModel, rng: np.random.Generator) -> CapOutcome:
    """One CSMA/CA access in the CAP; the attempt itself is what counts as a hit."""
    if cap_model.mode is CapMode.IDEAL:
        return CapOutcome(True, True)
    if cap_model.mode is CapMode.BERNOULLI:
        return CapOutcome(bool(rng.random() < cap_model.success_prob), True)
    pl = path_loss_db(device.spec.distance_mm, cap_model.path_loss.frequency, cap_model.path_loss, shadow(cap_model.path_loss, rng))
    return CapOutcome(cap_frame_received(pl, cap_model.budget), True)


def slot_capacity_frames(slot_seconds: float, data_rate_bps: float, frame_bytes: int) -> int:
    # tolerance absorbs float error when the slot holds an exact number of frames
    return math.floor(slot_seconds * data_rate_bps / (8 * frame_bytes) + 1e-9)


def cfp_transmit(queue: DeviceQueue, slot_capacity: int) -> list[Frame]:
    """Dequeue what fits in one GTS; CFP transmissions never fail."""
    sent = []
    while queue and len(sent) < slot_capacity:
        sent.append(queue.popleft())
    return sent


@dataclass(slots=True)
class _PendingRequest:
    device_id: int
    since: int
    delivered_at: int
    is_deallocation: bool = False


@dataclass(slots=True)
class TraceEntry:
    time: int
    kind: str
    device_id: int | None = None
    detail: Any = None


class Simulator:
    def __init__(self, config: SimConfig, trace: bool = False, record_frames: bool = False):
        self.config = config
        self.timing = derive_timing(config.superframe)
        self.sym_rate = config.superframe.symbol_rate
        self.table = alloc.GtsTable()
        self.trace: list[TraceEntry] | None = [] if trace else None
        self.ledger = MetricsLedger(frames=[] if record_frames else None)
        self._events: list[SimEvent] = []
        self._seq = 0
        self._frame_id = 0
        self._superframe = -1
        self._pending: list[_PendingRequest] = []
        self._usage: dict[int, bool] = {}
        self._cap_window = (0, 0)
        self.end_time = config.duration_superframes * self.timing.bi_symbols
        self.devices: dict[int, DeviceState] = {}
        for spec in config.devices:
            dp = DataPriority(DataState.LOW, spec.base_importance)
            self.devices[spec.device_id] = DeviceState(
                spec=spec,
                queue=DeviceQueue(config.queue_capacity),
                data=dp,
                rate=RatePriority(spec.initial_rate, config.rate_floor, config.rate_ceiling),
                arrivals_rng=device_rng(config.seed, spec.device_id, Stream.ARRIVALS),
                cap_rng=device_rng(config.seed, spec.device_id, Stream.CAP),
                marker_rng=device_rng(config.seed, spec.device_id, Stream.MARKERS),
            )
            self.ledger.device(spec.device_id)

    # -- event plumbing -------------------------------------------------
    def _push(self, time: int, kind: EventKind, payload=None):
        heapq.heappush(self._events, SimEvent(time, kind, self._seq, payload))
        self._seq += 1

    def _note(self, time, kind, device_id=None, detail=None):
        if self.trace is not None:
            self.trace.append(TraceEntry(time, kind, device_id, detail))

    def _seconds(self, symbols: float) -> float:
        return symbols / self.sym_rate

    def _schedule_arrival(self, dev: DeviceState):
        dev.clock_s = next_arrival(dev.spec.profile, dev.clock_s, dev.arrivals_rng)
        # round up to the symbol grid, ignoring float noise below a microsymbol
        t = math.ceil(dev.clock_s * self.sym_rate - 1e-6)
        stop = dev.spec.stop_after_s
        if stop is not None and dev.clock_s > stop:
            return
        if t < self.end_time:
            self._push(t, EventKind.FRAME_ARRIVAL, dev.device_id)

    def _backoff(self, dev: DeviceState) -> int:
        be = self.config.backoff_exponent
        if be == 0:
            return 0
        return int(dev.cap_rng.integers(0, 2**be)) * UNIT_BACKOFF_SYMBOLS

    def _maybe_request(self, dev: DeviceState, now: int):
        """Queue a CAP access if the device needs one and the CAP is still open."""
        if dev.requested_this_sf:
            return
        if dev.device_id in self.table:
            if not dev.dealloc_pending:
                return
        elif not dev.queue:
            return
        start, end = self._cap_window
        t = max(now, start) + self._backoff(dev)
        if t < end:
            dev.requested_this_sf = True
            self._push(t, EventKind.CAP_REQUEST_ATTEMPT, dev.device_id)

    # -- main loop --------------------------------------------------------
    def run(self) -> MetricsLedger:
        for dev in self.devices.values():
            self._schedule_arrival(dev)
        self._push(0, EventKind.BEACON)
        handlers = {
            EventKind.BEACON: self._on_beacon,
            EventKind.FRAME_ARRIVAL: self._on_arrival,
            EventKind.CAP_REQUEST_ATTEMPT: self._on_cap_request,
            EventKind.CFP_SLOT_START: self._on_cfp_slot,
        }
        while self._events:
            ev = heapq.heappop(self._events)
            if ev.kind is EventKind.SIM_END:
                self._on_end(ev.time)
                break
            handlers[ev.kind](ev)
        return self.ledger

    def _on_arrival(self, ev: SimEvent):
        dev = self.devices[ev.payload]
        frame = Frame(self._frame_id, dev.device_id, ev.time)
        self._frame_id += 1
        self.ledger.generated(dev.device_id)
        if not enqueue(dev.queue, frame):
            self.ledger.dropped(dev.device_id)
            self._note(ev.time, "drop", dev.device_id, frame.frame_id)
        else:
            self._note(ev.time, "arrival", dev.device_id, frame.frame_id)
        self._schedule_arrival(dev)
        self._maybe_request(dev, ev.time)

    def _on_cap_request(self, ev: SimEvent):
        dev = self.devices[ev.payload]
        outcome = cap_attempt(dev, self.config.cap_model, dev.cap_rng)
        dev.csma_hits += 1
        dev.gts_active = True
        dealloc = dev.dealloc_pending
        self._note(ev.time, "dealloc_request" if dealloc else "gts_request", dev.device_id, outcome.delivered)
        if not outcome.delivered:
            return
        if dealloc:
            dev.dealloc_pending = False
        else:
            dev.gts_hits += 1
            if dev.request_since is None:
                dev.request_since = self._superframe
        self._pending.append(_PendingRequest(dev.device_id, dev.request_since or 0, ev.time, dealloc))

    def _on_cfp_slot(self, ev: SimEvent):
        dev_id, capacity = ev.payload
        dev = self.devices[dev_id]
        sent = cfp_transmit(dev.queue, capacity)
        airtime = 8 * dev.spec.profile.frame_bytes / self.config.data_rate_bps
        for j, frame in enumerate(sent):
            gen_s = self._seconds(frame.generated_at)
            tx_s = self._seconds(ev.time) + j * airtime
            self.ledger.delivered(dev_id, gen_s, tx_s, tx_s + airtime)
        used = bool(sent)
        self._usage[dev_id] = used
        self.ledger.cfp_slot(dev_id, used)
        dev.gts_active = True
        if used:
            dev.gts_hits += 1
        elif self.config.explicit_dealloc:
            dev.dealloc_pending = True
        self._note(ev.time, "cfp_slot", dev_id, len(sent))

    def _on_beacon(self, ev: SimEvent):
        cfg = self.config
        k = self._superframe = self._superframe + 1
        now = ev.time
        if k > 0:
            self.table.record_usage({d: self._usage.get(d, False) for d in self.table.owners})
        if cfg.scheme is Scheme.ARTGAS:
            self._update_priorities(first=(k == 0))
            allocation = self._artgas_beacon()
        else:
            allocation = self._fcfs_beacon()
        for d in allocation.grants:
            self.devices[d.device_id].request_since = None
        for dev_id in allocation.released:
            self.devices[dev_id].dealloc_pending = False
        self._pending.clear()
        self._usage.clear()
        self.table.check(cfg.superframe)
        self._note(now, "beacon", None, tuple((d.device_id, d.start_slot) for d in self.table))

        for dev in self.devices.values():
            dev.csma_hits = dev.gts_hits = 0
            dev.gts_active = dev.device_id in self.table
            dev.requested_this_sf = False
            if dev.device_id in self.table:
                dev.request_since = None

        slot = self.timing.slot_symbols
        split = self.table.split(cfg.superframe)
        self._cap_window = (now + slot, now + split.cfp_start_slot * slot)
        slot_s = self._seconds(slot)
        for d in self.table:
            prof = self.devices[d.device_id].spec.profile
            capacity = slot_capacity_frames(slot_s * d.length_slots, cfg.data_rate_bps, prof.frame_bytes)
            self._push(now + d.start_slot * slot, EventKind.CFP_SLOT_START, (d.device_id, capacity))
        for dev in self.devices.values():
            self._maybe_request(dev, now)
        nxt = now + self.timing.bi_symbols
        if k + 1 < cfg.duration_superframes:
            self._push(nxt, EventKind.BEACON)
        else:
            self._push(nxt, EventKind.SIM_END)

    def _update_priorities(self, first: bool):
        cfg = self.config
        for dev in self.devices.values():
            realtime = bool(dev.marker_rng.random() < dev.spec.realtime_prob)
            exception = bool(dev.marker_rng.random() < dev.spec.exception_prob)
            dev.data = transition_data_state(dev.data, realtime, exception, dev.spec.base_importance)
            if not first:
                dev.rate = update_rate_priority(dev.rate, dev.observation(), cfg.rate_params)

    def _artgas_beacon(self) -> alloc.AllocationResult:
        cfg = self.config
        usage = {d: self._usage.get(d, False) for d in self.table.owners}
        reclaimed = alloc.artgas_reclaim(self.table, usage, cfg.artgas_idle_limit)
        for dev_id in reclaimed:
            self._note(self._now_beacon(), "reclaim", dev_id)
        prio = {d.device_id: effective_priority(d.data, d.rate) for d in self.devices.values()}
        thresholds = cfg.thresholds.thresholds(list(prio.values()), cfg.superframe.beacon_order)
        candidates = [
            alloc.Candidate(p.device_id, self.devices[p.device_id].data.state, prio[p.device_id], p.is_deallocation)
            for p in self._pending
        ]
        result = alloc.artgas_allocate(candidates, thresholds, self.table, cfg.superframe)
        result.released.extend(reclaimed)
        return result

    def _fcfs_beacon(self) -> alloc.AllocationResult:
        cfg = self.config
        expired = alloc.fcfs_deallocate_expired(self.table, cfg.superframe)
        for dev_id in expired:
            self._note(self._now_beacon(), "expire", dev_id)
        order = sorted(self._pending, key=lambda p: (not p.is_deallocation, p.since, p.delivered_at, p.device_id))
        requests = [alloc.GtsRequest(p.device_id, p.since, is_deallocation=p.is_deallocation) for p in order]
        result = alloc.fcfs_allocate(requests, self.table, cfg.superframe)
        result.released.extend(expired)
        return result

    def _now_beacon(self) -> int:
        return self._superframe * self.timing.bi_symbols

    def _on_end(self, now: int):
        self.ledger.n_superframes = self.config.duration_superframes
        self.ledger.horizon_s = self._seconds(now)
        self.ledger.frames_in_queues = sum(len(d.queue) for d in self.devices.values())
        self._note(now, "end")


def run(config: SimConfig, trace: bool = False, record_frames: bool = False) -> MetricsLedger:
    return Simulator(config, trace=trace, record_frames=record_frames).run()
