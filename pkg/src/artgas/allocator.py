"""Coordinator-side GTS bookkeeping and the two allocation policies.

``fcfs_*`` follow the standard behaviour (arrival-order grants and the
passive ``2n`` idle-superframe timeout); ``artgas_*`` rank requesters by
effective priority against per-state thresholds and reclaim unused slots
at the next beacon.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .priority import HIGH_THRESHOLD, DataState
from .superframe import MAX_GTS, NUM_SLOTS, CapCfpSplit, SuperframeConfig, cap_length_after

log = logging.getLogger(__name__)


class AllocationError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class GtsRequest:
    device_id: int
    arrival_superframe: int = 0
    desired_slots: int = 1
    is_deallocation: bool = False

    def __post_init__(self):
        if self.desired_slots != 1:
            raise AllocationError("each device may hold at most one GTS slot")


@dataclass(slots=True)
class GtsDescriptor:
    device_id: int
    start_slot: int
    length_slots: int = 1
    idle_superframes: int = 0


class GtsTable:
    """The coordinator's live descriptor list.

    Descriptors are kept in grant order and packed against the end of the
    active period, oldest grant last, whenever the set changes.
    """

    def __init__(self, descriptors: Iterable[GtsDescriptor] = ()):
        self._by_device: dict[int, GtsDescriptor] = {}
        for d in descriptors:
            if d.device_id in self._by_device:
                raise AllocationError(f"device {d.device_id} already holds a GTS")
            self._by_device[d.device_id] = d
        if self.slots_in_use > MAX_GTS:
            raise AllocationError("more than seven GTS slots")
        self._pack()

    def __len__(self):
        return len(self._by_device)

    def __contains__(self, device_id):
        return device_id in self._by_device

    def __iter__(self):
        return iter(self.descriptors)

    def __getitem__(self, device_id) -> GtsDescriptor:
        return self._by_device[device_id]

    @property
    def descriptors(self) -> list[GtsDescriptor]:
        return sorted(self._by_device.values(), key=lambda d: d.start_slot)

    @property
    def owners(self) -> list[int]:
        return list(self._by_device)

    @property
    def slots_in_use(self) -> int:
        return sum(d.length_slots for d in self._by_device.values())

    def split(self, config: SuperframeConfig) -> CapCfpSplit:
        return CapCfpSplit.for_cfp(self.slots_in_use, config)

    def grant(self, device_id: int, length_slots: int = 1) -> GtsDescriptor:
        if device_id in self._by_device:
            raise AllocationError(f"device {device_id} already holds a GTS")
        d = GtsDescriptor(device_id, start_slot=NUM_SLOTS, length_slots=length_slots)
        self._by_device[device_id] = d
        self._pack()
        return d

    def revoke(self, device_id: int) -> GtsDescriptor:
        d = self._by_device.pop(device_id)
        self._pack()
        return d

    def record_usage(self, usage: Mapping[int, bool]):
        """Advance idle counters from one superframe of CFP activity."""
        for d in self._by_device.values():
            if usage[d.device_id]:
                d.idle_superframes = 0
            else:
                d.idle_superframes += 1

    def _pack(self):
        end = NUM_SLOTS
        for d in self._by_device.values():
            end -= d.length_slots
            d.start_slot = end

    def check(self, config: SuperframeConfig):
        """Raise if the table breaks any structural guarantee."""
        taken: set[int] = set()
        split = self.split(config)
        for d in self._by_device.values():
            span = set(range(d.start_slot, d.start_slot + d.length_slots))
            if taken & span:
                raise AllocationError(f"overlapping descriptor for device {d.device_id}")
            if d.start_slot < split.cfp_start_slot or d.start_slot + d.length_slots > NUM_SLOTS:
                raise AllocationError(f"descriptor for device {d.device_id} outside the CFP")
            taken |= span
        if len(self._by_device) > MAX_GTS or self.slots_in_use > MAX_GTS:
            raise AllocationError("more than seven GTSs")
        if self._by_device and split.cap_symbols < config.min_cap_symbols:
            raise AllocationError("CAP shorter than aMinCAPLength")


@dataclass(slots=True)
class AllocationResult:
    grants: list[GtsDescriptor] = field(default_factory=list)
    rejects: list[int] = field(default_factory=list)
    released: list[int] = field(default_factory=list)
    ignored: list[int] = field(default_factory=list)


def _has_room(table: GtsTable, config: SuperframeConfig, slots: int = 1) -> bool:
    return cap_length_after(table.split(config), config, slots).feasible


def _release(requests: Sequence[GtsRequest], table: GtsTable, result: AllocationResult) -> list[GtsRequest]:
    """Honour deallocation requests; return the remaining allocation requests."""
    rest = []
    for req in requests:
        if not req.is_deallocation:
            rest.append(req)
        elif req.device_id in table:
            table.revoke(req.device_id)
            result.released.append(req.device_id)
    return rest


def fcfs_allocate(pending: Sequence[GtsRequest], table: GtsTable, config: SuperframeConfig) -> AllocationResult:
    """Grant requests in arrival order while the superframe has capacity."""
    result = AllocationResult()
    for req in _release(pending, table, result):
        if req.device_id in table:
            log.debug("device %d already holds a GTS; request ignored", req.device_id)
            result.ignored.append(req.device_id)
        elif _has_room(table, config, req.desired_slots):
            result.grants.append(table.grant(req.device_id, req.desired_slots))
        else:
            result.rejects.append(req.device_id)
    return result


def dealloc_timeout_superframes(beacon_order: int) -> int:
    """Idle superframes (2n) after which the coordinator drops a GTS."""
    if not 0 <= beacon_order <= 14:
        raise AllocationError(f"BO={beacon_order} outside 0..14")
    n = 2 ** (8 - beacon_order) if beacon_order <= 8 else 1
    return 2 * n


def fcfs_deallocate_expired(table: GtsTable, config: SuperframeConfig) -> list[int]:
    limit = dealloc_timeout_superframes(config.beacon_order)
    expired = [d.device_id for d in table if d.idle_superframes >= limit]
    for device_id in expired:
        table.revoke(device_id)
    return expired


def compute_threshold(priorities: Sequence[float], mu: float, delta: float, bo: int) -> float:
    """Minimum effective priority for a GTS grant in one state.

    ``mu * sum(sqrt(p**2)) / (N * delta**bo)`` over every device in the PAN.
    """
    n = len(priorities)
    if n == 0:
        raise AllocationError("threshold needs at least one device")
    if not mu > 0:
        raise AllocationError("mu must be positive")
    if not 0 < delta <= 1:
        raise AllocationError("delta must lie in (0, 1]")
    return mu * sum(abs(p) for p in priorities) / (n * delta**bo)


@dataclass(frozen=True, slots=True)
class Thresholds:
    low: float
    middle: float
    high: float = float(HIGH_THRESHOLD)

    def for_state(self, state: DataState) -> float:
        if state is DataState.HIGH:
            return self.high
        if state is DataState.MIDDLE:
            return self.middle
        return self.low


@dataclass(frozen=True, slots=True)
class ThresholdParams:
    # mu/delta**BO must stay below 1 at the operating BO, otherwise a crowd
    # of backlogged devices can never all clear the bar and starves forever
    mu_m: float = 0.5
    mu_l: float = 0.7
    delta: float = 0.9

    def __post_init__(self):
        if not (self.mu_m > 0 and self.mu_l > 0):
            raise AllocationError("mu_M and mu_L must be positive")
        if not 0 < self.delta <= 1:
            raise AllocationError("delta must lie in (0, 1]")
        if not self.mu_l > self.mu_m:
            raise AllocationError("mu_L must exceed mu_M")

    def thresholds(self, priorities: Sequence[float], bo: int) -> Thresholds:
        return Thresholds(
            low=compute_threshold(priorities, self.mu_l, self.delta, bo),
            middle=compute_threshold(priorities, self.mu_m, self.delta, bo),
        )


@dataclass(frozen=True, slots=True)
class Candidate:
    device_id: int
    state: DataState
    priority: float
    is_deallocation: bool = False


def artgas_allocate(
    candidates: Sequence[Candidate],
    thresholds: Thresholds,
    table: GtsTable,
    config: SuperframeConfig,
) -> AllocationResult:
    """Filter by state threshold, then grant by decreasing priority."""
    result = AllocationResult()
    for c in candidates:
        if c.is_deallocation and c.device_id in table:
            table.revoke(c.device_id)
            result.released.append(c.device_id)
    eligible = []
    for c in candidates:
        if c.is_deallocation:
            continue
        if c.device_id in table:
            log.debug("device %d already holds a GTS; request ignored", c.device_id)
            result.ignored.append(c.device_id)
        elif c.priority >= thresholds.for_state(c.state):
            eligible.append(c)
        else:
            result.rejects.append(c.device_id)
    eligible.sort(key=lambda c: (-c.priority, c.device_id))
    for c in eligible:
        if _has_room(table, config):
            result.grants.append(table.grant(c.device_id))
        else:
            result.rejects.append(c.device_id)
    return result


def artgas_reclaim(table: GtsTable, last_superframe_usage: Mapping[int, bool], idle_limit: int = 1) -> list[int]:
    """Take back every GTS left unused for ``idle_limit`` superframes.

    Idle counters must already include the superframe described by
    ``last_superframe_usage`` (see :meth:`GtsTable.record_usage`).
    """
    revoked = [
        d.device_id
        for d in table
        if not last_superframe_usage[d.device_id] and d.idle_superframes >= idle_limit
    ]
    for device_id in revoked:
        table.revoke(device_id)
    return revoked
