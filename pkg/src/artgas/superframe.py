"""Beacon-enabled superframe timing.

All durations are integer symbol counts; seconds only appear in the
values returned for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

NUM_SLOTS = 16
MAX_GTS = 7


class SuperframeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SuperframeConfig:
    beacon_order: int = 3
    superframe_order: int = 3
    symbol_rate: int = 62_500
    base_superframe_symbols: int = 960
    min_cap_symbols: int = 440
    num_slots: int = NUM_SLOTS

    def __post_init__(self):
        bo, so = self.beacon_order, self.superframe_order
        if not (0 <= bo <= 14 and 0 <= so <= 14):
            raise SuperframeError(f"orders must lie in 0..14 (BO={bo}, SO={so})")
        if so > bo:
            raise SuperframeError(f"SO={so} exceeds BO={bo}")
        if self.num_slots != NUM_SLOTS:
            raise SuperframeError("the active period always has 16 slots")
        if self.symbol_rate <= 0 or self.base_superframe_symbols <= 0:
            raise SuperframeError("symbol rate and base superframe length must be positive")
        if self.base_superframe_symbols % NUM_SLOTS:
            raise SuperframeError("base superframe length must divide into 16 slots")

    @property
    def sd_symbols(self) -> int:
        return self.base_superframe_symbols << self.superframe_order

    @property
    def bi_symbols(self) -> int:
        return self.base_superframe_symbols << self.beacon_order

    @property
    def slot_symbols(self) -> int:
        return self.sd_symbols // NUM_SLOTS


@dataclass(frozen=True, slots=True)
class Timing:
    sd_symbols: int
    bi_symbols: int
    slot_symbols: int
    sd_seconds: float
    bi_seconds: float

    @property
    def inactive_symbols(self) -> int:
        return self.bi_symbols - self.sd_symbols


def derive_timing(config: SuperframeConfig) -> Timing:
    sd = config.sd_symbols
    bi = config.bi_symbols
    return Timing(
        sd_symbols=sd,
        bi_symbols=bi,
        slot_symbols=config.slot_symbols,
        sd_seconds=sd / config.symbol_rate,
        bi_seconds=bi / config.symbol_rate,
    )


@dataclass(frozen=True, slots=True)
class CapCfpSplit:
    """Boundary between the contention and contention-free periods.

    The beacon owns slot 0, the CAP runs over slots ``1 .. cfp_start_slot-1``
    and the CFP fills the remaining slots up to the end of the active period.
    """

    cfp_start_slot: int
    cfp_slots: int
    cap_symbols: int

    def __post_init__(self):
        if not 0 <= self.cfp_slots <= MAX_GTS:
            raise SuperframeError(f"CFP cannot hold {self.cfp_slots} slots")
        if self.cfp_start_slot + self.cfp_slots != NUM_SLOTS:
            raise SuperframeError("CFP must end at the last slot of the active period")

    @classmethod
    def for_cfp(cls, cfp_slots: int, config: SuperframeConfig) -> CapCfpSplit:
        start = NUM_SLOTS - cfp_slots
        return cls(start, cfp_slots, (start - 1) * config.slot_symbols)


@dataclass(frozen=True, slots=True)
class CapCheck:
    cap_symbols: int
    feasible: bool


def cap_length_after(split: CapCfpSplit, config: SuperframeConfig, extra_slots: int) -> CapCheck:
    """CAP length if ``extra_slots`` more CFP slots were granted."""
    if extra_slots < 0:
        raise SuperframeError("extra_slots must be non-negative")
    total = split.cfp_slots + extra_slots
    # slot 0 carries the beacon and never counts towards the CAP
    cap = (NUM_SLOTS - 1 - total) * config.slot_symbols
    if extra_slots == 0:
        return CapCheck(split.cap_symbols, True)
    return CapCheck(cap, total <= MAX_GTS and cap >= config.min_cap_symbols)
