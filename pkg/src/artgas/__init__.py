"""Beacon-enabled IEEE 802.15.4 superframe simulator comparing FCFS GTS
allocation with the adaptive, priority-driven ART-GAS scheme."""

from .engine import CapMode, CapModel, DeviceSpec, Scheme, SimConfig, run
from .metrics import MetricsLedger, summarize

__version__ = "0.1.0"

__all__ = ["CapMode", "CapModel", "DeviceSpec", "MetricsLedger", "Scheme", "SimConfig", "run", "summarize"]
