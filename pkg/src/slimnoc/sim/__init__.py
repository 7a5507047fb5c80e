"""Cycle-level flit simulator."""

from .engine import (BufferPlan, CurvePoint, SetupError, SimConfig, SimReport, StallError,
                     buffer_sizes_for, curve_csv, find_saturation, link_latency, run, sweep,
                     zero_load_latency)
from .traffic import (PATTERNS, Trace, destination_table, gen_destination, load_trace,
                      make_trace, reverse, save_trace, shuffle)

__all__ = [
    "BufferPlan", "CurvePoint", "SetupError", "SimConfig", "SimReport", "StallError",
    "buffer_sizes_for", "curve_csv", "find_saturation", "link_latency", "run", "sweep",
    "zero_load_latency", "PATTERNS", "Trace", "destination_table", "gen_destination",
    "load_trace", "make_trace", "reverse", "save_trace", "shuffle",
]
