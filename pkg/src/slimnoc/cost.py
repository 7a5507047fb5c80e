"""Wire-length and buffer-size cost models."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .layout import Layout, layout_subgr
from .topo import Topology, slim_noc, sn_params


@dataclass(frozen=True)
class BufferParams:
    b_over_L: float = 1.0  # flits per cycle
    vc: int = 2
    H: int = 1
    cb_size: int = 20

    def __post_init__(self):
        if self.b_over_L <= 0:
            raise ValueError("b_over_L must be positive")
        if self.vc < 1:
            raise ValueError("need at least one virtual channel")
        if self.H < 1:
            raise ValueError("H must be >= 1")
        if self.cb_size < 0:
            raise ValueError("central buffer size must be >= 0")


def rtt_for_distance(dist: int, H: int) -> int:
    # two router cycles, one serialization cycle
    return 2 * math.ceil(dist / H) + 3


def rtt(i: int, j: int, layout: Layout, H: int) -> int:
    return rtt_for_distance(layout.distance(i, j), H)


def buffer_for_distance(dist: int, params: BufferParams) -> int:
    return math.ceil(rtt_for_distance(dist, params.H) * params.b_over_L * params.vc)


def edge_buffer_size(i: int, j: int, layout: Layout, params: BufferParams) -> int:
    return buffer_for_distance(layout.distance(i, j), params)


def avg_wire_length(t: Topology, layout: Layout) -> float:
    if not t.edges:
        return 0.0
    return sum(layout.distance(i, j) for i, j in t.edges) / len(t.edges)


def total_edge_buffers(t: Topology, layout: Layout, params: BufferParams) -> int:
    # one buffer at each end of every link
    return 2 * sum(edge_buffer_size(i, j, layout, params) for i, j in t.edges)


def uniform_edge_buffer(t: Topology, layout: Layout, params: BufferParams,
                        mode: str | int = "max") -> int:
    """Single buffer size for every port: network min, max, or an explicit value."""
    sizes = [edge_buffer_size(i, j, layout, params) for i, j in t.edges]
    if mode == "min":
        return min(sizes)
    if mode == "max":
        return max(sizes)
    if isinstance(mode, int):
        return mode
    raise ValueError(f"unknown uniform buffer mode {mode!r}")


def total_central_buffers(n_routers: int, k_net: int, params: BufferParams) -> int:
    return n_routers * (params.cb_size + 2 * k_net * params.vc)


def cost_report(t: Topology, layout: Layout, params: BufferParams) -> dict:
    per_edge = []
    for i, j in t.edges:
        d = layout.distance(i, j)
        per_edge.append({"i": i, "j": j, "dist": d, "T": rtt_for_distance(d, params.H),
                         "delta": buffer_for_distance(d, params)})
    return {
        "layout": layout.kind,
        "M": avg_wire_length(t, layout),
        "delta_eb": total_edge_buffers(t, layout, params),
        "delta_cb": total_central_buffers(t.n_routers, t.k_net, params),
        "per_edge": per_edge,
    }


def scaling_envelope(q_range, p: int = 1, layout=layout_subgr) -> list[dict]:
    """(N, M, M / cbrt(N)) per q; N counts routers times concentration."""
    rows = []
    for q in q_range:
        cfg = sn_params(q, p)
        t = slim_noc(q, p)
        m = avg_wire_length(t, layout(t))
        rows.append({"q": q, "N": cfg.N, "M": m, "ratio": m / cfg.N ** (1 / 3)})
    return rows


def envelope_band(rows: list[dict]) -> float:
    ratios = [r["ratio"] for r in rows]
    return max(ratios) / min(ratios)
