"""Simulation configuration, buffer sizing and the run/sweep drivers."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..cost import BufferParams, avg_wire_length, buffer_for_distance
from ..layout import Layout, make_layout
from ..route import RoutingTable, VcPolicy, assign_vcs, build_tables, check_deadlock_free
from ..topo import Topology
from . import kernel as K
from .traffic import PATTERNS, Trace, destination_table, load_trace

BUFFERINGS = ("EB-Small", "EB-Large", "EB-Var-S", "EB-Var-N", "EL-Links")
INJECTION_QUEUE = 20
REPLY_FLITS = 6
# router clock per topology family, ns
CYCLE_NS = {"sn": 0.5, "pfbf": 0.5, "torus": 0.4, "cmesh": 0.4, "fbf": 0.6}


class SetupError(RuntimeError):
    pass


class StallError(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


def _cbr_size(buffering: str) -> int | None:
    m = re.fullmatch(r"CBR-(\d+)", buffering)
    return int(m.group(1)) if m else None


@dataclass
class SimConfig:
    topology: Topology
    layout: Layout | None = None
    tables: RoutingTable | None = None
    policy: VcPolicy | None = None
    router_kind: str | None = None  # edge | central, derived from buffering
    buffering: str = "EB-Var-N"
    vc: int = 2
    packet_flits: int = 6
    injection_rate: float = 0.1
    pattern: str = "RND"
    H: int = 1
    warmup_cycles: int = 1000
    measure_cycles: int = 10000
    seed: int = 1
    link_mode: str = "exact"
    stall_bound: int = 50_000
    drain_cycles: int = 50_000
    trace: Trace | str | None = None
    replies: bool = False
    cycle_ns: float | None = None
    record_packets: int = 0
    source_queue: int = 64
    debug: bool = False

    def __post_init__(self):
        if not 0.0 <= self.injection_rate <= 1.0:
            raise ValueError("injection_rate must be in [0, 1]")
        if self.measure_cycles < 1:
            raise ValueError("measure_cycles must be >= 1")
        if not 1 <= self.packet_flits < K.FM:
            raise ValueError(f"packet_flits must be in [1, {K.FM})")
        if self.warmup_cycles < 0:
            raise ValueError("warmup_cycles must be >= 0")
        if self.H < 1:
            raise ValueError("H must be >= 1")
        if self.vc < 1:
            raise ValueError("need at least one VC")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.link_mode not in ("exact", "avg"):
            raise ValueError("link_mode is exact or avg")
        cb = _cbr_size(self.buffering)
        if cb is None and self.buffering not in BUFFERINGS:
            raise ValueError(f"unknown buffering {self.buffering!r}")
        kind = "central" if cb is not None else "edge"
        if self.router_kind is None:
            self.router_kind = kind
        elif self.router_kind != kind:
            raise ValueError(f"{self.buffering} needs a {kind} router")
        if self.pattern == "TRACE" and self.trace is None:
            raise ValueError("TRACE pattern needs a trace")
        if self.layout is None:
            self.layout = make_layout(self.topology)
        if self.tables is None:
            self.tables = build_tables(self.topology)
        if self.policy is None:
            self.policy = assign_vcs(self.topology, self.tables, self.vc)
        if self.cycle_ns is None:
            self.cycle_ns = CYCLE_NS.get(self.topology.kind, 0.5)

    def describe(self) -> dict:
        t = self.topology
        return {
            "topology": t.name, "kind": t.kind, "routers": t.n_routers, "nodes": t.n_nodes,
            "layout": self.layout.kind, "routing": self.tables.order,
            "vc_scheme": self.policy.scheme, "router_kind": self.router_kind,
            "buffering": self.buffering, "vc": self.vc, "packet_flits": self.packet_flits,
            "injection_rate": self.injection_rate, "pattern": self.pattern, "H": self.H,
            "warmup_cycles": self.warmup_cycles, "measure_cycles": self.measure_cycles,
            "seed": self.seed, "link_mode": self.link_mode, "stall_bound": self.stall_bound,
            "replies": self.replies, "cycle_ns": self.cycle_ns,
        }

    def with_rate(self, rate: float) -> "SimConfig":
        d = dict(self.__dict__)
        d["injection_rate"] = rate
        return SimConfig(**d)


# -- buffers ------------------------------------------------------------------

@dataclass(frozen=True)
class BufferPlan:
    per_port: dict  # (i, j) directed link -> flits at j's input
    per_vc: dict    # (i, j) -> flits per VC
    central: int    # CB capacity per router, 0 for edge routers
    staging: int    # per-VC staging flits on each side of a CB router
    injection: int
    elastic: bool   # links store flits (elastic / ElastiStore style)


def link_distances(config: SimConfig) -> dict:
    t, lay = config.topology, config.layout
    if config.link_mode == "avg":
        m = avg_wire_length(t, lay)
        return {(i, j): m for a, b in t.edges for i, j in ((a, b), (b, a))}
    return {(i, j): lay.distance(i, j) for a, b in t.edges for i, j in ((a, b), (b, a))}


def link_latency(dist: float, H: int) -> int:
    return max(1, math.ceil(dist / H))


def buffer_sizes_for(config: SimConfig) -> BufferPlan:
    dists = link_distances(config)
    v = config.vc
    cb = _cbr_size(config.buffering)
    per_port, per_vc = {}, {}
    for key, d in dists.items():
        if config.buffering == "EB-Small":
            n = 5 * v
        elif config.buffering == "EB-Large":
            n = 15 * v
        elif config.buffering in ("EB-Var-S", "EB-Var-N"):
            H = 9 if config.buffering == "EB-Var-S" else 1
            n = buffer_for_distance(math.ceil(d), BufferParams(vc=v, H=H))
        else:  # CBR-x and EL-Links keep one flit per VC at the input
            n = v
        per_port[key] = n
        per_vc[key] = max(1, math.ceil(n / v))
    return BufferPlan(per_port, per_vc, cb or 0, 1 if cb is not None else 0, INJECTION_QUEUE,
                      elastic=cb is not None or config.buffering == "EL-Links")


# -- report -------------------------------------------------------------------

@dataclass
class SimReport:
    config: dict
    avg_packet_latency: float
    avg_latency_ns: float
    max_packet_latency: int
    avg_hops: float
    throughput: float
    offered: float
    injected_packets: int
    ejected_packets: int
    measured_packets: int
    measured_ejected: int
    dropped: int
    in_flight_at_end: int
    cycles: int
    zero_load_latency: float
    saturation_flag: bool
    stalled: bool
    bypass_traversals: int = 0
    buffered_traversals: int = 0
    conservation_errors: int = 0
    pattern_meta: dict = field(default_factory=dict)
    packets: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        if not d["packets"]:
            d.pop("packets")
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


# -- setup --------------------------------------------------------------------

def _arrays(config: SimConfig, plan: BufferPlan, dists: dict):
    t = config.topology
    n, p, V = t.n_routers, t.p, config.vc
    adj = t.adj
    ip_router, ip_link, ip_node, caps = [], [], [], []
    op_router, op_link, op_node = [], [], []
    r_ip_start, r_op_start = [0], [0]
    link_index = {}
    links = []
    for i in range(n):
        for j in adj[i]:
            link_index[(i, j)] = len(links)
            links.append((i, j))
    in_port, out_port = {}, {}
    node_inj = np.zeros(t.n_nodes, np.int64)
    node_ej = np.zeros(t.n_nodes, np.int64)
    for r in range(n):
        for j in adj[r]:
            in_port[(j, r)] = len(ip_router)
            ip_router.append(r)
            ip_link.append(link_index[(j, r)])
            ip_node.append(-1)
            caps.append([plan.per_vc[(j, r)]] * V)
        for k in range(p):
            nd = r * p + k
            node_inj[nd] = len(ip_router)
            ip_router.append(r)
            ip_link.append(-1)
            ip_node.append(nd)
            caps.append([plan.injection] + [0] * (V - 1))
        r_ip_start.append(len(ip_router))
        for j in adj[r]:
            out_port[(r, j)] = len(op_router)
            op_router.append(r)
            op_link.append(link_index[(r, j)])
            op_node.append(-1)
        for k in range(p):
            nd = r * p + k
            node_ej[nd] = len(op_router)
            op_router.append(r)
            op_link.append(-1)
            op_node.append(nd)
        r_op_start.append(len(op_router))
    link_op = np.array([out_port[lk] for lk in links], np.int64)
    link_ip = np.array([in_port[lk] for lk in links], np.int64)
    link_lat = np.array([link_latency(dists[lk], config.H) for lk in links], np.int64)
    route_op = np.full((n, n), -1, np.int64)
    nh = config.tables.next_hop
    for r in range(n):
        for d in range(n):
            if r != d:
                route_op[r, d] = out_port[(r, int(nh[r, d]))]
    a = lambda x: np.asarray(x, np.int64)  # noqa: E731
    return dict(
        ip_router=a(ip_router), ip_link=a(ip_link), ip_node=a(ip_node),
        ip_cap=np.array(caps, np.int64).reshape(len(ip_router), V), r_ip_start=a(r_ip_start),
        op_router=a(op_router), op_link=a(op_link), op_node=a(op_node), r_op_start=a(r_op_start),
        link_op=link_op, link_ip=link_ip, link_lat=link_lat, route_op=route_op,
        node_inj_ip=node_inj, node_eject_op=node_ej,
    )


def zero_load_latency(config: SimConfig, src: int | None = None, dst: int | None = None) -> float:
    """Analytic unloaded latency: per hop 2 router cycles plus ceil(d/H) link
    cycles, plus packet_flits - 1 for serialization.  Averages over all
    distinct node pairs when no pair is given."""
    t, tb = config.topology, config.tables
    dists = link_distances(config)
    F = config.packet_flits

    def one(s, d):
        path = tb.path(t.router_of(s), t.router_of(d))
        return sum(2 + link_latency(dists[(a, b)], config.H) for a, b in zip(path, path[1:])) + F - 1

    if src is not None:
        return float(one(src, dst))
    n, p = t.n_routers, t.p
    per_router = np.zeros((n, n))
    for r in range(n):
        for d in range(n):
            per_router[r, d] = one(r * p, d * p)
    nn = t.n_nodes
    total = per_router.sum() * p * p - n * p * (F - 1)  # drop self pairs
    return float(total / (nn * (nn - 1))) if nn > 1 else float(F - 1)


def _trace_of(config: SimConfig) -> Trace:
    tr = config.trace
    if isinstance(tr, Trace):
        return tr
    return load_trace(tr)


def run(config: SimConfig, raise_on_stall: bool = True, verify: bool = True) -> SimReport:
    """Simulate one configuration.  ``verify=False`` skips the channel
    dependency check, which is only useful to provoke deadlocks on purpose."""
    t = config.topology
    if verify:
        verdict = check_deadlock_free(t, config.tables, config.policy)
        if not verdict.acyclic:
            raise SetupError(f"channel dependency cycle: {verdict.cycle[:6]}")
    if config.policy.vc_count > config.vc:
        raise SetupError("VC policy uses more VCs than configured")
    plan = buffer_sizes_for(config)
    dists = link_distances(config)
    arr = _arrays(config, plan, dists)
    F = config.packet_flits
    z = np.zeros(0, np.int64)
    trace = (z, z, z, z, z)
    kind = 0
    dst_table = np.zeros(1, np.int64)
    if config.pattern == "TRACE":
        tr = _trace_of(config)
        if len(tr) and (tr.flits.max() >= K.FM or tr.flits.min() < 1):
            raise ValueError("trace packet sizes must be in [1, 64)")
        if len(tr) and (max(tr.src.max(), tr.dst.max()) >= t.n_nodes or min(tr.src.min(), tr.dst.min()) < 0):
            raise ValueError("trace node id out of range")
        trace = (tr.cycle, tr.src, tr.dst, tr.flits, tr.kind)
        kind = 2
    else:
        tab = destination_table(config.pattern, t)
        if tab is not None:
            dst_table, kind = tab, 1
    hop_vc = np.ascontiguousarray(config.policy.hop_vc, dtype=np.int64)
    prob = config.injection_rate / F
    stats, rec = K.run_kernel(
        t.n_routers, t.n_nodes, config.vc, t.p,
        arr["ip_router"], arr["ip_link"], arr["ip_node"], arr["ip_cap"], arr["r_ip_start"],
        arr["op_router"], arr["op_link"], arr["op_node"], arr["r_op_start"],
        arr["link_op"], arr["link_ip"], arr["link_lat"],
        arr["route_op"], hop_vc, arr["node_inj_ip"], arr["node_eject_op"],
        plan.elastic, plan.central > 0, max(plan.central, 1),
        kind, dst_table, prob, F,
        *trace, config.replies, REPLY_FLITS,
        config.warmup_cycles, config.measure_cycles, config.drain_cycles, config.stall_bound,
        config.seed, config.source_queue, config.debug, config.record_packets,
    )
    s = [int(x) for x in stats]
    nn = t.n_nodes
    meas = config.measure_cycles
    lat = s[K.S_LAT_SUM] / s[K.S_EJ_MEAS] if s[K.S_EJ_MEAS] else float("nan")
    thr = s[K.S_FLITS_ACC] / (nn * meas)
    offered = s[K.S_FLITS_OFF] / (nn * meas)
    zl = zero_load_latency(config)
    sat = bool(
        s[K.S_EJ_MEAS] < s[K.S_GEN_MEAS]
        or (offered > 0 and thr < 0.9 * offered)
        or (s[K.S_EJ_MEAS] and lat > 5 * zl)
        or s[K.S_STALL]
    )
    meta = {"pattern": config.pattern}
    if config.pattern in ("ADV1", "ADV2", "SHF", "REV"):
        meta["fixed_destinations"] = True
    if config.pattern == "TRACE":
        meta["trace_records"] = int(len(trace[0]))
        meta["replies_generated"] = s[K.S_REPLIES]
    rep = SimReport(
        config=config.describe(),
        avg_packet_latency=lat,
        avg_latency_ns=lat * config.cycle_ns,
        max_packet_latency=s[K.S_LAT_MAX],
        avg_hops=s[K.S_HOP_SUM] / s[K.S_EJ_MEAS] if s[K.S_EJ_MEAS] else float("nan"),
        throughput=thr,
        offered=offered,
        injected_packets=s[K.S_PKT_GEN],
        ejected_packets=s[K.S_PKT_EJ],
        measured_packets=s[K.S_GEN_MEAS],
        measured_ejected=s[K.S_EJ_MEAS],
        dropped=s[K.S_DROPPED],
        in_flight_at_end=s[K.S_LIVE],
        cycles=s[K.S_END],
        zero_load_latency=zl,
        saturation_flag=sat,
        stalled=bool(s[K.S_STALL]),
        bypass_traversals=s[K.S_BYPASS],
        buffered_traversals=s[K.S_CBPATH],
        conservation_errors=s[K.S_CONS_ERR],
        pattern_meta=meta,
        packets=[dict(zip(("src", "dst", "gen", "eject", "hops", "flits"), map(int, r)))
                 for r in rec],
    )
    if rep.stalled and raise_on_stall:
        raise StallError(f"no progress for {config.stall_bound} cycles (cycle {s[K.S_STALL_CYCLE]})", rep)
    return rep


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    rate: float
    latency_cycles: float
    latency_ns: float
    throughput: float
    saturated: bool


def _point(rep: SimReport) -> CurvePoint:
    return CurvePoint(rep.config["injection_rate"], rep.avg_packet_latency, rep.avg_latency_ns,
                      rep.throughput, rep.saturation_flag)


def _run_point(config: SimConfig) -> CurvePoint:
    return _point(run(config))


def sweep(config: SimConfig, rates, workers: int = 1) -> list[CurvePoint]:
    """One run per rate.  Runs are independent, so they may go to a process pool."""
    rates = list(rates)
    if any(b < a for a, b in zip(rates, rates[1:])):
        raise ValueError("rates must be ascending")
    cfgs = [config.with_rate(r) for r in rates]
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_run_point, cfgs))
    return [_run_point(c) for c in cfgs]


def curve_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rate", "latency_cycles", "latency_ns", "throughput", "saturated"])
    for pt in points:
        w.writerow([f"{pt.rate:.6g}", f"{pt.latency_cycles:.6f}", f"{pt.latency_ns:.6f}",
                    f"{pt.throughput:.6f}", int(pt.saturated)])
    return buf.getvalue()


def find_saturation(config: SimConfig, lo: float = 0.0, hi: float = 1.0,
                    tol: float = 0.01) -> tuple[float, float]:
    """Bisect the injection rate at which the run first saturates.

    Returns (highest unsaturated rate, its accepted throughput)."""
    best = (lo, 0.0)
    top = run(config.with_rate(hi), raise_on_stall=False)
    if not top.saturation_flag:
        return hi, top.throughput
    while hi - lo > tol:
        mid = (lo + hi) / 2
        rep = run(config.with_rate(mid), raise_on_stall=False)
        if rep.saturation_flag:
            hi = mid
        else:
            lo = mid
            best = (mid, rep.throughput)
    return best
