"""Static minimal routing tables, VC assignment and channel-dependency checks."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .topo import Disconnected, Topology, distances


class InsufficientVCs(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RoutingTable:
    next_hop: np.ndarray  # [cur, dst] -> neighbor, -1 on the diagonal
    path_len: np.ndarray  # [src, dst] -> hops
    order: str = "index"

    @property
    def n_routers(self) -> int:
        return self.next_hop.shape[0]

    def path(self, s: int, d: int) -> list[int]:
        out = [s]
        while s != d:
            s = int(self.next_hop[s, d])
            out.append(s)
        return out

    def to_json(self) -> dict:
        return {"order": self.order, "next_hop": self.next_hop.tolist(),
                "path_len": self.path_len.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "RoutingTable":
        return cls(np.array(doc["next_hop"], dtype=np.int64),
                   np.array(doc["path_len"], dtype=np.int64), doc.get("order", "index"))


def _xy_key(t: Topology):
    # X moves first, then Y; inside a dimension, partition crossings first
    grid = t.grid

    def key(cur: int, nb: int):
        (c0, r0, p0), (c1, r1, p1) = grid[cur], grid[nb]
        return (0 if c0 != c1 else 1, 0 if p0 != p1 else 1, nb)
    return key


def default_order(t: Topology) -> str:
    return "index" if t.kind in ("sn",) or t.grid is None else "xy"


def build_tables(t: Topology, order: str | None = None) -> RoutingTable:
    """Shortest-path next hops.

    order="index": among equally short next hops take the smallest router
    number.  order="xy": dimension-ordered choice for grid baselines, router
    number breaking the remaining ties.
    """
    if order is None:
        order = default_order(t)
    dist = np.array(distances(t), dtype=np.int64)
    n = t.n_routers
    if order == "xy":
        key = _xy_key(t)
    elif order == "index":
        def key(cur, nb):
            return nb
    else:
        raise ValueError(f"unknown routing order {order!r}")
    nh = np.full((n, n), -1, dtype=np.int64)
    for cur in range(n):
        nbs = t.adj[cur]
        for d in range(n):
            if d == cur:
                continue
            want = dist[cur, d] - 1
            cands = [nb for nb in nbs if dist[nb, d] == want]
            nh[cur, d] = min(cands, key=lambda nb: key(cur, nb))
    nh.setflags(write=False)
    dist.setflags(write=False)
    return RoutingTable(nh, dist, order)


# -- virtual channels ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VcPolicy:
    scheme: str  # hop | xy | dateline | partition
    vc_count: int
    hop_vc: np.ndarray  # [src, dst, hop] -> vc

    @property
    def vc_of_hop(self) -> dict[int, int]:
        """Hop index -> VC when the scheme depends on the hop alone."""
        if self.scheme == "hop":
            return {h: h for h in range(self.hop_vc.shape[2])}
        if self.scheme == "xy":
            return {h: 0 for h in range(self.hop_vc.shape[2])}
        raise ValueError(f"scheme {self.scheme} is path dependent")

    def vcs(self, s: int, d: int, hops: int) -> list[int]:
        return [int(v) for v in self.hop_vc[s, d, :hops]]


def default_scheme(t: Topology) -> str:
    return {"cmesh": "xy", "torus": "dateline", "pfbf": "partition"}.get(t.kind, "hop")


def _dateline_vcs(t: Topology, path: list[int]) -> list[int]:
    rows, cols = t.params["rows"], t.params["cols"]
    out, crossed, last_dim = [], False, None
    for a, b in zip(path, path[1:]):
        (ca, ra, _), (cb, rb, _) = t.grid[a], t.grid[b]
        dim = 0 if ca != cb else 1
        if dim != last_dim:
            crossed, last_dim = False, dim
        size = cols if dim == 0 else rows
        pa, pb = (ca, cb) if dim == 0 else (ra, rb)
        # the wraparound link between size-1 and 0 is the dateline
        if size > 2 and {pa, pb} == {0, size - 1}:
            crossed = True
        out.append(1 if crossed else 0)
    return out


def _partition_vcs(t: Topology, path: list[int], vc_count: int) -> list[int]:
    out, crossings = [], 0
    for a, b in zip(path, path[1:]):
        out.append(min(crossings, vc_count - 1))
        if t.grid[a][2] != t.grid[b][2]:
            crossings += 1
    return out


def assign_vcs(t: Topology, tables: RoutingTable, vc_count: int,
               scheme: str | None = None) -> VcPolicy:
    if scheme is None:
        scheme = default_scheme(t)
    n = t.n_routers
    dmax = int(tables.path_len.max()) if n else 0
    need = {"hop": dmax, "xy": 1, "dateline": 2, "partition": 1}.get(scheme)
    if need is None:
        raise ValueError(f"unknown VC scheme {scheme!r}")
    if scheme == "dateline":
        r, c = t.params["rows"], t.params["cols"]
        need = 2 if max(r, c) > 2 else 1
    if vc_count < max(need, 1):
        raise InsufficientVCs(f"{scheme} policy needs {need} VCs, have {vc_count}")
    hv = np.zeros((n, n, max(dmax, 1)), dtype=np.int64)
    for s in range(n):
        for d in range(n):
            h = int(tables.path_len[s, d])
            if h == 0:
                continue
            if scheme == "hop":
                v = list(range(h))
            elif scheme == "xy":
                v = [0] * h
            elif scheme == "dateline":
                v = _dateline_vcs(t, tables.path(s, d))
            else:
                v = _partition_vcs(t, tables.path(s, d), vc_count)
            hv[s, d, :h] = v
    hv.setflags(write=False)
    return VcPolicy(scheme, vc_count, hv)


@dataclass(frozen=True)
class DeadlockVerdict:
    acyclic: bool
    channels: int
    dependencies: int
    cycle: tuple[tuple[int, int, int], ...] = ()  # (from, to, vc) channels


def channel_dependencies(t: Topology, tables: RoutingTable, policy: VcPolicy):
    deps: set[tuple[tuple[int, int, int], tuple[int, int, int]]] = set()
    chans: set[tuple[int, int, int]] = set()
    n = t.n_routers
    for s in range(n):
        for d in range(n):
            path = tables.path(s, d)
            vcs = policy.vcs(s, d, len(path) - 1)
            hops = [(a, b, v) for (a, b), v in zip(zip(path, path[1:]), vcs)]
            chans.update(hops)
            deps.update(zip(hops, hops[1:]))
    return chans, deps


def check_deadlock_free(t: Topology, tables: RoutingTable, policy: VcPolicy) -> DeadlockVerdict:
    chans, deps = channel_dependencies(t, tables, policy)
    succ: dict = {c: [] for c in chans}
    for a, b in deps:
        succ[a].append(b)
    # iterative DFS, colors: 0 new, 1 on stack, 2 done
    color = dict.fromkeys(chans, 0)
    for root in sorted(chans):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
            elif color[nxt] == 1:
                cyc = [s for s, _ in stack]
                cyc = cyc[cyc.index(nxt):]
                return DeadlockVerdict(False, len(chans), len(deps), tuple(cyc))
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
    return DeadlockVerdict(True, len(chans), len(deps))


def save_tables(tables: RoutingTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(tables.to_json(), fh)
        fh.write("\n")


def load_tables(path) -> RoutingTable:
    with open(path) as fh:
        return RoutingTable.from_json(json.load(fh))


def check_connected(t: Topology) -> None:
    distances(t)  # raises Disconnected


__all__ = ["Disconnected", "InsufficientVCs", "RoutingTable", "VcPolicy", "DeadlockVerdict",
           "build_tables", "assign_vcs", "check_deadlock_free", "channel_dependencies"]
