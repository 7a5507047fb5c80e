"""Slim NoC graphs and the baseline topologies they are compared against.

Routers are numbered from 0 internally.  The 1-based index of a Slim NoC
router labeled [G|a,b] is G*q^2 + (a-1)*q + b, so its internal number is that
index minus one.  Node n (0-based) attaches to router n // p.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .ff import FieldTable, GeneratorSets, field_u, find_generator, generator_sets, make_field, prime_power


class InvalidQ(ValueError):
    pass


class InvalidU(ValueError):
    pass


class ConstructionInvalid(RuntimeError):
    pass


class Disconnected(ValueError):
    pass


@dataclass(frozen=True)
class SnConfig:
    q: int
    u: int
    w: int
    k_net: int
    p: int
    k: int
    N_r: int
    N: int
    kappa: int
    special: bool = False  # q = 2 has no integer w; kept because it is a valid 8-router design


def sn_params(q: int, p: int) -> SnConfig:
    if prime_power(q) is None:
        raise InvalidQ(f"q={q} is not a prime power")
    if p < 1:
        raise ValueError("concentration p must be >= 1")
    special = q == 2
    u = field_u(q)
    if not special and (q - u) % 4:
        raise InvalidU(f"no u in (-1, 0, 1) gives q={q} = 4w + u")
    w = (q - u) // 4
    k_net = (3 * q - u) // 2
    n_r = 2 * q * q
    return SnConfig(q=q, u=u, w=w, k_net=k_net, p=p, k=k_net + p, N_r=n_r,
                    N=n_r * p, kappa=p - k_net // 2, special=special)


@dataclass(frozen=True)
class RouterLabel:
    G: int
    a: int
    b: int

    def index(self, q: int) -> int:
        return self.G * q * q + (self.a - 1) * q + self.b

    @classmethod
    def from_index(cls, i: int, q: int) -> "RouterLabel":
        g, rest = divmod(i - 1, q * q)
        a, b = divmod(rest, q)
        return cls(g, a + 1, b + 1)

    def __str__(self) -> str:
        return f"[{self.G}|{self.a},{self.b}]"


@dataclass(frozen=True, eq=False)
class Topology:
    name: str
    kind: str  # sn | torus | cmesh | fbf | pfbf
    n_routers: int
    edges: tuple[tuple[int, int], ...]  # sorted, i < j
    p: int
    labels: tuple[RouterLabel, ...] | None = None
    # natural grid position (col, row, partition) for baselines, used for
    # dimension-ordered routing and the default baseline layout
    grid: tuple[tuple[int, int, int], ...] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in range(self.n_routers)]
        for i, j in self.edges:
            if i == j:
                raise ValueError("self loop")
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        return self._adj  # type: ignore[attr-defined]

    @property
    def n_nodes(self) -> int:
        return self.n_routers * self.p

    def router_of(self, node: int) -> int:
        return node // self.p

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def connected(self, i: int, j: int) -> bool:
        return j in self.adj[i]

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @property
    def k_net(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def is_regular(self, k: int | None = None) -> bool:
        degs = {len(a) for a in self.adj}
        return len(degs) == 1 and (k is None or degs == {k})


def _mk(name, kind, n, edges: Iterable[tuple[int, int]], p, **kw) -> Topology:
    es = sorted({(min(i, j), max(i, j)) for i, j in edges if i != j})
    return Topology(name, kind, n, tuple(es), p, **kw)


# -- Slim NoC -----------------------------------------------------------------

def build_sn(config: SnConfig, fld: FieldTable | None = None,
             gens: GeneratorSets | None = None, name: str | None = None) -> Topology:
    """Connect [G|a,b] routers from the field's generator sets.

    Field element e stands for subgroup id / position e+1.
    """
    q = config.q
    if fld is None:
        fld = make_field(q)
    if fld.q != q:
        raise ValueError("field order does not match q")
    if gens is None:
        gens = generator_sets(fld, find_generator(fld), config.u)
    X, Xp = gens.X, gens.X_prime

    def idx(G, a, b):  # a, b are field elements
        return G * q * q + a * q + b

    edges = []
    for a in range(q):
        for b in range(q):
            for b2 in range(b + 1, q):
                if fld.sub(b, b2) in X:
                    edges.append((idx(0, a, b), idx(0, a, b2)))
                if fld.sub(b, b2) in Xp:
                    edges.append((idx(1, a, b), idx(1, a, b2)))
    for a in range(q):
        for m in range(q):
            for c in range(q):
                b = int(fld.add[fld.mul[m, a], c])
                edges.append((idx(0, a, b), idx(1, m, c)))
    labels = tuple(RouterLabel.from_index(i + 1, q) for i in range(2 * q * q))
    t = _mk(name or f"sn_q{q}", "sn", 2 * q * q, edges, config.p, labels=labels,
            params={"q": q, "u": config.u, "xi": gens.xi,
                    "X": sorted(gens.X), "X_prime": sorted(gens.X_prime)})
    if not t.is_regular(config.k_net):
        degs = sorted({t.degree(i) for i in range(t.n_routers)})
        raise ConstructionInvalid(f"q={q}: degrees {degs}, expected {config.k_net}-regular")
    d = diameter(t)
    if d != 2 and not config.special:
        raise ConstructionInvalid(f"q={q}: diameter {d}, expected 2")
    return t


def slim_noc(q: int, p: int, name: str | None = None) -> Topology:
    return build_sn(sn_params(q, p), name=name)


# -- baselines ----------------------------------------------------------------

def _grid(rows, cols, part=0, off=(0, 0)):
    return [(off[0] + c, off[1] + r, part) for r in range(rows) for c in range(cols)]


def build_torus(rows: int, cols: int, p: int, name: str | None = None) -> Topology:
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if cols > 1:
                edges.append((i, r * cols + (c + 1) % cols))
            if rows > 1:
                edges.append((i, ((r + 1) % rows) * cols + c))
    return _mk(name or f"torus_{rows}x{cols}", "torus", rows * cols, edges, p,
               grid=tuple(_grid(rows, cols)), params={"rows": rows, "cols": cols})


def build_cmesh(rows: int, cols: int, p: int, name: str | None = None) -> Topology:
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    return _mk(name or f"cmesh_{rows}x{cols}", "cmesh", rows * cols, edges, p,
               grid=tuple(_grid(rows, cols)), params={"rows": rows, "cols": cols})


def _fbf_edges(rows, cols, base=0):
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = base + r * cols + c
            edges += [(i, base + r * cols + c2) for c2 in range(c + 1, cols)]
            edges += [(i, base + r2 * cols + c) for r2 in range(r + 1, rows)]
    return edges


def build_fbf(rows: int, cols: int, p: int, name: str | None = None) -> Topology:
    return _mk(name or f"fbf_{rows}x{cols}", "fbf", rows * cols, _fbf_edges(rows, cols), p,
               grid=tuple(_grid(rows, cols)), params={"rows": rows, "cols": cols})


def build_pfbf(partitions_x: int, partitions_y: int, sub_rows: int, sub_cols: int,
               p: int, name: str | None = None) -> Topology:
    """Disjoint sub-FBFs on a partitions_y x partitions_x grid.

    Router (r, c) of a partition links to router (r, c) of each horizontally
    and vertically adjacent partition.
    """
    size = sub_rows * sub_cols
    edges, grid = [], []
    for py in range(partitions_y):
        for px in range(partitions_x):
            part = py * partitions_x + px
            base = part * size
            edges += _fbf_edges(sub_rows, sub_cols, base)
            grid += _grid(sub_rows, sub_cols, part, (px * sub_cols, py * sub_rows))
            for loc in range(size):
                if px + 1 < partitions_x:
                    edges.append((base + loc, base + size + loc))
                if py + 1 < partitions_y:
                    edges.append((base + loc, base + partitions_x * size + loc))
    n = partitions_x * partitions_y * size
    return _mk(name or f"pfbf_{partitions_x}x{partitions_y}_{sub_rows}x{sub_cols}", "pfbf", n,
               edges, p, grid=tuple(grid),
               params={"partitions_x": partitions_x, "partitions_y": partitions_y,
                       "sub_rows": sub_rows, "sub_cols": sub_cols})


# -- analytics ----------------------------------------------------------------

def bfs(t: Topology, src: int) -> list[int]:
    dist = [-1] * t.n_routers
    dist[src] = 0
    dq = deque([src])
    while dq:
        v = dq.popleft()
        for w in t.adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                dq.append(w)
    return dist


def distances(t: Topology) -> list[list[int]]:
    rows = [bfs(t, s) for s in range(t.n_routers)]
    if any(d < 0 for row in rows for d in row):
        raise Disconnected(f"{t.name} is not connected")
    return rows


def diameter(t: Topology) -> int:
    return max((max(row) for row in distances(t)), default=0)


def girth(t: Topology) -> int:
    """Shortest cycle length; 0 for a forest."""
    best = 0
    n = t.n_routers
    for s in range(n):
        dist = [-1] * n
        parent = [-1] * n
        dist[s] = 0
        dq = deque([s])
        while dq:
            v = dq.popleft()
            if best and 2 * dist[v] + 1 >= best:
                break
            for w in t.adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    dq.append(w)
                elif parent[v] != w:
                    c = dist[v] + dist[w] + 1
                    if not best or c < best:
                        best = c
    return best


def moore_bound(k_net: int) -> int:
    return 1 + k_net * k_net


def moore_ratio(t: Topology) -> Fraction:
    return Fraction(t.n_routers, moore_bound(t.k_net))


def subgroup_edge_counts(t: Topology) -> dict[tuple[tuple[int, int], tuple[int, int]], int]:
    """Edges between distinct subgroups, keyed by ((G, a), (G', a'))."""
    out: dict = {}
    for i, j in t.edges:
        li, lj = t.labels[i], t.labels[j]
        si, sj = (li.G, li.a), (lj.G, lj.a)
        if si != sj:
            key = tuple(sorted((si, sj)))
            out[key] = out.get(key, 0) + 1
    return out


def group_edge_counts(t: Topology) -> dict[tuple[int, int], int]:
    """Edges between groups; group a merges subgroups [0|a,*] and [1|a,*]."""
    out: dict = {}
    for i, j in t.edges:
        ai, aj = t.labels[i].a, t.labels[j].a
        if ai != aj:
            key = (min(ai, aj), max(ai, aj))
            out[key] = out.get(key, 0) + 1
    return out


# -- serialization ------------------------------------------------------------

def to_json(t: Topology) -> dict:
    doc = {
        "name": t.name,
        "kind": t.kind,
        "routers": t.n_routers,
        "p": t.p,
        "edges": [list(e) for e in t.edges],
        "attachment": [t.router_of(n) for n in range(t.n_nodes)],
        "params": t.params,
    }
    if t.labels is not None:
        doc["labels"] = [[lb.G, lb.a, lb.b] for lb in t.labels]
    if t.grid is not None:
        doc["grid"] = [list(g) for g in t.grid]
    return doc


def from_json(doc: dict) -> Topology:
    labels = tuple(RouterLabel(*lb) for lb in doc["labels"]) if "labels" in doc else None
    grid = tuple(tuple(g) for g in doc["grid"]) if "grid" in doc else None
    return Topology(doc["name"], doc["kind"], doc["routers"],
                    tuple(tuple(e) for e in doc["edges"]), doc["p"],
                    labels=labels, grid=grid, params=dict(doc.get("params", {})))


def save(t: Topology, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json(t), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load(path) -> Topology:
    with open(path) as fh:
        return from_json(json.load(fh))


def to_dot(t: Topology) -> str:
    lines = [f'graph "{t.name}" {{']
    for i in range(t.n_routers):
        lab = str(t.labels[i]) if t.labels else str(i)
        lines.append(f'  {i} [label="{lab}"];')
    lines += [f"  {i} -- {j};" for i, j in t.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"
