"""Synthetic destination patterns and trace files."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..topo import Topology, distances

PATTERNS = ("RND", "SHF", "REV", "ADV1", "ADV2", "TRACE")
TRACE_KINDS = {"write": 0, "read": 1, "reply": 2, "coh": 3}


def _bits(n: int) -> int:
    return max(n.bit_length() - 1, 0)  # floor(log2 n)


def _fold(src: int, n: int, f) -> int:
    """Apply a b-bit permutation f to the low bits, keep the high part, wrap into [0, n)."""
    b = _bits(n)
    lo = src & ((1 << b) - 1)
    return (f(lo, b) + (src - lo)) % n


def shuffle(src: int, n: int) -> int:
    def rotl(x, b):
        return ((x << 1) | (x >> (b - 1))) & ((1 << b) - 1) if b else x
    return _fold(src, n, rotl)


def reverse(src: int, n: int) -> int:
    def rev(x, b):
        return int(format(x, f"0{b}b")[::-1], 2) if b else x
    return _fold(src, n, rev)


def _greedy_partner(t: Topology, want: int) -> list[int]:
    """Bijective router pairing preferring partners at hop distance `want`."""
    dist = distances(t)
    n = t.n_routers
    taken = [False] * n
    out = [-1] * n
    for r in range(n):
        best = None
        for cand in range(n):
            if taken[cand] or cand == r:
                continue
            score = abs(dist[r][cand] - want)
            if best is None or score < best[0]:
                best = (score, cand)
                if score == 0:
                    break
        c = best[1] if best else r
        out[r] = c
        taken[c] = True
    return out


def _sn_partner(t: Topology, adversary: int) -> list[int]:
    q = t.params["q"]
    labels = t.labels
    index = {(lb.G, lb.a, lb.b): i for i, lb in enumerate(labels)}
    out = []
    for lb in labels:
        # positions are 1-based field element + 1; work on the field ids
        a, b = lb.a - 1, lb.b - 1
        if adversary == 1:
            # [0|a,b] <-> [1|a,c] with b = a*a + c: one inter-subgroup link class
            fld = t.params.get("_field")
            if fld is None:
                from ..ff import make_field
                fld = make_field(q)
            aa = int(fld.mul[a, a])
            if lb.G == 0:
                c = int(fld.sub(b, aa))
                out.append(index[(1, lb.a, c + 1)])
            else:
                bb = int(fld.add[b, aa])
                out.append(index[(0, lb.a, bb + 1)])
        else:
            # same type, next subgroup: never adjacent, so distance 2
            out.append(index[(lb.G, (a + 1) % q + 1, lb.b)])
    return out


def router_partners(t: Topology, pattern: str) -> list[int]:
    adversary = {"ADV1": 1, "ADV2": 2}[pattern]
    if t.kind == "sn" and t.labels is not None and not t.params.get("special"):
        return _sn_partner(t, adversary)
    return _greedy_partner(t, adversary)


def destination_table(pattern: str, t: Topology) -> np.ndarray | None:
    """Fixed src->dst map for permutation patterns, None for RND and TRACE."""
    n = t.n_nodes
    if pattern in ("RND", "TRACE"):
        return None
    if pattern == "SHF":
        return np.array([shuffle(s, n) for s in range(n)], dtype=np.int64)
    if pattern == "REV":
        return np.array([reverse(s, n) for s in range(n)], dtype=np.int64)
    if pattern in ("ADV1", "ADV2"):
        part = router_partners(t, pattern)
        p = t.p
        return np.array([part[s // p] * p + s % p for s in range(n)], dtype=np.int64)
    raise ValueError(f"unknown pattern {pattern!r}")


def gen_destination(pattern: str, src: int, n: int, rng: np.random.Generator,
                    topology: Topology | None = None) -> int:
    if not 0 <= src < n:
        raise ValueError(f"source {src} outside [0, {n})")
    if pattern == "RND":
        d = int(rng.integers(0, n - 1))
        return d + 1 if d >= src else d
    if pattern == "SHF":
        return shuffle(src, n)
    if pattern == "REV":
        return reverse(src, n)
    if pattern in ("ADV1", "ADV2"):
        if topology is None:
            raise ValueError(f"{pattern} needs the topology")
        return int(destination_table(pattern, topology)[src])
    raise ValueError(f"unknown pattern {pattern!r}")


@dataclass(frozen=True)
class Trace:
    cycle: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    flits: np.ndarray
    kind: np.ndarray

    def __len__(self):
        return len(self.cycle)


def make_trace(rows) -> Trace:
    """rows: (cycle, src, dst, flits[, kind]); sorted stably by cycle."""
    rows = sorted(rows, key=lambda r: r[0])
    cols = [[], [], [], [], []]
    for r in rows:
        kind = r[4] if len(r) > 4 else 0
        if isinstance(kind, str):
            kind = TRACE_KINDS[kind]
        for c, v in zip(cols, (r[0], r[1], r[2], r[3], kind)):
            c.append(int(v))
    arr = [np.array(c, dtype=np.int64) for c in cols]
    return Trace(*arr)


def load_trace(path) -> Trace:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        rows = []
        for rec in rd:
            if not rec or rec[0].strip().startswith("#"):
                continue
            if not rec[0].strip().lstrip("-").isdigit():
                continue  # header
            rows.append([int(rec[0]), int(rec[1]), int(rec[2]), int(rec[3])]
                        + ([rec[4].strip()] if len(rec) > 4 and rec[4].strip() else []))
    return make_trace(rows)


def save_trace(trace: Trace, path) -> None:
    names = {v: k for k, v in TRACE_KINDS.items()}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "src_node", "dst_node", "flits", "kind"])
        for row in zip(trace.cycle, trace.src, trace.dst, trace.flits, trace.kind):
            w.writerow([int(row[0]), int(row[1]), int(row[2]), int(row[3]), names[int(row[4])]])
