"""Router placement on the die grid (1-based cell coordinates)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .topo import Topology


class NotSlimNoc(ValueError):
    pass


class CollisionDetected(RuntimeError):
    pass


@dataclass(frozen=True)
class Layout:
    kind: str
    coords: tuple[tuple[int, int], ...]
    extent: tuple[int, int]
    seed: int | None = None

    def __post_init__(self):
        seen = {}
        X, Y = self.extent
        for i, (x, y) in enumerate(self.coords):
            if not (1 <= x <= X and 1 <= y <= Y):
                raise ValueError(f"router {i} at {(x, y)} outside extent {self.extent}")
            if (x, y) in seen:
                raise CollisionDetected(f"routers {seen[(x, y)]} and {i} share cell {(x, y)}")
            seen[(x, y)] = i

    def distance(self, i: int, j: int) -> int:
        (xi, yi), (xj, yj) = self.coords[i], self.coords[j]
        return abs(xi - xj) + abs(yi - yj)

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "extent": list(self.extent),
               "coords": [{"router": i, "x": x, "y": y} for i, (x, y) in enumerate(self.coords)]}
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["router", "x", "y"])
        for i, (x, y) in enumerate(self.coords):
            w.writerow([i, x, y])
        return buf.getvalue()

    @classmethod
    def from_json(cls, doc: dict) -> "Layout":
        coords = [None] * len(doc["coords"])
        for c in doc["coords"]:
            coords[c["router"]] = (c["x"], c["y"])
        return cls(doc["kind"], tuple(coords), tuple(doc["extent"]), doc.get("seed"))


def _labels(t: Topology):
    if t.kind != "sn" or t.labels is None:
        raise NotSlimNoc(f"{t.name} has no [G|a,b] labels")
    return t.labels, t.params["q"]


def _bbox(kind, coords, seed=None) -> Layout:
    return Layout(kind, tuple(coords), (max(x for x, _ in coords), max(y for _, y in coords)), seed)


def layout_basic(t: Topology) -> Layout:
    labels, q = _labels(t)
    return Layout("basic", tuple((lb.b, lb.a + lb.G * q) for lb in labels), (q, 2 * q))


def layout_subgr(t: Topology) -> Layout:
    labels, q = _labels(t)
    return Layout("subgr", tuple((lb.b, 2 * lb.a - (1 - lb.G)) for lb in labels), (q, 2 * q))


def gr_coord(G: int, a: int, b: int, q: int) -> tuple[int, int]:
    """Group-layout cell of [G|a,b].

    The x term is zero-based ((b + Gq) mod ceil(sqrt(2q)) hits 0),
    so one is added to land on the 1-based grid; y is already 1-based.
    """
    c2 = math.ceil(math.sqrt(2 * q))
    c1 = math.ceil(math.sqrt(q))
    v = b + G * q
    x = ((a - 1) * c2) % (c2 * c1) + v % c2
    y = ((a - 1) // c1) * math.ceil(2 * q / c2) + math.ceil(v / c2)
    return x + 1, y


def layout_gr(t: Topology) -> Layout:
    labels, q = _labels(t)
    return _bbox("gr", [gr_coord(lb.G, lb.a, lb.b, q) for lb in labels])


def layout_rand(t: Topology, seed: int) -> Layout:
    labels, q = _labels(t)
    rng = np.random.default_rng(seed)
    cells = rng.permutation(q * 2 * q)[: len(labels)]
    return Layout("rand", tuple((int(c) % q + 1, int(c) // q + 1) for c in cells), (q, 2 * q), seed)


def layout_grid(t: Topology) -> Layout:
    """Baselines sit at their natural (col, row) position, one router per cell."""
    if t.grid is None:
        raise ValueError(f"{t.name} has no natural grid")
    return _bbox("grid", [(c + 1, r + 1) for c, r, _ in t.grid])


LAYOUTS = ("basic", "subgr", "gr", "rand")


def make_layout(t: Topology, kind: str | None = None, seed: int = 0) -> Layout:
    if kind is None:
        kind = "subgr" if t.kind == "sn" else "grid"
    if kind == "basic":
        return layout_basic(t)
    if kind == "subgr":
        return layout_subgr(t)
    if kind == "gr":
        return layout_gr(t)
    if kind == "rand":
        return layout_rand(t, seed)
    if kind == "grid":
        return layout_grid(t)
    raise ValueError(f"unknown layout {kind!r}")


def save(layout: Layout, path) -> None:
    with open(path, "w") as fh:
        json.dump(layout.to_json(), fh, indent=1)
        fh.write("\n")


def load(path) -> Layout:
    with open(path) as fh:
        return Layout.from_json(json.load(fh))
