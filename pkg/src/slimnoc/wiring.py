"""Two-segment Manhattan wire placement and per-cell wire crossing counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .layout import Layout
from .topo import Topology

Point = tuple[int, int]

DEFAULT_LINK_WIDTH = 128


@dataclass(frozen=True)
class TechProfile:
    node: int  # nm
    density: float  # wires per mm
    core_side: float  # mm

    def __post_init__(self):
        if self.W <= 0 and self.density != 0:
            raise ValueError("W must be positive")

    @property
    def W(self) -> float:
        return self.density * self.core_side


# core areas 4 / 1 / 0.25 mm^2
TECH = {
    45: TechProfile(45, 3500.0, 2.0),
    22: TechProfile(22, 7000.0, 1.0),
    11: TechProfile(11, 14000.0, 0.5),
}


def wire_points(i: Point, j: Point) -> list[Point]:
    """Corner points of the wire from cell i to cell j.

    The first leg runs along Y when the X distance is strictly larger, along
    X otherwise.  Collinear endpoints give a single segment.
    """
    (xi, yi), (xj, yj) = i, j
    if xi == xj or yi == yj:
        return [i, j]
    if abs(xi - xj) > abs(yi - yj):
        return [i, (xi, yj), j]
    return [i, (xj, yi), j]


def place_wire(i: int, j: int, layout: Layout) -> list[Point]:
    return wire_points(layout.coords[i], layout.coords[j])


def path_cells(points: list[Point]) -> list[Point]:
    """Every grid cell covered by a polyline, endpoints included, in order."""
    cells = [points[0]]
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        dx = (x1 > x0) - (x1 < x0)
        dy = (y1 > y0) - (y1 < y0)
        x, y = x0, y0
        while (x, y) != (x1, y1):
            x, y = x + dx, y + dy
            cells.append((x, y))
    return cells


@dataclass
class WirePlan:
    paths: dict[tuple[int, int], list[Point]]
    extent: tuple[int, int]
    link_width: int = DEFAULT_LINK_WIDTH
    both_directions: bool = False
    crossing: np.ndarray = field(default=None, repr=False)


def plan_wires(t: Topology, layout: Layout, link_width: int = DEFAULT_LINK_WIDTH,
               both_directions: bool = False) -> WirePlan:
    """Place every link.

    By default each undirected link gets one wire, routed from its lower to
    its higher router number.  ``both_directions`` places i->j and j->i
    separately, summing over ordered router pairs.
    """
    paths = {}
    for i, j in t.edges:
        paths[(i, j)] = place_wire(i, j, layout)
        if both_directions:
            paths[(j, i)] = place_wire(j, i, layout)
    plan = WirePlan(paths, layout.extent, link_width, both_directions)
    plan.crossing = crossing_counts(plan)
    return plan


def crossing_counts(plan: WirePlan) -> np.ndarray:
    """Links crossing each cell; indexed [y-1, x-1]."""
    X, Y = plan.extent
    grid = np.zeros((Y, X), dtype=np.int64)
    for pts in plan.paths.values():
        for x, y in path_cells(pts):
            grid[y - 1, x - 1] += 1
    return grid


@dataclass(frozen=True)
class ConstraintVerdict:
    passed: bool
    W: float
    max_links: int
    max_wires: int
    violations: tuple[tuple[int, int, int], ...]  # (x, y, wires)

    def to_json(self) -> dict:
        return {"passed": self.passed, "W": self.W, "max_links": self.max_links,
                "max_wires": self.max_wires,
                "violations": [{"x": x, "y": y, "wires": w} for x, y, w in self.violations]}


def check_constraint(counts: np.ndarray, tech: TechProfile, link_width: int = DEFAULT_LINK_WIDTH,
                     per_wire: bool = True) -> ConstraintVerdict:
    """Compare per-cell wire load with W.

    With ``per_wire`` every link is ``link_width`` physical wires; otherwise
    link counts are compared with W directly.
    """
    scale = link_width if per_wire else 1
    wires = counts * scale
    bad = np.argwhere(wires > tech.W)
    viol = tuple((int(c) + 1, int(r) + 1, int(wires[r, c])) for r, c in bad)
    mx = int(counts.max()) if counts.size else 0
    return ConstraintVerdict(not viol, tech.W, mx, mx * scale, viol)


def crossing_csv(counts: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in counts:
        w.writerow([int(v) for v in row])
    return buf.getvalue()
