import itertools

import numpy as np
import pytest

from slimnoc.layout import Layout, make_layout
from slimnoc.topo import Topology, slim_noc
from slimnoc.wiring import (TECH, TechProfile, check_constraint, crossing_counts, crossing_csv,
                            path_cells, place_wire, plan_wires, wire_points)


def test_bend_rule_examples():
    assert wire_points((1, 1), (4, 2)) == [(1, 1), (1, 2), (4, 2)]
    assert wire_points((1, 1), (2, 4)) == [(1, 1), (2, 1), (2, 4)]
    assert wire_points((1, 1), (1, 5)) == [(1, 1), (1, 5)]


def test_cells_of_l_path():
    cells = path_cells(wire_points((1, 1), (4, 2)))
    assert cells == [(1, 1), (1, 2), (2, 2), (3, 2), (4, 2)]


def _brute_cells(a, b):
    """Cells on the wire by checking every grid cell against the two closed segments."""
    pts = wire_points(a, b)
    out = set()
    xs = range(1, max(a[0], b[0]) + 1)
    ys = range(1, max(a[1], b[1]) + 1)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        for x, y in itertools.product(xs, ys):
            if min(x0, x1) <= x <= max(x0, x1) and min(y0, y1) <= y <= max(y0, y1):
                out.add((x, y))
    return out


def test_paths_are_shortest_with_one_bend():
    grid = [(x, y) for x in range(1, 6) for y in range(1, 6)]
    for a, b in itertools.permutations(grid, 2):
        pts = wire_points(a, b)
        assert len(pts) <= 3
        cells = path_cells(pts)
        dist = abs(a[0] - b[0]) + abs(a[1] - b[1])
        assert len(cells) == dist + 1 == len(set(cells))
        assert set(cells) == _brute_cells(a, b)


def test_mirror_cell_sets():
    # reversing a bent wire yields the opposite L; only straight wires coincide
    grid = [(x, y) for x in range(1, 6) for y in range(1, 6)]
    for a, b in itertools.permutations(grid, 2):
        fwd = path_cells(wire_points(a, b))
        rev = path_cells(wire_points(b, a))
        straight = a[0] == b[0] or a[1] == b[1]
        assert (set(fwd) == set(rev)) == straight
        assert len(fwd) == len(rev)


def test_single_edge_adjacent():
    t = Topology("two", "x", 2, ((0, 1),), 1)
    L = Layout("x", ((1, 1), (2, 1)), (3, 2))
    c = plan_wires(t, L).crossing
    assert c.sum() == 2 and c[0, 0] == 1 and c[0, 1] == 1


@pytest.mark.parametrize("seed", range(5))
def test_conservation_random(seed):
    rng = np.random.default_rng(seed)
    n = 12
    cells = rng.permutation(36)[:n]
    coords = tuple((int(c) % 6 + 1, int(c) // 6 + 1) for c in cells)
    L = Layout("r", coords, (6, 6))
    edges = {(int(i), int(j)) for i, j in rng.integers(0, n, (30, 2)) if i < j}
    t = Topology("r", "x", n, tuple(sorted(edges)), 1)
    c = plan_wires(t, L).crossing
    assert c.sum() == sum(L.distance(i, j) + 1 for i, j in t.edges)
    # brute-force per-cell count
    brute = np.zeros_like(c)
    for i, j in t.edges:
        for x, y in _brute_cells(coords[i], coords[j]):
            brute[y - 1, x - 1] += 1
    assert (brute == c).all()


def test_both_directions_doubles_mass(sn5):
    L = make_layout(sn5, "subgr")
    one = plan_wires(sn5, L).crossing.sum()
    two = plan_wires(sn5, L, both_directions=True).crossing.sum()
    assert two == 2 * one


def test_tech_profiles():
    assert TECH[45].W == 7000 and TECH[22].W == 7000 and TECH[11].W == 7000


def test_sn_s_passes_45nm(sn5):
    for kind in ("basic", "subgr", "gr", "rand"):
        c = plan_wires(sn5, make_layout(sn5, kind, 1)).crossing
        assert check_constraint(c, TECH[45], 128).passed


def test_zero_w_profile_flags_every_cell():
    c = np.array([[1, 0], [2, 3]])
    v = check_constraint(c, TechProfile(45, 0.0, 2.0), 128)
    assert not v.passed and len(v.violations) == 3


def test_link_count_mode():
    c = np.array([[60]])
    assert not check_constraint(c, TECH[45], 128).passed
    assert check_constraint(c, TECH[45], 128, per_wire=False).passed


def test_csv_export():
    assert crossing_csv(np.array([[1, 2], [3, 4]])) == "1,2\n3,4\n"


def test_place_wire_uses_layout(sn5):
    L = make_layout(sn5, "basic")
    pts = place_wire(0, 1, L)
    assert pts[0] == L.coords[0] and pts[-1] == L.coords[1]
    assert crossing_counts(plan_wires(sn5, L)).shape == (10, 5)
