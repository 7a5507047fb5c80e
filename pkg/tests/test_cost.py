import numpy as np
import pytest

from slimnoc.cost import (BufferParams, avg_wire_length, buffer_for_distance, cost_report,
                          edge_buffer_size, envelope_band, rtt, rtt_for_distance, scaling_envelope,
                          total_central_buffers, total_edge_buffers, uniform_edge_buffer)
from slimnoc.layout import LAYOUTS, Layout, make_layout
from slimnoc.topo import Topology, slim_noc


def test_rtt_examples():
    assert rtt_for_distance(5, 1) == 13
    assert rtt_for_distance(5, 9) == 5
    assert rtt_for_distance(0, 1) == 3


def test_edge_buffer_examples():
    assert buffer_for_distance(5, BufferParams(vc=2, H=1)) == 26
    assert buffer_for_distance(5, BufferParams(vc=2, H=9)) == 10
    assert buffer_for_distance(1, BufferParams(b_over_L=0.5, vc=3)) == 8  # ceil(5 * 1.5)


@pytest.mark.parametrize("kw", [{"vc": 0}, {"b_over_L": 0}, {"H": 0}, {"cb_size": -1}])
def test_params_rejected(kw):
    with pytest.raises(ValueError):
        BufferParams(**kw)


def _pair(dist):
    t = Topology("two", "x", 2, ((0, 1),), 1)
    return t, Layout("x", ((1, 1), (1 + dist, 1)), (1 + dist, 1))


def test_single_edge():
    t, L = _pair(3)
    assert avg_wire_length(t, L) == 3
    t, L = _pair(5)
    assert edge_buffer_size(0, 1, L, BufferParams()) == 26
    assert rtt(0, 1, L, 1) == 13
    assert total_edge_buffers(t, L, BufferParams()) == 52


def test_complete_graph_on_line():
    n = 60
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    t = Topology("k", "x", n, edges, 1)
    L = Layout("line", tuple((i + 1, 1) for i in range(n)), (n, 1))
    assert avg_wire_length(t, L) == pytest.approx((n + 1) / 3)


def test_central_buffer_examples():
    assert total_central_buffers(50, 7, BufferParams(cb_size=20, vc=2)) == 2400
    assert total_central_buffers(1, 1, BufferParams(cb_size=0, vc=1)) == 2
    assert total_central_buffers(162, 13, BufferParams(cb_size=40, vc=2)) == 14904


def _brute_delta_eb(t, L, params):
    total = 0
    for i in range(t.n_routers):
        for j in t.adj[i]:
            (xi, yi), (xj, yj) = L.coords[i], L.coords[j]
            d = abs(xi - xj) + abs(yi - yj)
            T = 2 * -(-d // params.H) + 3
            total += int(np.ceil(T * params.b_over_L * params.vc))
    return total


def test_delta_cb_randomized_and_layout_invariant():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = int(rng.choice([3, 4, 5, 7]))
        p = BufferParams(b_over_L=float(rng.choice([0.5, 1, 2])), vc=int(rng.integers(1, 5)),
                         H=int(rng.integers(1, 10)), cb_size=int(rng.integers(0, 60)))
        t = slim_noc(q, 1)
        want = t.n_routers * (p.cb_size + 2 * t.k_net * p.vc)
        got = {cost_report(t, make_layout(t, k, 2), p)["delta_cb"] for k in LAYOUTS}
        assert got == {want}
        L = make_layout(t, str(rng.choice(LAYOUTS)), int(rng.integers(100)))
        assert total_edge_buffers(t, L, p) == _brute_delta_eb(t, L, p)


def test_rtt_monotone_in_h(sn5):
    L = make_layout(sn5, "basic")
    for i, j in sn5.edges:
        assert rtt(i, j, L, 1) >= rtt(i, j, L, 9)
        assert (rtt(i, j, L, 1) == rtt(i, j, L, 9)) == (L.distance(i, j) <= 1)


@pytest.mark.parametrize("q", [5, 8, 9])
def test_random_layout_longer_than_subgroup(q):
    t = slim_noc(q, 1)
    ms = avg_wire_length(t, make_layout(t, "subgr"))
    for seed in range(10):
        assert avg_wire_length(t, make_layout(t, "rand", seed)) >= ms


def test_uniform_buffer_modes(sn5):
    L = make_layout(sn5, "subgr")
    p = BufferParams()
    lo, hi = uniform_edge_buffer(sn5, L, p, "min"), uniform_edge_buffer(sn5, L, p, "max")
    assert lo == 10 and lo < hi and uniform_edge_buffer(sn5, L, p, 17) == 17
    with pytest.raises(ValueError):
        uniform_edge_buffer(sn5, L, p, "avg")


def test_scaling_envelope():
    rows = scaling_envelope([3, 5, 7, 9, 11, 13])
    assert [r["N"] for r in rows] == sorted(r["N"] for r in rows)
    ms = [r["M"] for r in rows]
    assert ms == sorted(ms)
    assert envelope_band(rows) <= 3
    assert envelope_band(scaling_envelope([4, 8])) <= 3
    assert envelope_band(scaling_envelope([5])) == 1
