"""Compiled cycle loop of the flit simulator.

Everything is flat int64 arrays so the loop compiles with numba.  Stage
order inside one cycle:

  credits arrive -> links deliver -> switch/link traversal -> traffic
  generation -> NI injection -> per-router allocation (CB grants, CB read,
  input arbitration, ejection)

With that order a head flit written into an input buffer in cycle A is
allocated in A, crosses the switch in A+1 and is written downstream in
A+2+lat, so one hop costs 2 router cycles plus the link latency.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FM = 64  # flit code = packet slot * FM + flit index

# packet row columns
P_SRC = 0
P_DST = 1
P_LEN = 2
P_GEN = 3
P_HOPS = 4
P_MEAS = 5
P_KIND = 6


# stats slots
S_GEN_MEAS = 0      # measured packets generated
S_EJ_MEAS = 1       # measured packets fully ejected
S_LAT_SUM = 2
S_LAT_MAX = 3
S_HOP_SUM = 4
S_FLITS_OFF = 5     # flits generated inside the window
S_FLITS_ACC = 6     # flits ejected inside the window
S_PKT_GEN = 7       # all packets generated
S_PKT_EJ = 8        # all packets ejected
S_DROPPED = 9       # generation refused (source queue full)
S_STALL = 10        # 1 when the stall detector fired
S_END = 11          # last simulated cycle + 1
S_LIVE = 12         # packets alive at the end
S_BYPASS = 13       # head traversals through the bypass path (CB routers)
S_CBPATH = 14       # head traversals through the central buffer
S_FLITS_IN = 15     # flits injected into routers
S_FLITS_OUT = 16    # flits ejected
S_CONS_ERR = 17     # conservation violations seen in debug mode
S_STALL_CYCLE = 18
S_REPLIES = 19
N_STATS = 20


@njit(cache=True)
def _free_slots(cap, cnt):
    return cap - cnt


@njit(cache=True, error_model="numpy")
def run_kernel(
    # topology
    n_routers, n_nodes, V, p,
    ip_router, ip_link, ip_node, ip_cap, r_ip_start,
    op_router, op_link, op_node, r_op_start,
    link_op, link_ip, link_lat,
    route_op, hop_vc, node_inj_ip, node_eject_op,
    # microarchitecture
    elastic, central, cb_cap,
    # traffic
    pattern_kind, dst_table, gen_prob, pkt_len_default,
    tr_cycle, tr_src, tr_dst, tr_len, tr_kind, replies, reply_len,
    # run control
    warmup, measure, drain, stall_bound, seed, sq_cap, debug,
    rec_cap,
):
    np.random.seed(seed)
    NIP = ip_router.shape[0]
    NOP = op_router.shape[0]
    NL = link_op.shape[0]
    stats = np.zeros(N_STATS, dtype=np.int64)

    dmax = 1
    for i in range(NIP):
        for v in range(V):
            if ip_cap[i, v] > dmax:
                dmax = ip_cap[i, v]
    lmax = 1
    for l in range(NL):
        if link_lat[l] > lmax:
            lmax = link_lat[l]
    lcap = max(dmax, 2 * lmax) + 2
    wcap = lmax + 3

    # packets
    total_store = NIP * V * dmax + NL * V * lcap + NOP * V + n_routers * cb_cap
    pmax = n_nodes * (sq_cap + 2) + total_store + 16
    pkt = np.zeros((pmax, 8), np.int64)  # one row per packet slot
    # one CB entry per packet residency in a router's central buffer
    n_ent = n_routers * cb_cap if central else 1
    ent_pkt = np.zeros(n_ent, np.int64)
    ent_in = np.zeros(n_ent, np.int64)
    ent_out = np.zeros(n_ent, np.int64)
    ent_ready = np.zeros((n_ent, FM), np.int64)
    ent_stack = np.arange(n_ent - 1, -1, -1).astype(np.int64)
    n_ent_free = n_ent
    free_stack = np.arange(pmax - 1, -1, -1).astype(np.int64)
    n_free = pmax

    rec = np.zeros((rec_cap, 6), np.int64)
    n_rec = 0

    # node side
    sq = np.zeros((n_nodes, sq_cap), np.int64)
    sq_head = np.zeros(n_nodes, np.int64)
    sq_cnt = np.zeros(n_nodes, np.int64)
    ni_pkt = np.full(n_nodes, -1, np.int64)
    ni_flit = np.zeros(n_nodes, np.int64)
    ej_owner = np.full(n_nodes, -1, np.int64)

    # input buffers
    ibuf = np.zeros((NIP, V, dmax), np.int64)
    ib_head = np.zeros((NIP, V), np.int64)
    ib_cnt = np.zeros((NIP, V), np.int64)
    ib_last = np.zeros((NIP, V), np.int64)
    iv_state = np.zeros((NIP, V), np.int64)
    iv_op = np.zeros((NIP, V), np.int64)
    iv_ov = np.zeros((NIP, V), np.int64)
    iv_ent = np.zeros((NIP, V), np.int64)

    # outputs
    ov_owner = np.full((NOP, V), -1, np.int64)
    ostage = np.full((NOP, V), -1, np.int64)
    credits = np.zeros((NOP, V), np.int64)
    for l in range(NL):
        for v in range(V):
            credits[link_op[l], v] = ip_cap[link_ip[l], v]
    out_used = np.zeros(NOP, np.int64)

    # central buffers
    cb_free = np.full(n_routers, cb_cap, np.int64)
    cbq_cap = cb_cap + 1
    cbq = np.zeros((NOP, V, cbq_cap), np.int64) if central else np.zeros((1, 1, 1), np.int64)
    cbq_head = np.zeros((NOP, V), np.int64)
    cbq_cnt = np.zeros((NOP, V), np.int64)

    # links
    lq = np.zeros((NL, V, lcap), np.int64)
    lq_ready = np.zeros((NL, V, lcap), np.int64)
    lq_head = np.zeros((NL, V), np.int64)
    lq_cnt = np.zeros((NL, V), np.int64)
    lq_tot = np.zeros(NL, np.int64)
    cw = np.zeros((NL, wcap, V), np.int64)

    r_occ = np.zeros(n_routers, np.int64)  # flits in a router's input buffers
    o_stg = np.zeros(NOP, np.int64)  # staged flits per output port
    cw_n = np.zeros(wcap, np.int64)  # pending credits per wheel slot
    next_arr = np.zeros(n_nodes, np.int64)
    if gen_prob > 0.0:
        for s in range(n_nodes):
            next_arr[s] = np.random.geometric(gen_prob) - 1

    node_router = np.zeros(n_nodes, np.int64)
    for nd in range(n_nodes):
        node_router[nd] = nd // p

    gen_end = warmup + measure
    win_lo = warmup
    win_hi = warmup + measure
    meas_out = 0  # measured packets still alive
    live = 0
    tr_i = 0
    n_tr = tr_cycle.shape[0]
    hard_end = gen_end + 2 * drain
    t = 0
    phase = 0  # 0 generate, 1 background until measured done, 2 drain
    while True:
        if phase == 0 and t >= gen_end:
            phase = 1
        if phase == 1 and (meas_out == 0 or t >= gen_end + drain):
            phase = 2
        if phase == 2:
            if live == 0 and (pattern_kind != 2 or tr_i >= n_tr):
                break
        if t >= hard_end:
            break

        # A: credits
        vs = t % V
        if not elastic and cw_n[t % wcap] > 0:
            slot = t % wcap
            cw_n[slot] = 0
            for l in range(NL):
                o = link_op[l]
                for v in range(V):
                    c = cw[l, slot, v]
                    if c:
                        credits[o, v] += c
                        cw[l, slot, v] = 0

        # B: link delivery
        for l in range(NL):
            if lq_tot[l] == 0:
                continue
            dip = link_ip[l]
            for k in range(V):
                v = vs + k
                if v >= V:
                    v -= V
                if lq_cnt[l, v] == 0:
                    continue
                hd = lq_head[l, v]
                if lq_ready[l, v, hd] > t:
                    continue
                if ib_cnt[dip, v] >= ip_cap[dip, v]:
                    continue
                f = lq[l, v, hd]
                hd += 1
                lq_head[l, v] = 0 if hd == lcap else hd
                lq_cnt[l, v] -= 1
                lq_tot[l] -= 1
                pos = ib_head[dip, v] + ib_cnt[dip, v]
                if pos >= dmax:
                    pos -= dmax
                ibuf[dip, v, pos] = f
                if ib_cnt[dip, v] == 0:
                    ib_last[dip, v] = t
                ib_cnt[dip, v] += 1
                r_occ[ip_router[dip]] += 1
                if f % FM == 0:
                    pkt[f // FM, P_HOPS] += 1
                break

        # C: switch + link traversal, one flit per output port
        for l in range(NL):
            o = link_op[l]
            if o_stg[o] == 0:
                continue
            for k in range(V):
                v = vs + k
                if v >= V:
                    v -= V
                f = ostage[o, v]
                if f < 0:
                    continue
                if elastic:
                    if lq_cnt[l, v] >= 2 * link_lat[l] or lq_tot[l] >= link_lat[l] * (V + 1):
                        continue
                else:
                    if credits[o, v] <= 0:
                        continue
                    credits[o, v] -= 1
                pos = lq_head[l, v] + lq_cnt[l, v]
                if pos >= lcap:
                    pos -= lcap
                lq[l, v, pos] = f
                lq_ready[l, v, pos] = t + link_lat[l] + 1
                lq_cnt[l, v] += 1
                lq_tot[l] += 1
                ostage[o, v] = -1
                o_stg[o] -= 1
                break

        # D: traffic generation
        if phase < 2:
            if pattern_kind == 2:
                while tr_i < n_tr and tr_cycle[tr_i] <= t:
                    s = tr_src[tr_i]
                    if n_free > 0 and sq_cnt[s] < sq_cap:
                        n_free -= 1
                        pk = free_stack[n_free]
                        pkt[pk, P_SRC] = s
                        pkt[pk, P_DST] = tr_dst[tr_i]
                        pkt[pk, P_LEN] = tr_len[tr_i]
                        pkt[pk, P_GEN] = t
                        pkt[pk, P_HOPS] = 0
                        pkt[pk, P_KIND] = tr_kind[tr_i]
                        m = 1 if (t >= win_lo and t < win_hi) else 0
                        pkt[pk, P_MEAS] = m
                        if m:
                            stats[S_GEN_MEAS] += 1
                            stats[S_FLITS_OFF] += tr_len[tr_i]
                            meas_out += 1
                        sq[s, (sq_head[s] + sq_cnt[s]) % sq_cap] = pk
                        sq_cnt[s] += 1
                        live += 1
                        stats[S_PKT_GEN] += 1
                    else:
                        stats[S_DROPPED] += 1
                    tr_i += 1
            elif gen_prob > 0.0:
                m = 1 if (t >= win_lo and t < win_hi) else 0
                for s in range(n_nodes):
                    if next_arr[s] != t:
                        continue
                    next_arr[s] = t + np.random.geometric(gen_prob)
                    if pattern_kind == 0:
                        d = np.random.randint(0, n_nodes - 1)
                        if d >= s:
                            d += 1
                    else:
                        d = dst_table[s]
                    if m:
                        stats[S_FLITS_OFF] += pkt_len_default
                    if n_free == 0 or sq_cnt[s] >= sq_cap:
                        stats[S_DROPPED] += 1
                        continue
                    n_free -= 1
                    pk = free_stack[n_free]
                    pkt[pk, P_SRC] = s
                    pkt[pk, P_DST] = d
                    pkt[pk, P_LEN] = pkt_len_default
                    pkt[pk, P_GEN] = t
                    pkt[pk, P_HOPS] = 0
                    pkt[pk, P_KIND] = 0
                    pkt[pk, P_MEAS] = m
                    if m:
                        stats[S_GEN_MEAS] += 1
                        meas_out += 1
                    sq[s, (sq_head[s] + sq_cnt[s]) % sq_cap] = pk
                    sq_cnt[s] += 1
                    live += 1
                    stats[S_PKT_GEN] += 1

        # E: NI injection, one flit per node per cycle
        for s in range(n_nodes):
            if ni_pkt[s] < 0:
                if sq_cnt[s] == 0:
                    continue
                ni_pkt[s] = sq[s, sq_head[s]]
                hd = sq_head[s] + 1
                sq_head[s] = 0 if hd == sq_cap else hd
                sq_cnt[s] -= 1
                ni_flit[s] = 0
            ip = node_inj_ip[s]
            if ib_cnt[ip, 0] >= ip_cap[ip, 0]:
                continue
            pk = ni_pkt[s]
            pos = ib_head[ip, 0] + ib_cnt[ip, 0]
            if pos >= dmax:
                pos -= dmax
            ibuf[ip, 0, pos] = pk * FM + ni_flit[s]
            if ib_cnt[ip, 0] == 0:
                ib_last[ip, 0] = t
            ib_cnt[ip, 0] += 1
            r_occ[ip_router[ip]] += 1
            stats[S_FLITS_IN] += 1
            ni_flit[s] += 1
            if ni_flit[s] == pkt[pk, P_LEN]:
                ni_pkt[s] = -1

        # F: per-router allocation
        for r in range(n_routers):
            if r_occ[r] == 0 and cb_free[r] == cb_cap:
                continue
            o0 = r_op_start[r]
            o1 = r_op_start[r + 1]
            for o in range(o0, o1):
                out_used[o] = 0
            cb_in_used = 0
            if central:
                # out-VC grants to queued CB packets
                for o in range(o0, o1):
                    if op_link[o] < 0:
                        continue
                    for v in range(V):
                        if ov_owner[o, v] == -1 and cbq_cnt[o, v] > 0:
                            e = cbq[o, v, cbq_head[o, v]]
                            cbq_head[o, v] = (cbq_head[o, v] + 1) % cbq_cap
                            cbq_cnt[o, v] -= 1
                            ov_owner[o, v] = -2 - e
                # single CB read port
                no = o1 - o0
                done = False
                for kk in range(no):
                    o = o0 + (kk + t) % no
                    if op_link[o] < 0:
                        continue
                    for v in range(V):
                        own = ov_owner[o, v]
                        if own > -2:
                            continue
                        e = -2 - own
                        if ent_out[e] >= ent_in[e]:
                            continue
                        if ent_ready[e, ent_out[e]] > t or ostage[o, v] >= 0:
                            continue
                        pk = ent_pkt[e]
                        ostage[o, v] = pk * FM + ent_out[e]
                        o_stg[o] += 1
                        ent_out[e] += 1
                        cb_free[r] += 1
                        out_used[o] = 1
                        if ent_out[e] == pkt[pk, P_LEN]:
                            ov_owner[o, v] = -1
                            ent_stack[n_ent_free] = e
                            n_ent_free += 1
                        done = True
                        break
                    if done:
                        break

            i0 = r_ip_start[r]
            i1 = r_ip_start[r + 1]
            ni = i1 - i0
            off = t % ni
            for kk in range(ni):
                ip = kk + off
                if ip >= ni:
                    ip -= ni
                ip += i0
                for k in range(V):
                    v = vs + k
                    if v >= V:
                        v -= V
                    if ib_cnt[ip, v] == 0:
                        continue
                    f = ibuf[ip, v, ib_head[ip, v]]
                    pk = f // FM
                    idx = f % FM
                    tail = idx == pkt[pk, P_LEN] - 1
                    st = iv_state[ip, v]
                    moved = False
                    ejected = False
                    if st == 0:
                        dn = pkt[pk, P_DST]
                        dr = node_router[dn]
                        if dr == r:
                            eo = node_eject_op[dn]
                            if ej_owner[dn] == -1 and out_used[eo] == 0:
                                out_used[eo] = 1
                                if not tail:
                                    ej_owner[dn] = ip * V + v
                                    iv_state[ip, v] = 3
                                    iv_op[ip, v] = eo
                                moved = True
                                ejected = True
                        else:
                            o = route_op[r, dr]
                            ov = hop_vc[node_router[pkt[pk, P_SRC]], dr, pkt[pk, P_HOPS]]
                            if (ov_owner[o, ov] == -1 and cbq_cnt[o, ov] == 0
                                    and ostage[o, ov] < 0 and out_used[o] == 0):
                                ostage[o, ov] = f
                                o_stg[o] += 1
                                out_used[o] = 1
                                if not tail:
                                    ov_owner[o, ov] = ip * V + v
                                    iv_state[ip, v] = 1
                                    iv_op[ip, v] = o
                                    iv_ov[ip, v] = ov
                                moved = True
                                if central:
                                    stats[S_BYPASS] += 1
                            elif central and cb_in_used == 0 and cb_free[r] >= pkt[pk, P_LEN]:
                                cb_free[r] -= pkt[pk, P_LEN]
                                n_ent_free -= 1
                                e = ent_stack[n_ent_free]
                                q_ = cbq_cnt[o, ov]
                                cbq[o, ov, (cbq_head[o, ov] + q_) % cbq_cap] = e
                                cbq_cnt[o, ov] = q_ + 1
                                ent_pkt[e] = pk
                                ent_in[e] = 1
                                ent_out[e] = 0
                                ent_ready[e, 0] = t + 2
                                cb_in_used = 1
                                if not tail:
                                    iv_state[ip, v] = 2
                                    iv_ent[ip, v] = e
                                moved = True
                                stats[S_CBPATH] += 1
                    elif st == 1:
                        o = iv_op[ip, v]
                        ov = iv_ov[ip, v]
                        if ostage[o, ov] < 0 and out_used[o] == 0:
                            ostage[o, ov] = f
                            o_stg[o] += 1
                            out_used[o] = 1
                            if tail:
                                ov_owner[o, ov] = -1
                                iv_state[ip, v] = 0
                            moved = True
                    elif st == 2:
                        if cb_in_used == 0:
                            e = iv_ent[ip, v]
                            ent_ready[e, ent_in[e]] = t + 2
                            ent_in[e] += 1
                            cb_in_used = 1
                            if tail:
                                iv_state[ip, v] = 0
                            moved = True
                    else:
                        eo = iv_op[ip, v]
                        if out_used[eo] == 0:
                            out_used[eo] = 1
                            if tail:
                                ej_owner[pkt[pk, P_DST]] = -1
                                iv_state[ip, v] = 0
                            moved = True
                            ejected = True
                    if not moved:
                        continue
                    hd = ib_head[ip, v] + 1
                    ib_head[ip, v] = 0 if hd == dmax else hd
                    ib_cnt[ip, v] -= 1
                    r_occ[r] -= 1
                    ib_last[ip, v] = t
                    l = ip_link[ip]
                    if l >= 0 and not elastic:
                        slot = (t + link_lat[l] + 1) % wcap
                        cw[l, slot, v] += 1
                        cw_n[slot] += 1
                    if ejected:
                        stats[S_FLITS_OUT] += 1
                        if t >= win_lo and t < win_hi:
                            stats[S_FLITS_ACC] += 1
                        if tail:
                            stats[S_PKT_EJ] += 1
                            live -= 1
                            if pkt[pk, P_MEAS]:
                                lat = t - pkt[pk, P_GEN]
                                stats[S_EJ_MEAS] += 1
                                stats[S_LAT_SUM] += lat
                                stats[S_HOP_SUM] += pkt[pk, P_HOPS]
                                if lat > stats[S_LAT_MAX]:
                                    stats[S_LAT_MAX] = lat
                                meas_out -= 1
                                if n_rec < rec_cap:
                                    rec[n_rec, 0] = pkt[pk, P_SRC]
                                    rec[n_rec, 1] = pkt[pk, P_DST]
                                    rec[n_rec, 2] = pkt[pk, P_GEN]
                                    rec[n_rec, 3] = t
                                    rec[n_rec, 4] = pkt[pk, P_HOPS]
                                    rec[n_rec, 5] = pkt[pk, P_LEN]
                                    n_rec += 1
                            # a read (kind 1) triggers a reply back to the source
                            if replies and pkt[pk, P_KIND] == 1:
                                s2 = pkt[pk, P_DST]
                                if n_free > 0 and sq_cnt[s2] < sq_cap:
                                    n_free -= 1
                                    pr = free_stack[n_free]
                                    pkt[pr, P_SRC] = s2
                                    pkt[pr, P_DST] = pkt[pk, P_SRC]
                                    pkt[pr, P_LEN] = reply_len
                                    pkt[pr, P_GEN] = t
                                    pkt[pr, P_HOPS] = 0
                                    pkt[pr, P_KIND] = 2
                                    pkt[pr, P_MEAS] = 0
                                    sq[s2, (sq_head[s2] + sq_cnt[s2]) % sq_cap] = pr
                                    sq_cnt[s2] += 1
                                    live += 1
                                    stats[S_PKT_GEN] += 1
                                    stats[S_REPLIES] += 1
                                else:
                                    stats[S_DROPPED] += 1
                            free_stack[n_free] = pk
                            n_free += 1
                    break  # one flit per input port per cycle

        if debug:
            inflight = 0
            for i in range(NIP):
                for v in range(V):
                    inflight += ib_cnt[i, v]
            for l in range(NL):
                inflight += lq_tot[l]
            for o in range(NOP):
                for v in range(V):
                    if ostage[o, v] >= 0:
                        inflight += 1
            if central:
                for r in range(n_routers):
                    inflight += cb_cap - cb_free[r]
                # reserved but not yet written slots are not flits
                for o in range(NOP):
                    for v in range(V):
                        own = ov_owner[o, v]
                        if own <= -2:
                            e = -2 - own
                            inflight -= pkt[ent_pkt[e], P_LEN] - ent_in[e]
                        for qq in range(cbq_cnt[o, v]):
                            e = cbq[o, v, (cbq_head[o, v] + qq) % cbq_cap]
                            inflight -= pkt[ent_pkt[e], P_LEN] - ent_in[e]
            if stats[S_FLITS_IN] != stats[S_FLITS_OUT] + inflight:
                stats[S_CONS_ERR] += 1

        if (t & 1023) == 1023:
            for i in range(NIP):
                for v in range(V):
                    if ib_cnt[i, v] > 0 and t - ib_last[i, v] > stall_bound:
                        stats[S_STALL] = 1
                        stats[S_STALL_CYCLE] = t
            if stats[S_STALL]:
                t += 1
                break
        t += 1

    stats[S_END] = t
    stats[S_LIVE] = live
    return stats, rec[:n_rec]
