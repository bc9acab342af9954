"""Compiled list-decoding engine shared by the list and permutation decoders.

Every record owns, per recursion level, a reference to a slot holding the
soft vector entering that level (``Y``) and a slot holding the decided
``v``-codeword of that level (``V``).  Children inherit their parent's slots;
a slot is only replaced when a record writes a level whose slot is shared, and
since every write overwrites the whole level nothing is ever copied.
Information bits are not carried by the records either: each step stores the
parent index and the leaf decision, and the survivors are traced back at the
end.

Operation counting convention (``flops``): 1 per output symbol of the
``v``-recalculation, 5 per output symbol of the ``u``-recalculation, 1 per
symbol when a leaf metric is evaluated, 1 per candidate cost update, and one
comparison per candidate whenever a list has to be truncated.
"""
from __future__ import annotations

import numpy as np
from numba import njit

EPS = 1e-12
LN2 = np.log(2.0)


@njit(cache=True)
def full_transform(a, out, tmp, N):
    for i in range(N):
        out[i] = a[i]
    s = 1
    while s < N:
        for b in range(0, N, 2 * s):
            for i in range(s):
                tmp[b + i] = out[b + s + i]
                tmp[b + s + i] = out[b + s + i] ^ out[b + i]
        for i in range(N):
            out[i] = tmp[i]
        s *= 2


@njit(cache=True)
def full_inverse(c, out, tmp, N):
    for i in range(N):
        out[i] = c[i]
    s = N // 2
    while s >= 1:
        for b in range(0, N, 2 * s):
            for i in range(s):
                tmp[b + i] = out[b + i] ^ out[b + s + i]
                tmp[b + s + i] = out[b + i]
        for i in range(N):
            out[i] = tmp[i]
        s //= 2


@njit(cache=True)
def _log_half_prod(buf, row, start, N, sign):
    """Sum of log((1 + sign*y)/2) over a buffer segment, one log per 16 factors."""
    acc = 0.0
    prod = 1.0
    c = 0
    for j in range(start, start + N):
        prod *= 0.5 * (1.0 + sign * buf[row, j])
        c += 1
        if c == 16:
            acc += np.log(prod)
            prod = 1.0
            c = 0
    return acc + np.log(prod)


@njit(cache=True)
def _weakest(a, N, t, idx):
    """First ``t`` entries of ``idx`` become the indices of the ``t`` smallest ``a``."""
    for q in range(t):
        idx[q] = -1
    for j in range(N):
        v = a[j]
        q = t
        while q > 0 and (idx[q - 1] < 0 or a[idx[q - 1]] > v):
            q -= 1
        if q < t:
            for z in range(t - 1, q, -1):
                idx[z] = idx[z - 1]
            idx[q] = j


@njit(cache=True)
def _rank_desc(vals, nv, out):
    """Stable order of ``vals[:nv]`` by decreasing value, written into ``out``."""
    if nv > 48:
        o = np.argsort(-vals[:nv], kind="mergesort")
        for q in range(nv):
            out[q] = o[q]
        return
    for q in range(nv):
        v = vals[q]
        z = q
        while z > 0 and vals[out[z - 1]] < v:
            out[z] = out[z - 1]
            z -= 1
        out[z] = q


@njit(cache=True)
def _take_slot(slots, refs, free, nfree, rec, lev):
    s = slots[rec, lev]
    if s >= 0 and refs[lev, s] == 1:
        return s
    if s >= 0:
        refs[lev, s] -= 1
    nfree[lev] -= 1
    s = free[lev, nfree[lev]]
    refs[lev, s] = 1
    slots[rec, lev] = s
    return s


@njit(cache=True)
def _recount(nrec, slots, refs, free, nfree, P):
    nl = refs.shape[0]
    refs[:, :] = 0
    for j in range(nrec):
        for d in range(nl):
            s = slots[j, d]
            if s >= 0:
                refs[d, s] += 1
    for d in range(nl):
        c = 0
        for s in range(P - 1, -1, -1):
            if refs[d, s] == 0:
                free[d, c] = s
                c += 1
        nfree[d] = c


@njit(cache=True)
def run_list(yroot, m, L, B, leaf_depth, leaf_kind, leaf_off, leaf_width,
             leaf_ustart, leaf_bits, frozen, perm_map, zob, dedup, cmax):
    """Decode one input (``T`` permuted copies in ``yroot``) with list size ``L``.

    Returns ``(info, cost, branch, nrec, flops)`` sorted by decreasing cost;
    ``info`` rows are mapped back to the original information order through
    ``perm_map``.
    """
    T, n = yroot.shape
    k = frozen.size
    S = leaf_depth.size
    P = max(L, T)

    offY = np.zeros(m + 2, np.int64)
    for d in range(m + 1):
        offY[d + 1] = offY[d] + (n >> d)
    offV = np.zeros(m + 1, np.int64)
    for d in range(m):
        offV[d + 1] = offV[d] + (n >> (d + 1))
    nV = max(m, 1)
    Ybuf = np.empty((P, offY[m + 1]))
    Vbuf = np.empty((P, max(offV[m], 1)), np.uint8)
    slotY = -np.ones((P, m + 1), np.int64)
    slotV = -np.ones((P, nV), np.int64)
    nslotY = -np.ones((P, m + 1), np.int64)
    nslotV = -np.ones((P, nV), np.int64)
    refY = np.zeros((m + 1, P), np.int64)
    refV = np.zeros((nV, P), np.int64)
    freeY = np.empty((m + 1, P), np.int64)
    freeV = np.empty((nV, P), np.int64)
    nfreeY = np.empty(m + 1, np.int64)
    nfreeV = np.empty(nV, np.int64)

    cost = np.zeros(P)
    ncost = np.zeros(P)
    branch = np.zeros(P, np.int64)
    nbranch = np.zeros(P, np.int64)
    key = np.zeros(P, np.uint64)
    nkey = np.zeros(P, np.uint64)

    maxN = 1
    maxW = 1
    for s in range(S):
        maxN = max(maxN, n >> leaf_depth[s])
        maxW = max(maxW, leaf_width[s])
    c_parent = np.empty(cmax, np.int64)
    c_cost = np.empty(cmax)
    c_code = np.empty((cmax, maxN), np.uint8)
    c_info = np.empty((cmax, maxW), np.uint8)
    c_key = np.empty(cmax, np.uint64)
    keep = np.empty(cmax, np.int64)
    order = np.empty(cmax, np.int64)
    hist_parent = np.empty((S, P), np.int64)
    hist_info = np.empty((S, P, maxW), np.uint8)

    lp = np.empty(maxN)
    lq = np.empty(maxN)
    absy = np.empty((1, maxN))
    hard = np.empty(maxN, np.uint8)
    ta = np.empty(maxN, np.uint8)
    tb = np.empty(maxN, np.uint8)
    tt = np.empty(maxN, np.uint8)
    cur = np.empty(n, np.uint8)
    sub_cost = np.empty(1 << 16)
    sub_order = np.empty(1 << 16, np.int64)
    freepos = np.empty(maxW, np.int64)
    weak = np.empty(maxN, np.int64)
    delta = np.empty(maxN)

    # level 0 of record t is the t-th (permuted) input
    for t in range(T):
        for j in range(n):
            Ybuf[t, j] = yroot[t, j]
        slotY[t, 0] = t
        branch[t] = t
    nrec = T
    _recount(nrec, slotY, refY, freeY, nfreeY, P)
    _recount(nrec, slotV, refV, freeV, nfreeV, P)
    flops = 0

    for s in range(S):
        D = leaf_depth[s]
        N = n >> D
        off = leaf_off[s]
        W = leaf_width[s]
        kind = leaf_kind[s]
        nfz = 0
        for j in range(W):
            nfz += frozen[off + j]
        nc = 0
        for i in range(nrec):
            # --- recalculate down to the leaf
            start = 0
            if s > 0:
                p = leaf_ustart[s]
                half = n >> (p + 1)
                sr = slotY[i, p]
                so = offY[p]
                vr = slotV[i, p]
                vo = offV[p]
                dr = _take_slot(slotY, refY, freeY, nfreeY, i, p + 1)
                do = offY[p + 1]
                for j in range(half):
                    a = Ybuf[sr, so + j]
                    yh = Ybuf[sr, so + half + j] * (1.0 - 2.0 * Vbuf[vr, vo + j])
                    Ybuf[dr, do + j] = min(max((a + yh) / (1.0 + a * yh), -1.0 + EPS), 1.0 - EPS)
                flops += 5 * half
                start = p + 1
            for d in range(start, D):
                half = n >> (d + 1)
                sr = slotY[i, d]
                so = offY[d]
                dr = _take_slot(slotY, refY, freeY, nfreeY, i, d + 1)
                do = offY[d + 1]
                for j in range(half):
                    Ybuf[dr, do + j] = Ybuf[sr, so + j] * Ybuf[sr, so + half + j]
                flops += half
            yr = slotY[i, D]
            yo = offY[D]

            # --- leaf candidates
            base_nc = nc
            flops += N
            if kind == 0:
                s0 = _log_half_prod(Ybuf, yr, yo, N, 1.0)
                s1 = _log_half_prod(Ybuf, yr, yo, N, -1.0)
                na = 1 if frozen[off] else 2
                for a in range(na):
                    c_parent[nc] = i
                    c_cost[nc] = cost[i] + (s0 if a == 0 else s1)
                    c_info[nc, 0] = a
                    nc += 1
            elif nfz == 0:
                for j in range(N):
                    v = Ybuf[yr, yo + j]
                    hard[j] = 1 if v < 0.0 else 0
                    absy[0, j] = abs(v)
                best = _log_half_prod(absy, 0, 0, N, 1.0)
                tnum = N if B == 0 else min(B, N)
                _weakest(absy[0], N, tnum, weak)
                for b in range(tnum):
                    a = absy[0, weak[b]]
                    delta[b] = np.log1p(a) - np.log1p(-a)
                nsub = 1 << tnum
                for msk in range(nsub):
                    c = best
                    for b in range(tnum):
                        if (msk >> b) & 1:
                            c -= delta[b]
                    sub_cost[msk] = c
                _rank_desc(sub_cost, nsub, sub_order)
                total = nsub if B == 0 else min(B, nsub)
                # words ranked below L in one record can never survive the truncation
                total = min(total, L)
                for q in range(total):
                    msk = sub_order[q]
                    for j in range(N):
                        ta[j] = hard[j]
                    for b in range(tnum):
                        if (msk >> b) & 1:
                            ta[weak[b]] ^= 1
                    c_parent[nc] = i
                    c_cost[nc] = cost[i] + sub_cost[msk]
                    for j in range(N):
                        c_code[nc, j] = ta[j]
                    full_inverse(ta, tb, tt, N)
                    for j in range(W):
                        c_info[nc, j] = tb[j]
                    nc += 1
            else:
                for j in range(N):
                    v = Ybuf[yr, yo + j]
                    lp[j] = np.log1p(v) - LN2
                    lq[j] = np.log1p(-v) - LN2
                F = 0
                for j in range(W):
                    if frozen[off + j] == 0:
                        freepos[F] = j
                        F += 1
                nsub = 1 << F
                for cmb in range(nsub):
                    for j in range(W):
                        ta[j] = 0
                    for t in range(F):
                        ta[freepos[t]] = (cmb >> (F - 1 - t)) & 1
                    full_transform(ta, tb, tt, N)
                    c = 0.0
                    for j in range(N):
                        c += lq[j] if tb[j] else lp[j]
                    sub_cost[cmb] = c
                _rank_desc(sub_cost, nsub, sub_order)
                total = min(nsub if B == 0 else min(B, nsub), L)
                for q in range(total):
                    cmb = sub_order[q]
                    for j in range(W):
                        ta[j] = 0
                    for t in range(F):
                        ta[freepos[t]] = (cmb >> (F - 1 - t)) & 1
                    full_transform(ta, tb, tt, N)
                    c_parent[nc] = i
                    c_cost[nc] = cost[i] + sub_cost[cmb]
                    for j in range(N):
                        c_code[nc, j] = tb[j]
                    for j in range(W):
                        c_info[nc, j] = ta[j]
                    nc += 1
            flops += nc - base_nc
            if dedup:
                t = branch[i]
                for q in range(base_nc, nc):
                    h = key[i]
                    for j in range(W):
                        h ^= zob[perm_map[t, off + j], c_info[q, j]]
                    c_key[q] = h

        # --- select the survivors
        _rank_desc(c_cost, nc, order)
        if nc > L:
            flops += nc
        nkeep = 0
        if dedup:
            rank = np.empty(nc, np.int64)
            for q in range(nc):
                rank[order[q]] = q
            byk = np.argsort(c_key[:nc], kind="mergesort")
            chosen = np.zeros(nc, np.uint8)
            q = 0
            while q < nc:
                e = q
                bc = byk[q]
                while e + 1 < nc and c_key[byk[e + 1]] == c_key[byk[q]]:
                    e += 1
                    cand = byk[e]
                    if c_cost[cand] > c_cost[bc] or (
                            c_cost[cand] == c_cost[bc]
                            and (branch[c_parent[cand]] < branch[c_parent[bc]]
                                 or (branch[c_parent[cand]] == branch[c_parent[bc]]
                                     and rank[cand] < rank[bc]))):
                        bc = cand
                chosen[bc] = 1
                q = e + 1
            for q in range(nc):
                c = order[q]
                if chosen[c]:
                    keep[nkeep] = c
                    nkeep += 1
                    if nkeep == L:
                        break
        else:
            nkeep = min(L, nc)
            for q in range(nkeep):
                keep[q] = order[q]

        for j in range(nkeep):
            c = keep[j]
            par = c_parent[c]
            ncost[j] = c_cost[c]
            nbranch[j] = branch[par]
            if dedup:
                nkey[j] = c_key[c]
            hist_parent[s, j] = par
            for q in range(W):
                hist_info[s, j, q] = c_info[c, q]
            for d in range(m + 1):
                nslotY[j, d] = slotY[par, d]
            for d in range(nV):
                nslotV[j, d] = slotV[par, d]
        cost, ncost = ncost, cost
        branch, nbranch = nbranch, branch
        key, nkey = nkey, key
        slotY, nslotY = nslotY, slotY
        slotV, nslotV = nslotV, slotV
        nrec = nkeep
        _recount(nrec, slotY, refY, freeY, nfreeY, P)
        _recount(nrec, slotV, refV, freeV, nfreeV, P)

        # --- fold the leaf decision back up to the level that stores it
        if s < S - 1:
            for j in range(nrec):
                c = keep[j]
                if kind == 0:
                    for q in range(N):
                        cur[q] = c_info[c, 0]
                else:
                    for q in range(N):
                        cur[q] = c_code[c, q]
                ln = N
                lev = D
                while lev > 0:
                    pl = lev - 1
                    if leaf_bits[s, pl] == 0:
                        ds = _take_slot(slotV, refV, freeV, nfreeV, j, pl)
                        o = offV[pl]
                        for q in range(ln):
                            Vbuf[ds, o + q] = cur[q]
                        break
                    vr = slotV[j, pl]
                    o = offV[pl]
                    for q in range(ln):
                        cur[ln + q] = cur[q] ^ Vbuf[vr, o + q]
                    ln *= 2
                    lev = pl

    out_info = np.zeros((nrec, k), np.uint8)
    for j in range(nrec):
        t = branch[j]
        r = j
        for s in range(S - 1, -1, -1):
            off = leaf_off[s]
            for q in range(leaf_width[s]):
                out_info[j, perm_map[t, off + q]] = hist_info[s, r, q]
            r = hist_parent[s, r]
    return out_info, cost[:nrec].copy(), branch[:nrec].copy(), nrec, flops


@njit(cache=True)
def run_batch(Y, m, L, B, leaf_depth, leaf_kind, leaf_off, leaf_width,
              leaf_ustart, leaf_bits, frozen, perm_map, zob, dedup, cmax):
    """Best record for each of ``Y.shape[0]`` inputs of shape ``(T, n)``."""
    nb = Y.shape[0]
    k = frozen.size
    best_info = np.zeros((nb, k), np.uint8)
    best_cost = np.zeros(nb)
    flops = np.zeros(nb, np.int64)
    for b in range(nb):
        info, cost, br, nrec, fl = run_list(Y[b], m, L, B, leaf_depth, leaf_kind, leaf_off,
                                            leaf_width, leaf_ustart, leaf_bits, frozen,
                                            perm_map, zob, dedup, cmax)
        best_info[b] = info[0]
        best_cost[b] = cost[0]
        flops[b] = fl
    return best_info, best_cost, flops
