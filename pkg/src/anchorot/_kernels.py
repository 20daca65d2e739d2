"""Numba kernels for the hot loops: 1D OT merges, the Fenwick sweep, and
plan accumulation.  All kernels release the GIL so pairwise workloads can
run on thread pools."""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)

# f is maintained incrementally during the sweep; recompute it exactly from
# the trees this often to bound accumulated roundoff.
RECOMPUTE_PERIOD = 1 << 16


@njit(**_JIT)
def ot1d_pp(xv, xw, yv, yw, p):
    """OT_p^p between two sorted weighted atom lists (two-pointer merge)."""
    nx = xv.shape[0]
    ny = yv.shape[0]
    i = 0
    j = 0
    ru = xw[0]
    rv = yw[0]
    total = 0.0
    while True:
        d = ru if ru < rv else rv
        diff = xv[i] - yv[j]
        if diff < 0.0:
            diff = -diff
        if p == 1:
            total += d * diff
        else:
            total += d * diff * diff
        ru -= d
        rv -= d
        if ru <= 0.0:
            i += 1
            if i >= nx:
                break
            ru = xw[i]
        if rv <= 0.0:
            j += 1
            if j >= ny:
                break
            rv = yw[j]
    return total


@njit(**_JIT)
def cross_naive(a1, off1, v1, w1, a2, off2, v2, w2, p):
    """Sum_ij a1_i a2_j OT_p^p(anchor1_i, anchor2_j), cubic time."""
    n = a1.shape[0]
    m = a2.shape[0]
    total = 0.0
    for i in range(n):
        xi = v1[off1[i]:off1[i + 1]]
        wi = w1[off1[i]:off1[i + 1]]
        row = 0.0
        for j in range(m):
            row += a2[j] * ot1d_pp(xi, wi, v2[off2[j]:off2[j + 1]], w2[off2[j]:off2[j + 1]], p)
        total += a1[i] * row
    return total


@njit(**_JIT)
def pairwise_ot1d(off1, v1, w1, off2, v2, w2, p, out):
    n = off1.shape[0] - 1
    m = off2.shape[0] - 1
    for i in range(n):
        xi = v1[off1[i]:off1[i + 1]]
        wi = w1[off1[i]:off1[i + 1]]
        for j in range(m):
            out[i, j] = ot1d_pp(xi, wi, v2[off2[j]:off2[j + 1]], w2[off2[j]:off2[j + 1]], p)


@njit(**_JIT)
def sinkhorn_iterate(M, loga, logb, b, eps, rel_tol, marg_tol, max_iter, f, g, P):
    """Alternating log-domain Sinkhorn updates on potentials f, g (in place).

    Returns (iterations, converged).  Convergence requires both a small
    relative L1 plan change between sweeps and tight column marginals
    (rows are exact after every f update).
    """
    n, m = M.shape
    P_prev = np.zeros((n, m))
    have_prev = False
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        for j in range(m):
            mx = -np.inf
            for i in range(n):
                v = (f[i] - M[i, j]) / eps
                if v > mx:
                    mx = v
            s = 0.0
            for i in range(n):
                s += np.exp((f[i] - M[i, j]) / eps - mx)
            g[j] = eps * (logb[j] - (mx + np.log(s)))
        for i in range(n):
            mx = -np.inf
            for j in range(m):
                v = (g[j] - M[i, j]) / eps
                if v > mx:
                    mx = v
            s = 0.0
            for j in range(m):
                s += np.exp((g[j] - M[i, j]) / eps - mx)
            f[i] = eps * (loga[i] - (mx + np.log(s)))
        rel = 0.0
        for i in range(n):
            for j in range(m):
                val = np.exp((f[i] + g[j] - M[i, j]) / eps)
                P[i, j] = val
                d = val - P_prev[i, j]
                rel += d if d >= 0.0 else -d
                P_prev[i, j] = val
        col_res = 0.0
        for j in range(m):
            cs = 0.0
            for i in range(n):
                cs += P[i, j]
            d = cs - b[j]
            if d < 0.0:
                d = -d
            if d > col_res:
                col_res = d
        if have_prev and rel < rel_tol and col_res < marg_tol:
            converged = True
            break
        have_prev = True
    return it, converged


@njit(inline="always")
def _fen_add(tree, pos, x):
    j = pos + 1
    n = tree.shape[0]
    while j <= n:
        tree[j - 1] += x
        j += j & (-j)


@njit(inline="always")
def _fen_prefix(tree, count):
    s = 0.0
    j = count
    while j > 0:
        s += tree[j - 1]
        j -= j & (-j)
    return s


@njit(**_JIT)
def sweep_cross(
    a1,
    a2,
    sz1,
    sz2,
    ev_val,
    ev_side,
    ev_anchor,
    ev_newval,
    ev_newidx,
    ev_opplt,
):
    """Expected pairwise 1D 1-Wasserstein cross-sum between two families.

    Events are the sorted CDF change points of all anchors on both sides.
    Two Fenwick-tree pairs (mass, mass * CDF value) per side support the
    four-term update of the running total variation f; the answer is the
    integral of f across segments.

    Event arrays are precomputed: ``ev_newval``/``ev_newidx`` give the
    moving anchor's CDF value after the event and its position in the own
    side's compressed coordinate table, ``ev_opplt`` the number of opposite
    side coordinates strictly below the new value.
    """
    n = a1.shape[0]
    m = a2.shape[0]
    L = ev_val.shape[0]

    s_tree1 = np.zeros(sz1)
    t_tree1 = np.zeros(sz1)
    s_tree2 = np.zeros(sz2)
    t_tree2 = np.zeros(sz2)
    # every anchor starts registered at CDF value 0 (table position 0)
    _fen_add(s_tree1, 0, a1.sum())
    _fen_add(s_tree2, 0, a2.sum())
    t_total1 = 0.0
    t_total2 = 0.0

    cur_val1 = np.zeros(n)
    cur_val2 = np.zeros(m)
    cur_own1 = np.zeros(n, dtype=np.int64)
    cur_own2 = np.zeros(m, dtype=np.int64)
    cur_opp1 = np.zeros(n, dtype=np.int64)
    cur_opp2 = np.zeros(m, dtype=np.int64)

    W = 0.0
    f = 0.0
    for l in range(L):
        side = ev_side[l]
        i = ev_anchor[l]
        if side == 0:
            w = a1[i]
            c = cur_val1[i]
            lt = cur_opp1[i]
            own_idx = cur_own1[i]
            s_opp = s_tree2
            t_opp = t_tree2
            t_opp_total = t_total2
            s_own = s_tree1
            t_own = t_tree1
        else:
            w = a2[i]
            c = cur_val2[i]
            lt = cur_opp2[i]
            own_idx = cur_own2[i]
            s_opp = s_tree1
            t_opp = t_tree1
            t_opp_total = t_total1
            s_own = s_tree2
            t_own = t_tree2

        # drop the moving anchor's old contribution against the other side
        s_lt = _fen_prefix(s_opp, lt)
        t_lt = _fen_prefix(t_opp, lt)
        f -= w * (s_lt * c - t_lt)
        f -= w * ((t_opp_total - t_lt) - (1.0 - s_lt) * c)

        # move its registration to the new CDF value
        c2 = ev_newval[l]
        ni = ev_newidx[l]
        _fen_add(s_own, own_idx, -w)
        _fen_add(t_own, own_idx, -w * c)
        _fen_add(s_own, ni, w)
        _fen_add(t_own, ni, w * c2)

        lt2 = ev_opplt[l]
        if side == 0:
            t_total1 += w * (c2 - c)
            cur_val1[i] = c2
            cur_own1[i] = ni
            cur_opp1[i] = lt2
        else:
            t_total2 += w * (c2 - c)
            cur_val2[i] = c2
            cur_own2[i] = ni
            cur_opp2[i] = lt2

        # add the new contribution (opposite trees are unchanged)
        s_lt2 = _fen_prefix(s_opp, lt2)
        t_lt2 = _fen_prefix(t_opp, lt2)
        f += w * (s_lt2 * c2 - t_lt2)
        f += w * ((t_opp_total - t_lt2) - (1.0 - s_lt2) * c2)

        if (l + 1) % RECOMPUTE_PERIOD == 0:
            f = 0.0
            for x in range(n):
                cx = cur_val1[x]
                ltx = cur_opp1[x]
                s_b = _fen_prefix(s_tree2, ltx)
                t_b = _fen_prefix(t_tree2, ltx)
                f += a1[x] * (s_b * cx - t_b)
                f += a1[x] * ((t_total2 - t_b) - (1.0 - s_b) * cx)

        if l + 1 < L:
            W += (ev_val[l + 1] - ev_val[l]) * f
    return W


@njit(inline="always")
def _fen_add2(tree, pos, xs, xt):
    # S and T interleaved (stride 2) so one traversal updates both
    j = pos + 1
    n = tree.shape[0] >> 1
    while j <= n:
        tree[2 * (j - 1)] += xs
        tree[2 * (j - 1) + 1] += xt
        j += j & (-j)


@njit(inline="always")
def _fen_prefix2(tree, count):
    s = 0.0
    t = 0.0
    j = count
    while j > 0:
        s += tree[2 * (j - 1)]
        t += tree[2 * (j - 1) + 1]
        j -= j & (-j)
    return s, t


@njit(inline="always")
def _heap_push(hv, hc, size, v, code):
    i = size
    hv[i] = v
    hc[i] = code
    while i > 0:
        parent = (i - 1) >> 1
        if hv[parent] <= hv[i]:
            break
        hv[parent], hv[i] = hv[i], hv[parent]
        hc[parent], hc[i] = hc[i], hc[parent]
        i = parent
    return size + 1


@njit(inline="always")
def _heap_replace(hv, hc, size, v, code):
    # replace the root and sift down; cheaper than pop followed by push
    hv[0] = v
    hc[0] = code
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        small = left
        right = left + 1
        if right < size and hv[right] < hv[left]:
            small = right
        if hv[i] <= hv[small]:
            break
        hv[i], hv[small] = hv[small], hv[i]
        hc[i], hc[small] = hc[small], hc[i]
        i = small


@njit(inline="always")
def _heap_pop(hv, hc, size):
    size -= 1
    _heap_replace(hv, hc, size, hv[size], hc[size])
    return size


@njit(**_JIT)
def fused_energy_merge(
    a1,
    a2,
    sz1,
    sz2,
    off1,
    vals1,
    pref1,
    newidx1,
    opplt1,
    off2,
    vals2,
    pref2,
    newidx2,
    opplt2,
):
    """Fused energy sweep driven by a k-way merge of the per-anchor sorted
    value rows instead of a pre-sorted global event list.

    One cursor per anchor lives in a binary min-heap keyed by the next atom
    value; an anchor never has two pending events, so its atoms are always
    consumed in increasing prefix order.  Returns (cross, within1, within2).
    """
    n = a1.shape[0]
    m = a2.shape[0]

    tree1 = np.zeros(2 * sz1)
    tree2 = np.zeros(2 * sz2)
    _fen_add2(tree1, 0, a1.sum(), 0.0)
    _fen_add2(tree2, 0, a2.sum(), 0.0)
    t_total1 = 0.0
    t_total2 = 0.0

    cur_val1 = np.zeros(n)
    cur_val2 = np.zeros(m)
    cur_own1 = np.zeros(n, dtype=np.int64)
    cur_own2 = np.zeros(m, dtype=np.int64)
    cur_opp1 = np.zeros(n, dtype=np.int64)
    cur_opp2 = np.zeros(m, dtype=np.int64)
    cursor1 = np.zeros(n, dtype=np.int64)
    cursor2 = np.zeros(m, dtype=np.int64)

    hv = np.empty(n + m)
    hc = np.empty(n + m, dtype=np.int64)
    size = 0
    for i in range(n):
        if off1[i + 1] > off1[i]:
            size = _heap_push(hv, hc, size, vals1[off1[i]], i)
    for i in range(m):
        if off2[i + 1] > off2[i]:
            size = _heap_push(hv, hc, size, vals2[off2[i]], n + i)

    w_cross = 0.0
    w_within1 = 0.0
    w_within2 = 0.0
    f12 = 0.0
    f11 = 0.0
    f22 = 0.0
    prev = hv[0] if size > 0 else 0.0
    until_recompute = RECOMPUTE_PERIOD
    while size > 0:
        v = hv[0]
        code = hc[0]
        w_cross += (v - prev) * f12
        w_within1 += (v - prev) * f11
        w_within2 += (v - prev) * f22
        prev = v

        if code < n:
            i = code
            j = off1[i] + cursor1[i]
            w = a1[i]
            c = cur_val1[i]
            own_idx = cur_own1[i]
            opp_lt = cur_opp1[i]
            own_tree = tree1
            opp_tree = tree2
            t_own = t_total1
            t_opp = t_total2
            c2 = pref1[j]
            ni = newidx1[j]
            own_lt2 = ni
            opp_lt2 = opplt1[j]
        else:
            i = code - n
            j = off2[i] + cursor2[i]
            w = a2[i]
            c = cur_val2[i]
            own_idx = cur_own2[i]
            opp_lt = cur_opp2[i]
            own_tree = tree2
            opp_tree = tree1
            t_own = t_total2
            t_opp = t_total1
            c2 = pref2[j]
            ni = newidx2[j]
            own_lt2 = ni
            opp_lt2 = opplt2[j]

        # old cross contribution of the moving anchor
        s_lt, t_lt = _fen_prefix2(opp_tree, opp_lt)
        f12 -= w * ((s_lt * c - t_lt) + ((t_opp - t_lt) - (1.0 - s_lt) * c))
        # old within contribution; the self term |c - c| vanishes
        s_o, t_o = _fen_prefix2(own_tree, own_idx)
        dwn = 2.0 * w * ((s_o * c - t_o) + ((t_own - t_o) - (1.0 - s_o) * c))

        _fen_add2(own_tree, own_idx, -w, -w * c)
        _fen_add2(own_tree, ni, w, w * c2)
        t_own += w * (c2 - c)

        s_o2, t_o2 = _fen_prefix2(own_tree, own_lt2)
        dwn = 2.0 * w * ((s_o2 * c2 - t_o2) + ((t_own - t_o2) - (1.0 - s_o2) * c2)) - dwn

        s_lt2, t_lt2 = _fen_prefix2(opp_tree, opp_lt2)
        f12 += w * ((s_lt2 * c2 - t_lt2) + ((t_opp - t_lt2) - (1.0 - s_lt2) * c2))

        if code < n:
            f11 += dwn
            t_total1 = t_own
            cur_val1[i] = c2
            cur_own1[i] = ni
            cur_opp1[i] = opp_lt2
            cursor1[i] += 1
            if off1[i] + cursor1[i] < off1[i + 1]:
                _heap_replace(hv, hc, size, vals1[off1[i] + cursor1[i]], code)
            else:
                size = _heap_pop(hv, hc, size)
        else:
            f22 += dwn
            t_total2 = t_own
            cur_val2[i] = c2
            cur_own2[i] = ni
            cur_opp2[i] = opp_lt2
            cursor2[i] += 1
            if off2[i] + cursor2[i] < off2[i + 1]:
                _heap_replace(hv, hc, size, vals2[off2[i] + cursor2[i]], code)
            else:
                size = _heap_pop(hv, hc, size)

        until_recompute -= 1
        if until_recompute == 0:
            until_recompute = RECOMPUTE_PERIOD
            f12 = 0.0
            f11 = 0.0
            f22 = 0.0
            for x in range(n):
                cx = cur_val1[x]
                s_b, t_b = _fen_prefix2(tree2, cur_opp1[x])
                f12 += a1[x] * ((s_b * cx - t_b) + ((t_total2 - t_b) - (1.0 - s_b) * cx))
                s_b, t_b = _fen_prefix2(tree1, cur_own1[x])
                f11 += a1[x] * ((s_b * cx - t_b) + ((t_total1 - t_b) - (1.0 - s_b) * cx))
            for x in range(m):
                cx = cur_val2[x]
                s_b, t_b = _fen_prefix2(tree2, cur_own2[x])
                f22 += a2[x] * ((s_b * cx - t_b) + ((t_total2 - t_b) - (1.0 - s_b) * cx))

    return w_cross, w_within1, w_within2


@njit(**_JIT)
def fused_energy_merge_uniform(a1, a2, R1, vals1, R2, vals2):
    """Fused energy sweep for families whose anchors all have R equal-weight
    atoms.  The CDF after an anchor's k-th atom is (k+1)/R and the coordinate
    tables are the grids {0, 1/R, ..., 1}, so the prefix value, the own-table
    index, and the opposite-side strictly-less count are pure arithmetic in
    the cursor position; no per-event side arrays are read.
    Returns (cross, within1, within2)."""
    n = a1.shape[0]
    m = a2.shape[0]

    tree1 = np.zeros(2 * (R1 + 1))
    tree2 = np.zeros(2 * (R2 + 1))
    _fen_add2(tree1, 0, a1.sum(), 0.0)
    _fen_add2(tree2, 0, a2.sum(), 0.0)
    t_total1 = 0.0
    t_total2 = 0.0

    cur_val1 = np.zeros(n)
    cur_val2 = np.zeros(m)
    cur_own1 = np.zeros(n, dtype=np.int64)
    cur_own2 = np.zeros(m, dtype=np.int64)
    cur_opp1 = np.zeros(n, dtype=np.int64)
    cur_opp2 = np.zeros(m, dtype=np.int64)
    cursor1 = np.zeros(n, dtype=np.int64)
    cursor2 = np.zeros(m, dtype=np.int64)

    hv = np.empty(n + m)
    hc = np.empty(n + m, dtype=np.int64)
    size = 0
    for i in range(n):
        size = _heap_push(hv, hc, size, vals1[i * R1], i)
    for i in range(m):
        size = _heap_push(hv, hc, size, vals2[i * R2], n + i)

    w_cross = 0.0
    w_within1 = 0.0
    w_within2 = 0.0
    f12 = 0.0
    f11 = 0.0
    f22 = 0.0
    prev = hv[0] if size > 0 else 0.0
    until_recompute = RECOMPUTE_PERIOD
    while size > 0:
        v = hv[0]
        code = hc[0]
        w_cross += (v - prev) * f12
        w_within1 += (v - prev) * f11
        w_within2 += (v - prev) * f22
        prev = v

        if code < n:
            i = code
            k = cursor1[i]
            w = a1[i]
            c = cur_val1[i]
            own_idx = cur_own1[i]
            opp_lt = cur_opp1[i]
            own_tree = tree1
            opp_tree = tree2
            t_own = t_total1
            t_opp = t_total2
            ni = k + 1
            c2 = ni / R1
            if R1 == R2:
                opp_lt2 = ni
            else:
                q = ni * R2 // R1
                opp_lt2 = q + (1 if ni * R2 - q * R1 != 0 else 0)
        else:
            i = code - n
            k = cursor2[i]
            w = a2[i]
            c = cur_val2[i]
            own_idx = cur_own2[i]
            opp_lt = cur_opp2[i]
            own_tree = tree2
            opp_tree = tree1
            t_own = t_total2
            t_opp = t_total1
            ni = k + 1
            c2 = ni / R2
            if R1 == R2:
                opp_lt2 = ni
            else:
                q = ni * R1 // R2
                opp_lt2 = q + (1 if ni * R1 - q * R2 != 0 else 0)

        s_lt, t_lt = _fen_prefix2(opp_tree, opp_lt)
        f12 -= w * ((s_lt * c - t_lt) + ((t_opp - t_lt) - (1.0 - s_lt) * c))
        s_o, t_o = _fen_prefix2(own_tree, own_idx)
        dwn = 2.0 * w * ((s_o * c - t_o) + ((t_own - t_o) - (1.0 - s_o) * c))

        _fen_add2(own_tree, own_idx, -w, -w * c)
        _fen_add2(own_tree, ni, w, w * c2)
        t_own += w * (c2 - c)

        s_o2, t_o2 = _fen_prefix2(own_tree, ni)
        dwn = 2.0 * w * ((s_o2 * c2 - t_o2) + ((t_own - t_o2) - (1.0 - s_o2) * c2)) - dwn

        s_lt2, t_lt2 = _fen_prefix2(opp_tree, opp_lt2)
        f12 += w * ((s_lt2 * c2 - t_lt2) + ((t_opp - t_lt2) - (1.0 - s_lt2) * c2))

        if code < n:
            f11 += dwn
            t_total1 = t_own
            cur_val1[i] = c2
            cur_own1[i] = ni
            cur_opp1[i] = opp_lt2
            cursor1[i] = k + 1
            if k + 1 < R1:
                _heap_replace(hv, hc, size, vals1[i * R1 + k + 1], code)
            else:
                size = _heap_pop(hv, hc, size)
        else:
            f22 += dwn
            t_total2 = t_own
            cur_val2[i] = c2
            cur_own2[i] = ni
            cur_opp2[i] = opp_lt2
            cursor2[i] = k + 1
            if k + 1 < R2:
                _heap_replace(hv, hc, size, vals2[i * R2 + k + 1], code)
            else:
                size = _heap_pop(hv, hc, size)

        until_recompute -= 1
        if until_recompute == 0:
            until_recompute = RECOMPUTE_PERIOD
            f12 = 0.0
            f11 = 0.0
            f22 = 0.0
            for x in range(n):
                cx = cur_val1[x]
                s_b, t_b = _fen_prefix2(tree2, cur_opp1[x])
                f12 += a1[x] * ((s_b * cx - t_b) + ((t_total2 - t_b) - (1.0 - s_b) * cx))
                s_b, t_b = _fen_prefix2(tree1, cur_own1[x])
                f11 += a1[x] * ((s_b * cx - t_b) + ((t_total1 - t_b) - (1.0 - s_b) * cx))
            for x in range(m):
                cx = cur_val2[x]
                s_b, t_b = _fen_prefix2(tree2, cur_own2[x])
                f22 += a2[x] * ((s_b * cx - t_b) + ((t_total2 - t_b) - (1.0 - s_b) * cx))

    return w_cross, w_within1, w_within2


@njit(**_JIT)
def aep_accumulate(a1, a2, order1, order2, plan):
    """Average of the monotone local couplings over all anchor pairs.

    ``order1[i]`` is the value-sorted point order of anchor i's atoms
    (stable under ties).  Each local north-west-corner coupling is
    scattered back to original point indices and weighted by a1_i * a2_j.
    """
    n = a1.shape[0]
    m = a2.shape[0]
    for i in range(n):
        for j in range(m):
            coef = a1[i] * a2[j]
            if coef == 0.0:
                continue
            pi = 0
            pj = 0
            ru = a1[order1[i, 0]]
            rv = a2[order2[j, 0]]
            while True:
                d = ru if ru < rv else rv
                plan[order1[i, pi], order2[j, pj]] += coef * d
                ru -= d
                rv -= d
                if ru <= 0.0:
                    pi += 1
                    if pi >= n:
                        break
                    ru = a1[order1[i, pi]]
                if rv <= 0.0:
                    pj += 1
                    if pj >= m:
                        break
                    rv = a2[order2[j, pj]]
