"""Compiled inner loops for the lattice solver.

Vectors live in an internal column order in which the first ``c`` columns are
already lifted and column ``c`` is being lifted. Support masks cover columns
``0..c`` and are packed 64 columns per word.
"""

import numpy as np
from numba import njit

# lift_step status codes
DONE = 0
OUT_OF_BUDGET = 1


@njit(cache=True)
def _masks(V, cnt, ncols):
    W = (ncols + 63) // 64
    pos = np.zeros((V.shape[0], W), dtype=np.uint64)
    neg = np.zeros((V.shape[0], W), dtype=np.uint64)
    for i in range(cnt):
        _set_masks(V, i, ncols, pos, neg)
    return pos, neg


@njit(cache=True)
def _set_masks(V, i, ncols, pos, neg):
    for w in range(pos.shape[1]):
        pos[i, w] = 0
        neg[i, w] = 0
    for k in range(ncols):
        x = V[i, k]
        if x > 0:
            pos[i, k >> 6] |= np.uint64(1) << np.uint64(k & 63)
        elif x < 0:
            neg[i, k >> 6] |= np.uint64(1) << np.uint64(k & 63)


@njit(cache=True)
def _reducible(s, spos, sneg, V, pos, neg, nrm, cnt, level, ncols):
    """True if some stored vector h with norm <= level satisfies h <= s conformally."""
    W = pos.shape[1]
    for h in range(cnt):
        if nrm[h] > level:
            continue
        ok = True
        for w in range(W):
            if (pos[h, w] & ~spos[w]) != 0 or (neg[h, w] & ~sneg[w]) != 0:
                ok = False
                break
        if not ok:
            continue
        for k in range(ncols):
            a = V[h, k]
            if a > 0:
                if a > s[k]:
                    ok = False
                    break
            elif a < 0:
                if a < s[k]:
                    ok = False
                    break
        if ok:
            return True
    return False


@njit(cache=True)
def _grow(V, nrm, pos, neg):
    cap = V.shape[0] * 2
    V2 = np.zeros((cap, V.shape[1]), dtype=V.dtype)
    V2[: V.shape[0]] = V
    n2 = np.zeros(cap, dtype=nrm.dtype)
    n2[: nrm.shape[0]] = nrm
    p2 = np.zeros((cap, pos.shape[1]), dtype=pos.dtype)
    p2[: pos.shape[0]] = pos
    q2 = np.zeros((cap, neg.shape[1]), dtype=neg.dtype)
    q2[: neg.shape[0]] = neg
    return V2, n2, p2, q2


@njit(cache=True)
def _sorted_by_norm(idx, nrm):
    keys = np.empty(idx.shape[0], dtype=np.int64)
    for t in range(idx.shape[0]):
        keys[t] = nrm[idx[t]]
    order = np.argsort(keys, kind="mergesort")
    out = np.empty_like(idx)
    outn = np.empty_like(keys)
    for t in range(idx.shape[0]):
        out[t] = idx[order[t]]
        outn[t] = keys[order[t]]
    return out, outn


@njit(cache=True)
def lift_step(V, cnt, c, restricted, upper, max_norm, start_level, budget):
    """Complete the vector set after lifting column ``c``.

    On entry ``V[:cnt]`` holds the minimal elements w.r.t. columns ``0..c-1``.
    Critical vectors ``f + g`` (sign-compatible on ``0..c-1``, opposite signs
    at ``c``) are processed by increasing norm over ``0..c-1`` and kept iff no
    stored vector is conformally below them on ``0..c``. Vectors exceeding the
    truncation bounds are dropped. If ``restricted``, vectors negative at ``c``
    are removed at the end.

    Returns ``(V, cnt, status, last_level, work)``; on ``OUT_OF_BUDGET`` the
    set is complete for every norm ``<= last_level``.
    """
    ncols = c + 1
    n = V.shape[1]
    nrm = np.zeros(V.shape[0], dtype=np.int64)
    for i in range(cnt):
        t = 0
        for k in range(c):
            t += abs(V[i, k])
        nrm[i] = t
    pos, neg = _masks(V, cnt, ncols)
    W = pos.shape[1]
    lowmask = np.zeros(W, dtype=np.uint64)
    for k in range(c):
        lowmask[k >> 6] |= np.uint64(1) << np.uint64(k & 63)

    np_ = 0
    nn_ = 0
    for i in range(cnt):
        if V[i, c] > 0:
            np_ += 1
        elif V[i, c] < 0:
            nn_ += 1
    P = np.empty(np_, dtype=np.int64)
    N = np.empty(nn_, dtype=np.int64)
    a = 0
    b = 0
    for i in range(cnt):
        if V[i, c] > 0:
            P[a] = i
            a += 1
        elif V[i, c] < 0:
            N[b] = i
            b += 1
    P, Pn = _sorted_by_norm(P, nrm)
    N, Nn = _sorted_by_norm(N, nrm)

    work = 0
    s = np.empty(n, dtype=np.int64)
    spos = np.zeros(W, dtype=np.uint64)
    sneg = np.zeros(W, dtype=np.uint64)
    if P.shape[0] == 0 or N.shape[0] == 0:
        level = start_level
    else:
        level = max(start_level, Pn[0] + Nn[0])
    last_done = level - 1
    while P.shape[0] > 0 and N.shape[0] > 0 and level <= Pn[-1] + Nn[-1]:
        if max_norm >= 0 and level > max_norm:
            break
        newP = []
        newN = []
        for fi in range(P.shape[0]):
            f = P[fi]
            want = level - Pn[fi]
            if want < Nn[0]:
                break
            lo = np.searchsorted(Nn, want, side="left")
            hi = np.searchsorted(Nn, want, side="right")
            for gi in range(lo, hi):
                g = N[gi]
                compatible = True
                for w in range(W):
                    if ((pos[f, w] & neg[g, w]) | (neg[f, w] & pos[g, w])) & lowmask[w]:
                        compatible = False
                        break
                if not compatible:
                    continue
                work += 1
                inside = True
                tot = 0
                for k in range(n):
                    s[k] = V[f, k] + V[g, k]
                for k in range(ncols):
                    x = abs(s[k])
                    tot += x
                    if upper[k] >= 0 and x > upper[k]:
                        inside = False
                        break
                if not inside or (max_norm >= 0 and tot > max_norm):
                    continue
                for w in range(W):
                    spos[w] = 0
                    sneg[w] = 0
                for k in range(ncols):
                    if s[k] > 0:
                        spos[k >> 6] |= np.uint64(1) << np.uint64(k & 63)
                    elif s[k] < 0:
                        sneg[k >> 6] |= np.uint64(1) << np.uint64(k & 63)
                if _reducible(s, spos, sneg, V, pos, neg, nrm, cnt, level, ncols):
                    continue
                if cnt == V.shape[0]:
                    V, nrm, pos, neg = _grow(V, nrm, pos, neg)
                V[cnt] = s
                nrm[cnt] = level
                for w in range(W):
                    pos[cnt, w] = spos[w]
                    neg[cnt, w] = sneg[w]
                if s[c] > 0:
                    newP.append(cnt)
                elif s[c] < 0:
                    newN.append(cnt)
                cnt += 1
            if work > budget >= 0:
                return V, cnt, OUT_OF_BUDGET, last_done, work
        if len(newP) > 0:
            P, Pn = _sorted_by_norm(np.concatenate((P, np.array(newP, dtype=np.int64))), nrm)
        if len(newN) > 0:
            N, Nn = _sorted_by_norm(np.concatenate((N, np.array(newN, dtype=np.int64))), nrm)
        last_done = level
        level += 1

    if restricted:
        out = 0
        for i in range(cnt):
            if V[i, c] >= 0:
                if out != i:
                    V[out] = V[i]
                out += 1
        cnt = out
    return V, cnt, DONE, last_done, work


@njit(cache=True)
def branch_and_prune(A, tlo, thi, upper, order, limit):
    """All ``z`` with ``tlo <= A z <= thi`` and ``0 <= z <= upper``.

    Variables are fixed in ``order``; after each assignment the attainable
    range of every touched row must still meet its target interval. Returns
    the solutions in the order found, a truncation flag (node ``limit``
    exceeded) and the node count.
    """
    r, n = A.shape
    lo = np.zeros(r, dtype=np.int64)
    hi = np.zeros(r, dtype=np.int64)
    for i in range(r):
        for k in range(n):
            a = A[i, k] * upper[k]
            if a > 0:
                hi[i] += a
            else:
                lo[i] += a
    cnt = np.zeros(n, dtype=np.int64)
    for k in range(n):
        for i in range(r):
            if A[i, k] != 0:
                cnt[k] += 1
    width = 1
    for k in range(n):
        width = max(width, cnt[k])
    rows_of = np.full((n, width), -1, dtype=np.int64)
    for k in range(n):
        t = 0
        for i in range(r):
            if A[i, k] != 0:
                rows_of[k, t] = i
                t += 1

    z = np.zeros(n, dtype=np.int64)
    val = np.full(n, -1, dtype=np.int64)
    sols = []
    nodes = 0
    depth = 0
    truncated = False
    for i in range(r):
        if lo[i] > thi[i] or hi[i] < tlo[i]:
            depth = -1
    while depth >= 0:
        k = order[depth]
        if val[depth] >= 0:
            v = val[depth]
            for t in range(cnt[k]):
                i = rows_of[k, t]
                a = A[i, k]
                if a > 0:
                    lo[i] -= a * v
                    hi[i] -= a * v - a * upper[k]
                else:
                    hi[i] -= a * v
                    lo[i] -= a * v - a * upper[k]
        val[depth] += 1
        v = val[depth]
        if v > upper[k]:
            val[depth] = -1
            z[k] = 0
            depth -= 1
            continue
        nodes += 1
        if limit >= 0 and nodes > limit:
            truncated = True
            break
        z[k] = v
        feasible = True
        for t in range(cnt[k]):
            i = rows_of[k, t]
            a = A[i, k]
            if a > 0:
                lo[i] += a * v
                hi[i] += a * v - a * upper[k]
            else:
                hi[i] += a * v
                lo[i] += a * v - a * upper[k]
            if lo[i] > thi[i] or hi[i] < tlo[i]:
                feasible = False
        if not feasible:
            continue
        if depth == n - 1:
            sols.append(z.copy())
            continue
        depth += 1
    out = np.zeros((len(sols), n), dtype=np.int64)
    for i in range(len(sols)):
        out[i] = sols[i]
    return out, truncated, nodes


@njit(cache=True)
def minimal_mask(X, sizes):
    """Mask of rows of ``X`` not componentwise above another row.

    ``X`` must be sorted by ``sizes`` (row sums, nondecreasing) and contain
    distinct nonnegative rows. Since ``<=`` is transitive it suffices to test
    each row against the minimal rows of strictly smaller size; support masks
    reject most pairs before the entries are compared.
    """
    n, m = X.shape
    supp = np.zeros((n, (m + 63) // 64), dtype=np.uint64)
    neg = np.zeros_like(supp)
    for i in range(n):
        _set_masks(X, i, m, supp, neg)
    W = supp.shape[1]
    keep = np.zeros(n, dtype=np.bool_)
    kept = np.empty(n, dtype=np.int64)
    nk = 0
    for i in range(n):
        ok = True
        for t in range(nk):
            j = kept[t]
            if sizes[j] >= sizes[i]:
                break
            inside = True
            for w in range(W):
                if supp[j, w] & ~supp[i, w]:
                    inside = False
                    break
            if not inside:
                continue
            below = True
            for k in range(m):
                if X[j, k] > X[i, k]:
                    below = False
                    break
            if below:
                ok = False
                break
        if ok:
            keep[i] = True
            kept[nk] = i
            nk += 1
    return keep
