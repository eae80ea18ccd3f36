"""Numba-compiled GF(2^m) elimination kernels.

Same call signatures as ``_kernels_numpy``; see that module for the
semantics.  All matrices are ``int64`` and are modified in place, so
callers must pass copies.  ``log``/``exp`` are the discrete-log tables of
the field (``exp`` is doubled in length so ``exp[log[a] + log[b]]`` needs
no modular reduction); ``log[0]`` is junk and zero operands are handled
explicitly.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _rank_inplace(mat, log, exp):
    rows, cols = mat.shape
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = -1
        for i in range(r, rows):
            if mat[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = mat[r, j]
                mat[r, j] = mat[piv, j]
                mat[piv, j] = tmp
        lpv = log[mat[r, c]]
        for i in range(r + 1, rows):
            f = mat[i, c]
            if f == 0:
                continue
            lf = log[f]
            # division-free update: row_i <- pv*row_i + f*row_r
            for j in range(c, cols):
                a = mat[i, j]
                t1 = exp[log[a] + lpv] if a != 0 else 0
                b = mat[r, j]
                t2 = exp[lf + log[b]] if b != 0 else 0
                mat[i, j] = t1 ^ t2
        r += 1
    return r


@njit(cache=True)
def gf_rank(mat, log, exp, q):
    return _rank_inplace(mat, log, exp)


@njit(cache=True)
def gf_solve(a, b, log, exp, q):
    rows, cols = a.shape
    nrhs = b.shape[1]
    qm1 = q - 1
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = tmp
            for j in range(nrhs):
                tmp = b[r, j]
                b[r, j] = b[piv, j]
                b[piv, j] = tmp
        linv = qm1 - log[a[r, c]]
        for j in range(c, cols):
            v = a[r, j]
            if v != 0:
                a[r, j] = exp[log[v] + linv]
        for j in range(nrhs):
            v = b[r, j]
            if v != 0:
                b[r, j] = exp[log[v] + linv]
        for i in range(rows):
            if i == r:
                continue
            f = a[i, c]
            if f == 0:
                continue
            lf = log[f]
            for j in range(c, cols):
                v = a[r, j]
                if v != 0:
                    a[i, j] ^= exp[lf + log[v]]
            for j in range(nrhs):
                v = b[r, j]
                if v != 0:
                    b[i, j] ^= exp[lf + log[v]]
        r += 1
    x = np.zeros((cols, nrhs), np.int64)
    for i in range(r, rows):
        for j in range(nrhs):
            if b[i, j] != 0:
                return 2, x
    if r < cols:
        return 1, x
    for i in range(cols):
        for j in range(nrhs):
            x[i, j] = b[i, j]
    return 0, x


@njit(cache=True)
def gf_subset_ranks(rows_mat, masks, log, exp, q):
    nsub, nedges = masks.shape
    width = rows_mat.shape[1]
    out = np.empty(nsub, np.int64)
    buf = np.empty((nedges, width), np.int64)
    for s in range(nsub):
        cnt = 0
        for e in range(nedges):
            if masks[s, e]:
                for j in range(width):
                    buf[cnt, j] = rows_mat[e, j]
                cnt += 1
        out[s] = _rank_inplace(buf[:cnt], log, exp)
    return out


@njit(cache=True)
def gf_property2_scan(rows_mat, bucket, n_buckets, d, target, log, exp, q):
    nedges, width = rows_mat.shape
    am = np.empty(n_buckets, np.int64)
    buf = np.empty((nedges, width), np.int64)
    for mask in range(1, 1 << nedges):
        for t in range(n_buckets):
            am[t] = 0
        acount = 0
        for e in range(nedges):
            if (mask >> e) & 1:
                bk = bucket[e]
                if bk < 0:
                    acount += 1
                else:
                    am[bk] += 1
        for t in range(n_buckets):
            acount += min(am[t], d)
        if acount < target:
            continue
        cnt = 0
        for e in range(nedges):
            if (mask >> e) & 1:
                for j in range(width):
                    buf[cnt, j] = rows_mat[e, j]
                cnt += 1
        if _rank_inplace(buf[:cnt], log, exp) < target:
            return mask
    return -1
