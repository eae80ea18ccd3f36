"""Pure-numpy GF(2^m) elimination kernels.

Fallback path used when numba is unavailable or disabled via
``GFR_PURE_NUMPY=1``.  Elimination avoids field division by using the
rank-preserving update ``row_i <- pivot*row_i + f*pivot_row``; products go
through the log/exp tables (``exp`` is doubled in length, ``log[0]`` is
junk and masked out).

Kernel contracts (shared with ``_kernels_numba``):

gf_rank(mat, log, exp, q)
    Row rank of ``mat`` (int64, modified in place).

gf_solve(a, b, log, exp, q)
    Gauss-Jordan on ``a`` with right-hand-side block ``b``.  Returns
    ``(status, x)`` with status 0 = solved, 1 = rank deficient,
    2 = inconsistent system (checked first).

gf_subset_ranks(rows_mat, masks, log, exp, q)
    Rank of the selected row subset for every boolean mask row.

gf_property2_scan(rows_mat, bucket, n_buckets, d, target, log, exp, q)
    Scan all nonempty edge subsets in ascending bitmask order; for a
    subset whose capped tally ``a0 + sum(min(a_m, d))`` reaches ``target``
    the selected rows must have rank ``target``.  Returns the first
    violating bitmask, or -1.
"""

import numpy as np

_SCAN_CHUNK = 1 << 12


def _mul(a, b, log, exp):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = exp[log[a] + log[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def gf_rank(mat, log, exp, q):
    rows, cols = mat.shape
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(mat[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            mat[[r, p]] = mat[[p, r]]
        f = mat[r + 1:, c]
        sel = f != 0
        if sel.any():
            body = mat[r + 1:][sel]
            t1 = _mul(mat[r, c], body, log, exp)
            t2 = _mul(f[sel, None], mat[r][None, :], log, exp)
            mat[r + 1:][sel] = t1 ^ t2
        r += 1
    return r


def gf_solve(a, b, log, exp, q):
    rows, cols = a.shape
    nrhs = b.shape[1]
    qm1 = q - 1
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
            b[[r, p]] = b[[p, r]]
        inv = exp[qm1 - log[a[r, c]]]
        a[r] = _mul(inv, a[r], log, exp)
        b[r] = _mul(inv, b[r], log, exp)
        f = a[:, c].copy()
        f[r] = 0
        sel = f != 0
        if sel.any():
            a[sel] ^= _mul(f[sel, None], a[r][None, :], log, exp)
            b[sel] ^= _mul(f[sel, None], b[r][None, :], log, exp)
        r += 1
    x = np.zeros((cols, nrhs), np.int64)
    if r < rows and np.any(b[r:] != 0):
        return 2, x
    if r < cols:
        return 1, x
    x[:, :] = b[:cols]
    return 0, x


def gf_subset_ranks(rows_mat, masks, log, exp, q):
    nsub, nedges = masks.shape
    width = rows_mat.shape[1]
    work = np.where(masks[:, :, None], rows_mat[None, :, :], 0).astype(np.int64)
    r = np.zeros(nsub, dtype=np.int64)
    rowpos = np.arange(nedges)
    for c in range(width):
        cand = (work[:, :, c] != 0) & (rowpos[None, :] >= r[:, None])
        hit = np.nonzero(cand.any(axis=1))[0]
        if hit.size == 0:
            continue
        rb = r[hit]
        pb = np.argmax(cand[hit], axis=1)
        tmp = work[hit, rb, :].copy()
        work[hit, rb, :] = work[hit, pb, :]
        work[hit, pb, :] = tmp
        pivval = work[hit, rb, c]
        pivrow = work[hit, rb, :]
        below = (rowpos[None, :] > rb[:, None]) & (work[hit, :, c] != 0)
        t1 = _mul(pivval[:, None, None], work[hit], log, exp)
        t2 = _mul(work[hit, :, c][:, :, None], pivrow[:, None, :], log, exp)
        work[hit] = np.where(below[:, :, None], t1 ^ t2, work[hit])
        r[hit] += 1
    return r


def gf_property2_scan(rows_mat, bucket, n_buckets, d, target, log, exp, q):
    nedges = rows_mat.shape[0]
    total = 1 << nedges
    shifts = np.arange(nedges, dtype=np.int64)
    onehot = np.zeros((nedges, n_buckets), dtype=np.int64)
    for e in range(nedges):
        if bucket[e] >= 0:
            onehot[e, bucket[e]] = 1
    free = (bucket < 0).astype(np.int64)
    for start in range(1, total, _SCAN_CHUNK):
        stop = min(start + _SCAN_CHUNK, total)
        ids = np.arange(start, stop, dtype=np.int64)
        bits = ((ids[:, None] >> shifts[None, :]) & 1).astype(bool)
        a0 = bits @ free
        am = bits.astype(np.int64) @ onehot
        acount = a0 + np.minimum(am, d).sum(axis=1)
        cand = np.nonzero(acount >= target)[0]
        if cand.size == 0:
            continue
        ranks = gf_subset_ranks(rows_mat, bits[cand], log, exp, q)
        bad = np.nonzero(ranks < target)[0]
        if bad.size:
            return int(ids[cand[bad[0]]])
    return -1
