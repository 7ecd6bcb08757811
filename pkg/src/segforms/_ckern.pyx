# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in segforms.kernels.

Same operations in the same order as the pure implementations, so outputs
are bit-identical; these exist purely for speed on large inputs.
"""

import numpy as np


def betweenness_csr(long[::1] indptr, long[::1] indices):
    """Brandes accumulation over unweighted shortest paths (ordered-pair sums)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    bc_arr = np.zeros(n, dtype=np.float64)
    dist_arr = np.empty(n, dtype=np.int64)
    sigma_arr = np.empty(n, dtype=np.float64)
    delta_arr = np.empty(n, dtype=np.float64)
    order_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] bc = bc_arr
    cdef long[::1] dist = dist_arr
    cdef double[::1] sigma = sigma_arr
    cdef double[::1] delta = delta_arr
    cdef long[::1] order = order_arr
    cdef long[::1] queue = queue_arr
    cdef Py_ssize_t s, i, k, head, tail, n_order, idx
    cdef long v, w, dv, dw
    cdef double coeff

    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        queue[0] = s
        head = 0
        tail = 1
        n_order = 0
        while head < tail:
            v = queue[head]
            head += 1
            order[n_order] = v
            n_order += 1
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for idx in range(n_order - 1, -1, -1):
            w = order[idx]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc_arr


def complete_linkage(double[:, ::1] dmatrix):
    """Complete-linkage agglomeration; ties break on the smallest id pair."""
    cdef Py_ssize_t n = dmatrix.shape[0]
    if n < 2:
        return []
    work_arr = np.array(dmatrix, dtype=np.float64, copy=True)
    cdef double[:, ::1] work = work_arr
    cdef double INF = np.inf
    cdef Py_ssize_t i, j, step, si, sj
    cdef long ida, idb, best_a, best_b, next_id
    cdef double d, best_d, merged
    ids_arr = np.arange(n, dtype=np.int64)
    cdef long[::1] ids = ids_arr
    active_arr = np.ones(n, dtype=np.int64)
    cdef long[::1] active = active_arr

    for i in range(n):
        work[i, i] = INF

    merges = []
    next_id = n
    for step in range(n - 1):
        best_d = INF
        best_a = -1
        best_b = -1
        si = -1
        sj = -1
        for i in range(n):
            if active[i] == 0:
                continue
            for j in range(i + 1, n):
                if active[j] == 0:
                    continue
                d = work[i, j]
                ida = ids[i]
                idb = ids[j]
                if ida > idb:
                    ida, idb = idb, ida
                if d < best_d or (
                    d == best_d and (ida < best_a or (ida == best_a and idb < best_b))
                ):
                    best_d = d
                    best_a = ida
                    best_b = idb
                    si = i
                    sj = j
        merges.append((int(best_a), int(best_b), float(best_d), int(next_id)))
        for i in range(n):
            merged = work[si, i]
            if work[sj, i] > merged:
                merged = work[sj, i]
            work[si, i] = merged
            work[i, si] = merged
        work[si, si] = INF
        for i in range(n):
            work[sj, i] = INF
            work[i, sj] = INF
        active[sj] = 0
        ids[si] = next_id
        next_id += 1
    return merges
