"""Hot numeric kernels with a compiled fast path.

Two kernels dominate runtime on real corpora: Brandes betweenness
accumulation (one BFS per source) and the complete-linkage agglomeration
scan (O(n^3) over the distance matrix). Both exist twice — here in pure
Python/numpy, and as C loops in segforms._ckern built from _ckern.pyx.
The compiled module is picked at import when present; SEGFORMS_PURE=1
forces the pure path. Both paths execute the same operations in the same
order, so results are identical, not merely close.
"""

from __future__ import annotations

import os

import numpy as np


def betweenness_csr_py(indptr, indices) -> list[float]:
    """Brandes accumulation over unweighted shortest paths, CSR adjacency.

    Returns ordered-pair dependency sums (for an undirected graph the
    caller halves them). Equal-length paths split contributions evenly.
    """
    n = len(indptr) - 1
    bc = [0.0] * n
    dist = [0] * n
    sigma = [0.0] * n
    delta = [0.0] * n
    order = [0] * n
    queue = [0] * n
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        queue[0] = s
        head, tail = 0, 1
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
    return bc


def complete_linkage_py(dmatrix) -> list[tuple[int, int, float, int]]:
    """Agglomerate by minimal complete-linkage distance.

    Leaves carry ids 0..n-1; each merge creates id n+k. Ties break on the
    smallest (id_a, id_b) pair. Returns [(id_a, id_b, distance, new_id)].
    """
    work = np.array(dmatrix, dtype=np.float64, copy=True)
    n = work.shape[0]
    if work.ndim != 2 or work.shape[1] != n:
        raise ValueError("distance matrix must be square")
    if n < 2:
        return []
    np.fill_diagonal(work, np.inf)
    ids = list(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n
    for _ in range(n - 1):
        dmin = work.min()
        best = None
        for i, j in np.argwhere(work == dmin):
            if i >= j:
                continue
            ida, idb = ids[i], ids[j]
            if ida > idb:
                ida, idb = idb, ida
            if best is None or (ida, idb) < best[0]:
                best = ((ida, idb), int(i), int(j))
        (ida, idb), si, sj = best
        merges.append((ida, idb, float(dmin), next_id))
        merged_row = np.maximum(work[si, :], work[sj, :])
        work[si, :] = merged_row
        work[:, si] = merged_row
        work[si, si] = np.inf
        work[sj, :] = np.inf
        work[:, sj] = np.inf
        ids[si] = next_id
        next_id += 1
    return merges


_compiled = None
if os.environ.get("SEGFORMS_PURE", "") != "1":
    try:
        from segforms import _ckern as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "pure"


def betweenness_csr(indptr, indices) -> list[float]:
    if _compiled is not None:
        ip = np.asarray(indptr, dtype=np.int64)
        ix = np.asarray(indices, dtype=np.int64)
        return list(_compiled.betweenness_csr(ip, ix))
    return betweenness_csr_py(indptr, indices)


def complete_linkage(dmatrix) -> list[tuple[int, int, float, int]]:
    if _compiled is not None:
        d = np.ascontiguousarray(dmatrix, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        return [tuple(m) for m in _compiled.complete_linkage(d)]
    return complete_linkage_py(dmatrix)
