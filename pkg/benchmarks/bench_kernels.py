"""Benchmark the compiled kernels against the pure-Python fallbacks.

Run after building the extension (python setup.py build_ext --inplace):

    python3 benchmarks/bench_kernels.py [--nodes 400] [--points 300]
"""

import argparse
import random
import time

import numpy as np

from segforms import kernels


def random_csr(rng, n, avg_degree=8):
    p = min(1.0, avg_degree / max(1, n - 1))
    neigh = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                neigh[i].append(j)
                neigh[j].append(i)
    indptr, indices = [0], []
    for lst in neigh:
        indices.extend(sorted(lst))
        indptr.append(len(indices))
    return indptr, indices


def timeit(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=400, help="graph size for betweenness")
    parser.add_argument("--points", type=int, default=300, help="matrix size for linkage")
    args = parser.parse_args()

    if kernels._compiled is None:
        print("compiled kernel module not built; run: python3 setup.py build_ext --inplace")
        return

    rng = random.Random(1)
    indptr, indices = random_csr(rng, args.nodes)
    ip = np.asarray(indptr, dtype=np.int64)
    ix = np.asarray(indices, dtype=np.int64)
    t_pure, r_pure = timeit(lambda: kernels.betweenness_csr_py(indptr, indices), repeats=1)
    t_c, r_c = timeit(lambda: list(kernels._compiled.betweenness_csr(ip, ix)))
    assert r_pure == list(r_c), "backend mismatch"
    print(f"betweenness  n={args.nodes:5d}  pure {t_pure:8.3f}s  compiled {t_c:8.3f}s  "
          f"speedup {t_pure / t_c:6.1f}x")

    nprng = np.random.default_rng(2)
    pts = nprng.normal(size=(args.points, 8))
    d = np.ascontiguousarray(
        np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    )
    t_pure, m_pure = timeit(lambda: kernels.complete_linkage_py(d), repeats=1)
    t_c, m_c = timeit(lambda: [tuple(m) for m in kernels._compiled.complete_linkage(d)])
    assert m_pure == m_c, "backend mismatch"
    print(f"linkage      n={args.points:5d}  pure {t_pure:8.3f}s  compiled {t_c:8.3f}s  "
          f"speedup {t_pure / t_c:6.1f}x")


if __name__ == "__main__":
    main()
