"""Timing comparison of the numba and numpy assembly kernels.

Runs the local mass-matrix, load-vector and field-evaluation kernels on a
structured cube mesh and reports wall times for both implementations.
The numba path is skipped when numba is unavailable or disabled via
CURLDIV_NO_NUMBA=1.

Usage: python benchmarks/bench_assembly.py [n]
"""

import sys
import time

import numpy as np

from curldiv import kernels
from curldiv.elements import CoefficientField
from curldiv.meshes import structured_cube_mesh
from curldiv.quadrature import make_quadrature


def timeit(fn, *args, repeats=5):
    fn(*args)                                 # warm up (jit compilation)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    m = structured_cube_mesh(n)
    rule = make_quadrature("tet", 2)
    grads, det = kernels.tet_geometry(m.vertices, m.tets)
    pts = kernels.physical_points(m.vertices, m.tets, rule.points)
    coef = CoefficientField.identity().at_quadrature(np.arange(m.n_t), pts)
    rt = np.ascontiguousarray(kernels.rt_basis_values(grads, rule.points))
    edge = np.ascontiguousarray(kernels.edge_basis_values(grads, rule.points))
    fvals = np.ascontiguousarray(np.random.default_rng(0)
                                 .standard_normal(pts.shape))
    coeffs = np.ascontiguousarray(np.random.default_rng(1)
                                  .standard_normal((m.n_t, 6)))

    rows = []
    cases = [
        ("rt mass", kernels._mass_numpy, kernels._mass_numba,
         (rt, det, rule.weights, coef)),
        ("edge mass", kernels._mass_numpy, kernels._mass_numba,
         (edge, det, rule.weights, coef)),
        ("vector load", kernels._vector_load_numpy,
         kernels._vector_load_numba, (edge, det, rule.weights, fvals)),
        ("field eval", kernels._field_eval_numpy, kernels._field_eval_numba,
         (edge, coeffs)),
    ]
    print(f"mesh: structured cube n={n}  ({m.n_t} tets, {m.n_e} edges)")
    print(f"numba available: {kernels.HAVE_NUMBA}")
    print(f"{'kernel':<14} {'numpy [ms]':>12} {'numba [ms]':>12} "
          f"{'speedup':>9}")
    for name, f_np, f_nb, args in cases:
        t_np = timeit(f_np, *args)
        if kernels.HAVE_NUMBA:
            t_nb = timeit(f_nb, *args)
            a = f_np(*args)
            b = f_nb(*args)
            assert np.allclose(a, b, atol=1e-12), f"{name}: paths disagree"
            rows.append((name, t_np, t_nb))
            print(f"{name:<14} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{name:<14} {t_np * 1e3:>12.3f} {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
