"""Built-in structured meshes used for convergence studies and fixtures."""

from __future__ import annotations

import itertools

import numpy as np

from .mesh import Mesh, build_mesh

# Kuhn split of the unit cell: each tet follows a monotone vertex path
# 000 -> 111, one per permutation of the axes, all sharing the body diagonal.
_KUHN_PATHS = [np.cumsum(np.vstack([[0, 0, 0]] + [np.eye(3, dtype=int)[list(p)][i]
               for i in range(3)]), axis=0)
               for p in itertools.permutations(range(3))]


def _grid_mesh(n: int, spacing: float, keep) -> Mesh:
    """Tetrahedralize the cells (i, j, k) of an n^3 grid for which keep() is true."""
    if n < 1:
        raise ValueError("grid resolution must be >= 1")
    vid = {}
    coords = []

    def vertex(i, j, k):
        key = (i, j, k)
        if key not in vid:
            vid[key] = len(coords)
            coords.append((i * spacing, j * spacing, k * spacing))
        return vid[key]

    tets = []
    for i, j, k in itertools.product(range(n), repeat=3):
        if not keep(i, j, k):
            continue
        base = np.array([i, j, k])
        for path in _KUHN_PATHS:
            tets.append([vertex(*(base + step)) for step in path])
    return build_mesh(np.array(coords), tets)


def structured_cube_mesh(n: int) -> Mesh:
    """Unit cube split into n^3 subcubes of 6 tets each (Kuhn split)."""
    return _grid_mesh(n, 1.0 / n, lambda i, j, k: True)


def solid_torus_mesh(n: int = 3) -> Mesh:
    """Square donut: an n^3 grid with the central vertical column removed.

    Genus 1, single boundary component.  n must be >= 3 and odd so the
    removed column is well defined.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("solid torus grid needs odd n >= 3")
    c = n // 2
    return _grid_mesh(n, 1.0 / n, lambda i, j, k: not (i == c and j == c))


def hollow_ball_mesh(n: int = 3) -> Mesh:
    """An n^3 grid with the central cell removed: one internal cavity (p = 1)."""
    if n < 3 or n % 2 == 0:
        raise ValueError("hollow ball grid needs odd n >= 3")
    c = n // 2
    return _grid_mesh(n, 1.0 / n,
                      lambda i, j, k: not (i == c and j == c and k == c))


def single_tet_mesh() -> Mesh:
    coords = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                       [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return build_mesh(coords, [[0, 1, 2, 3]])
