"""Element-loop kernels for assembly, evaluation and error quadrature.

Each kernel exists in two interchangeable implementations: a numba
``@njit`` loop and a vectorized numpy fallback.  The active path is chosen
at import time; setting the environment variable ``CURLDIV_NO_NUMBA=1``
forces the numpy path.  ``benchmarks/bench_assembly.py`` times both.

Conventions: tets carry sorted vertex indices, so the local Whitney bases
(edge pairs and face triples in lexicographic order) coincide with the
global degrees of freedom without sign flips.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("CURLDIV_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _env in ("1", "true", "yes")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by CURLDIV_NO_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_EDGE_A = np.array([0, 0, 0, 1, 1, 2], dtype=np.int64)
_EDGE_B = np.array([1, 2, 3, 2, 3, 3], dtype=np.int64)
_FACE_V = np.array([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]], dtype=np.int64)


def tet_geometry(vertices, tets):
    """Barycentric gradients (n_t, 4, 3) and signed 6*volume (n_t,)."""
    p = vertices[tets]                       # (n_t, 4, 3)
    J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]],
                 axis=2)                     # columns
    det = np.linalg.det(J)
    Jinv = np.linalg.inv(J)
    grads = np.empty((len(tets), 4, 3))
    grads[:, 1:] = Jinv
    grads[:, 0] = -Jinv.sum(axis=1)
    return np.ascontiguousarray(grads), det


def physical_points(vertices, tets, bary):
    """Quadrature points in physical space: (n_t, nq, 3)."""
    return np.einsum("qi,tix->tqx", bary, vertices[tets])


# ---------------------------------------------------------------------------
# basis values at barycentric points


def edge_basis_values(grads, bary):
    """Whitney edge functions at quadrature points: (n_t, nq, 6, 3)."""
    la = bary[:, _EDGE_A]                    # (nq, 6)
    lb = bary[:, _EDGE_B]
    ga = grads[:, _EDGE_A]                   # (n_t, 6, 3)
    gb = grads[:, _EDGE_B]
    return (la[None, :, :, None] * gb[:, None] -
            lb[None, :, :, None] * ga[:, None])


def rt_basis_values(grads, bary):
    """Raviart-Thomas face functions at quadrature points: (n_t, nq, 4, 3)."""
    n_t = grads.shape[0]
    nq = bary.shape[0]
    out = np.zeros((n_t, nq, 4, 3))
    for fi in range(4):
        a, b, c = _FACE_V[fi]
        gbc = np.cross(grads[:, b], grads[:, c])     # (n_t, 3)
        gca = np.cross(grads[:, c], grads[:, a])
        gab = np.cross(grads[:, a], grads[:, b])
        out[:, :, fi, :] = 2.0 * (
            bary[None, :, a, None] * gbc[:, None] +
            bary[None, :, b, None] * gca[:, None] +
            bary[None, :, c, None] * gab[:, None])
    return out


def edge_curl_values(grads):
    """Constant curls of the six edge functions: (n_t, 6, 3)."""
    return 2.0 * np.cross(grads[:, _EDGE_A], grads[:, _EDGE_B])


# ---------------------------------------------------------------------------
# local mass matrices: M[i, j] = sum_q w_q |det| basis_i . coef . basis_j


def _mass_numpy(basis_vals, det, qw, coef):
    cb = np.einsum("tqxy,tqjy->tqjx", coef, basis_vals)
    M = np.einsum("tqix,tqjx,q->tij", basis_vals, cb, qw)
    return M * np.abs(det)[:, None, None]


@njit(cache=True)
def _mass_numba(basis_vals, det, qw, coef):
    n_t, nq, nb, _ = basis_vals.shape
    M = np.zeros((n_t, nb, nb))
    for t in range(n_t):
        scale = abs(det[t])
        for q in range(nq):
            w = qw[q] * scale
            for j in range(nb):
                cb0 = (coef[t, q, 0, 0] * basis_vals[t, q, j, 0]
                       + coef[t, q, 0, 1] * basis_vals[t, q, j, 1]
                       + coef[t, q, 0, 2] * basis_vals[t, q, j, 2])
                cb1 = (coef[t, q, 1, 0] * basis_vals[t, q, j, 0]
                       + coef[t, q, 1, 1] * basis_vals[t, q, j, 1]
                       + coef[t, q, 1, 2] * basis_vals[t, q, j, 2])
                cb2 = (coef[t, q, 2, 0] * basis_vals[t, q, j, 0]
                       + coef[t, q, 2, 1] * basis_vals[t, q, j, 1]
                       + coef[t, q, 2, 2] * basis_vals[t, q, j, 2])
                for i in range(nb):
                    M[t, i, j] += w * (basis_vals[t, q, i, 0] * cb0
                                       + basis_vals[t, q, i, 1] * cb1
                                       + basis_vals[t, q, i, 2] * cb2)
    return M


def local_mass(basis_vals, det, qw, coef):
    """Dispatch to the active implementation."""
    if HAVE_NUMBA:
        return _mass_numba(np.ascontiguousarray(basis_vals), det, qw,
                           np.ascontiguousarray(coef))
    return _mass_numpy(basis_vals, det, qw, coef)


# ---------------------------------------------------------------------------
# local load vectors


def _vector_load_numpy(basis_vals, det, qw, fvals):
    L = np.einsum("tqix,tqx,q->ti", basis_vals, fvals, qw)
    return L * np.abs(det)[:, None]


@njit(cache=True)
def _vector_load_numba(basis_vals, det, qw, fvals):
    n_t, nq, nb, _ = basis_vals.shape
    L = np.zeros((n_t, nb))
    for t in range(n_t):
        scale = abs(det[t])
        for q in range(nq):
            w = qw[q] * scale
            for i in range(nb):
                L[t, i] += w * (basis_vals[t, q, i, 0] * fvals[t, q, 0]
                                + basis_vals[t, q, i, 1] * fvals[t, q, 1]
                                + basis_vals[t, q, i, 2] * fvals[t, q, 2])
    return L


def local_vector_load(basis_vals, det, qw, fvals):
    if HAVE_NUMBA:
        return _vector_load_numba(np.ascontiguousarray(basis_vals), det, qw,
                                  np.ascontiguousarray(fvals))
    return _vector_load_numpy(basis_vals, det, qw, fvals)


def _scalar_load_numpy(bary, det, qw, gvals):
    L = np.einsum("qi,tq,q->ti", bary, gvals, qw)
    return L * np.abs(det)[:, None]


@njit(cache=True)
def _scalar_load_numba(bary, det, qw, gvals):
    n_t, nq = gvals.shape
    L = np.zeros((n_t, 4))
    for t in range(n_t):
        scale = abs(det[t])
        for q in range(nq):
            w = qw[q] * scale * gvals[t, q]
            for i in range(4):
                L[t, i] += w * bary[q, i]
    return L


def local_scalar_load(bary, det, qw, gvals):
    if HAVE_NUMBA:
        return _scalar_load_numba(np.ascontiguousarray(bary), det, qw,
                                  np.ascontiguousarray(gvals))
    return _scalar_load_numpy(bary, det, qw, gvals)


# ---------------------------------------------------------------------------
# field evaluation and weighted L2 error accumulation


def _field_eval_numpy(basis_vals, local_coeffs):
    return np.einsum("tqix,ti->tqx", basis_vals, local_coeffs)


@njit(cache=True)
def _field_eval_numba(basis_vals, local_coeffs):
    n_t, nq, nb, _ = basis_vals.shape
    out = np.zeros((n_t, nq, 3))
    for t in range(n_t):
        for q in range(nq):
            for i in range(nb):
                c = local_coeffs[t, i]
                out[t, q, 0] += c * basis_vals[t, q, i, 0]
                out[t, q, 1] += c * basis_vals[t, q, i, 1]
                out[t, q, 2] += c * basis_vals[t, q, i, 2]
    return out


def field_at_points(basis_vals, local_coeffs):
    if HAVE_NUMBA:
        return _field_eval_numba(np.ascontiguousarray(basis_vals),
                                 np.ascontiguousarray(local_coeffs))
    return _field_eval_numpy(basis_vals, local_coeffs)


def weighted_l2_sq(diff, det, qw):
    """Integral of |diff|^2, diff given at quadrature points (n_t, nq, ...)."""
    if diff.ndim == 2:
        diff = diff[:, :, None]
    sq = np.einsum("tqx,tqx->tq", diff, diff)
    return float(np.einsum("tq,q,t->", sq, qw, np.abs(det)))
