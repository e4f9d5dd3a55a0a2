"""Finite element bases of the constrained spaces.

The gauged edge fields have curls spanning the discretely divergence-free
Raviart-Thomas subspace with zero flux through every boundary component;
the reduced nodal space drops the last vertex so its gradients span the
discretely curl-free subspace with zero homology periods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh
from .topology import TreeCotree, HomologyBasis


@dataclass(frozen=True)
class GaugedCurlBasis:
    """Columns are edge-space coefficient vectors; combined fields first."""
    fields: sp.csc_matrix           # (n_e, n_Q - g)
    n_combined: int                 # = g
    cotree_edges: np.ndarray
    closing_edges: np.ndarray

    @property
    def dim(self) -> int:
        return self.fields.shape[1]


@dataclass(frozen=True)
class ReducedNodalBasis:
    retained: np.ndarray            # vertex indices 0 .. n_v - 2
    excluded: int                   # the last vertex in the global order

    @property
    def dim(self) -> int:
        return len(self.retained)


def build_N_star(tc: TreeCotree, hb: HomologyBasis, n_e: int) -> GaugedCurlBasis:
    """Assemble the n_Q - g gauged fields, supported on cotree edges only."""
    g = hb.g
    n_Q = tc.n_Q
    cols = []
    rows = []
    data = []
    col = 0
    # combined fields: kernel-vector combinations of the closing-edge functions
    for lam in range(g):
        for q in range(2 * g):
            c = hb.kernel_vectors[lam, q]
            if c != 0.0:
                rows.append(int(tc.cotree_edges[q]))
                cols.append(col)
                data.append(float(c))
        col += 1
    # plain cotree fields, positions 2g+1 .. n_Q
    for pos in range(2 * g, n_Q):
        rows.append(int(tc.cotree_edges[pos]))
        cols.append(col)
        data.append(1.0)
        col += 1
    fields = sp.csc_matrix((data, (rows, cols)), shape=(n_e, n_Q - g))
    return GaugedCurlBasis(fields=fields, n_combined=g,
                           cotree_edges=tc.cotree_edges.copy(),
                           closing_edges=tc.closing_edges.copy())


def curl_image_basis(gb: GaugedCurlBasis, m: Mesh) -> sp.csc_matrix:
    """Curls of the gauged fields as RT coefficient columns (n_f, n_Q - g)."""
    return (m.incidence.C @ gb.fields).tocsc()


def verify_periods(gb: GaugedCurlBasis, hb: HomologyBasis,
                   tol: float = 1e-10) -> dict:
    """Check that every combined field has zero period over each sigma_n."""
    report = {"max_abs_period": 0.0, "violations": [], "checked": 0}
    if hb.g == 0:
        return report
    dense = np.asarray(gb.fields[:, :gb.n_combined].todense())
    for n, cyc in enumerate(hb.cycles):
        for l in range(gb.n_combined):
            period = sum(c * dense[int(e), l] for e, c in cyc.items())
            report["checked"] += 1
            report["max_abs_period"] = max(report["max_abs_period"], abs(period))
            if abs(period) > tol:
                report["violations"].append((n, l, period))
    if report["violations"]:
        raise ValueError(
            f"gauged basis period violation: {report['violations']}")
    return report


def build_L_star(m: Mesh) -> ReducedNodalBasis:
    """Reduced nodal basis excluding the highest-index vertex."""
    return ReducedNodalBasis(retained=np.arange(m.n_v - 1),
                             excluded=m.n_v - 1)
