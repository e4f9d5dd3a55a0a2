"""Lowest-order Whitney element spaces and their degree-of-freedom maps.

Spaces: nodal P1 ("lagrange"), Nedelec edge of degree 1 ("edge"),
Raviart-Thomas of degree 1 ("face") and piecewise constants ("cell").
Coefficients are the DOF functionals of the represented field: vertex
value, edge tangential integral, face normal flux, cell value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .mesh import Mesh, LOCAL_EDGES, LOCAL_FACES
from .quadrature import make_quadrature


class Space(str, Enum):
    LAGRANGE = "lagrange"
    EDGE = "edge"
    FACE = "face"
    CELL = "cell"


_SPACE_DIM = {
    Space.LAGRANGE: lambda m: m.n_v,
    Space.EDGE: lambda m: m.n_e,
    Space.FACE: lambda m: m.n_f,
    Space.CELL: lambda m: m.n_t,
}

INSIDE_TOL = 1e-10


class ElementError(ValueError):
    pass


@dataclass
class FEFunction:
    space: Space
    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        self.space = Space(self.space)
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        expect = _SPACE_DIM[self.space](self.mesh)
        if self.coeffs.shape != (expect,):
            raise ElementError(
                f"{self.space.value} function needs {expect} coefficients, "
                f"got {self.coeffs.shape}")

    def copy(self) -> "FEFunction":
        return FEFunction(self.space, self.mesh, self.coeffs.copy())


def zero_function(space, mesh) -> FEFunction:
    space = Space(space)
    return FEFunction(space, mesh, np.zeros(_SPACE_DIM[space](mesh)))


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric 3x3 matrix coefficient (eta or mu), evaluable pointwise."""
    kind: str                   # identity | scalar | per_region | analytic
    value: object = None

    @staticmethod
    def identity() -> "CoefficientField":
        return CoefficientField("identity")

    @staticmethod
    def scalar(c: float) -> "CoefficientField":
        if not c > 0:
            raise ValueError("scalar coefficient must be positive")
        return CoefficientField("scalar", float(c))

    @staticmethod
    def per_region(values: np.ndarray) -> "CoefficientField":
        """One positive scalar per tet (e.g. mapped from region tags)."""
        vals = np.asarray(values, dtype=np.float64)
        if not np.all(vals > 0):
            raise ValueError("per-region coefficients must be positive")
        return CoefficientField("per_region", vals)

    @staticmethod
    def analytic(fn) -> "CoefficientField":
        """fn(points (n, 3)) -> (n, 3, 3); symmetrized on evaluation."""
        return CoefficientField("analytic", fn)

    def at_quadrature(self, tet_ids, points) -> np.ndarray:
        """Matrix values at (n_t, nq, 3) physical points -> (n_t, nq, 3, 3)."""
        n_t, nq = points.shape[:2]
        if self.kind == "identity":
            out = np.broadcast_to(np.eye(3), (n_t, nq, 3, 3)).copy()
        elif self.kind == "scalar":
            out = np.broadcast_to(self.value * np.eye(3), (n_t, nq, 3, 3)).copy()
        elif self.kind == "per_region":
            vals = np.asarray(self.value)[tet_ids]
            out = vals[:, None, None, None] * np.eye(3)[None, None]
        elif self.kind == "analytic":
            flat = self.value(points.reshape(-1, 3)).reshape(n_t, nq, 3, 3)
            out = 0.5 * (flat + np.swapaxes(flat, -1, -2))
        else:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        return np.ascontiguousarray(out)


def eval_field(fn, points, vector: bool) -> np.ndarray:
    """Evaluate a user field at an (n, 3) point array, looping if needed."""
    points = np.asarray(points, dtype=np.float64)
    try:
        out = np.asarray(fn(points), dtype=np.float64)
        want = (len(points), 3) if vector else (len(points),)
        if out.shape == want:
            return out
    except Exception:
        pass
    out = np.array([fn(p) for p in points], dtype=np.float64)
    return out


def barycentric(m: Mesh, tet: int, p) -> np.ndarray:
    verts = m.vertices[m.tets[tet]]
    A = np.vstack([np.ones(4), verts.T])
    rhs = np.concatenate([[1.0], np.asarray(p, dtype=np.float64)])
    return np.linalg.solve(A, rhs)


def eval_fe(f: FEFunction, tet: int, p):
    """Evaluate an FE function at point ``p`` inside tet ``tet``."""
    m = f.mesh
    lam = barycentric(m, tet, p)
    if lam.min() < -INSIDE_TOL:
        raise ElementError(f"point {p} lies outside tet {tet}")
    if f.space == Space.CELL:
        return float(f.coeffs[tet])
    if f.space == Space.LAGRANGE:
        return float(lam @ f.coeffs[m.tets[tet]])
    grads, _ = kernels.tet_geometry(m.vertices, m.tets[tet:tet + 1])
    bary = lam[None, :]
    if f.space == Space.EDGE:
        vals = kernels.edge_basis_values(grads, bary)[0, 0]   # (6, 3)
        return vals.T @ f.coeffs[m.tet_edges[tet]]
    vals = kernels.rt_basis_values(grads, bary)[0, 0]         # (4, 3)
    return vals.T @ f.coeffs[m.tet_faces[tet]]


def locate_tet(m: Mesh, p) -> int:
    """Brute-force point location; fine for probe points on small meshes."""
    for t in range(m.n_t):
        if barycentric(m, t, p).min() >= -INSIDE_TOL:
            return t
    raise ElementError(f"point {p} lies outside the mesh")


def eval_at_points(f: FEFunction, points) -> np.ndarray:
    """Evaluate an FE function at arbitrary points via point location."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return np.array([eval_fe(f, locate_tet(f.mesh, p), p) for p in points])


def differential(f: FEFunction) -> FEFunction:
    """grad, curl or div of an FE function via the incidence operators."""
    m = f.mesh
    inc = m.incidence
    if f.space == Space.LAGRANGE:
        return FEFunction(Space.EDGE, m, inc.G @ f.coeffs)
    if f.space == Space.EDGE:
        return FEFunction(Space.FACE, m, inc.C @ f.coeffs)
    if f.space == Space.FACE:
        return FEFunction(Space.CELL, m, (inc.D @ f.coeffs) / m.volumes)
    raise ElementError("piecewise constants have no differential here")


def interpolate(space, fn, m: Mesh) -> FEFunction:
    """Canonical interpolant: DOF functionals evaluated by quadrature."""
    space = Space(space)
    if space == Space.LAGRANGE:
        vals = eval_field(fn, m.vertices, vector=False)
        return FEFunction(space, m, vals)
    if space == Space.EDGE:
        rule = make_quadrature("edge", 3)
        p = m.vertices[m.edges]                         # (n_e, 2, 3)
        pts = np.einsum("qi,eix->eqx", rule.points, p)
        vals = eval_field(fn, pts.reshape(-1, 3), vector=True)
        vals = vals.reshape(m.n_e, -1, 3)
        tang = p[:, 1] - p[:, 0]
        dofs = np.einsum("eqx,ex,q->e", vals, tang, rule.weights)
        return FEFunction(space, m, dofs)
    if space == Space.FACE:
        rule = make_quadrature("tri", 3)
        p = m.vertices[m.faces]                         # (n_f, 3, 3)
        pts = np.einsum("qi,fix->fqx", rule.points, p)
        vals = eval_field(fn, pts.reshape(-1, 3), vector=True)
        vals = vals.reshape(m.n_f, -1, 3)
        nvec = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])  # 2*area*normal
        dofs = np.einsum("fqx,fx,q->f", vals, nvec, rule.weights)
        return FEFunction(space, m, dofs)
    rule = make_quadrature("tet", 2)
    pts = kernels.physical_points(m.vertices, m.tets, rule.points)
    vals = eval_field(fn, pts.reshape(-1, 3), vector=False).reshape(m.n_t, -1)
    dofs = 6.0 * vals @ rule.weights                    # cell averages
    return FEFunction(Space.CELL, m, dofs)
