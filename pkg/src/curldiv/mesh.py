"""Oriented tetrahedral complex and its signed incidence operators.

Orientation conventions: vertices carry a global total order; each edge is
stored as [a, b] with a < b (tangent from a to b), each face as [a, b, c]
with a < b < c (normal by the right-hand rule on that cycle).  Tetrahedra
are stored with sorted vertex indices plus a +-1 orientation sign so local
Whitney bases line up with the global degrees of freedom without sign maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    pass


# Local sub-simplices of a tet with sorted vertices; both lists are in
# lexicographic order so local numbering matches the global convention.
LOCAL_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
LOCAL_FACES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
# index of the vertex omitted by each local face
_OMITTED = (3, 2, 1, 0)

# C restricted to one tet: face cycle a->b->c->a against the sorted edges
LOCAL_FACE_EDGE_SIGNS = np.zeros((4, 6), dtype=np.int64)
for _fi, (_a, _b, _c) in enumerate(LOCAL_FACES):
    for (_u, _v) in ((_a, _b), (_b, _c), (_c, _a)):
        _key = (min(_u, _v), max(_u, _v))
        LOCAL_FACE_EDGE_SIGNS[_fi, LOCAL_EDGES.index(_key)] = (
            1 if (_u, _v) == _key else -1
        )

DEGENERACY_TOL = 1e-14


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray        # (n_v, 3) float64
    tets: np.ndarray            # (n_t, 4) int64, each row strictly increasing
    tet_orient: np.ndarray      # (n_t,) +-1, sign of det of the sorted tet
    edges: np.ndarray           # (n_e, 2) int64, lexicographically ordered
    faces: np.ndarray           # (n_f, 3) int64, lexicographically ordered
    tet_edges: np.ndarray       # (n_t, 6) global edge ids, local order
    tet_faces: np.ndarray       # (n_t, 4) global face ids, local order
    volumes: np.ndarray         # (n_t,)

    @property
    def n_v(self) -> int:
        return len(self.vertices)

    @property
    def n_e(self) -> int:
        return len(self.edges)

    @property
    def n_f(self) -> int:
        return len(self.faces)

    @property
    def n_t(self) -> int:
        return len(self.tets)

    @property
    def euler_characteristic(self) -> int:
        return self.n_v - self.n_e + self.n_f - self.n_t

    @cached_property
    def edge_index(self) -> dict:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    @cached_property
    def face_index(self) -> dict:
        return {tuple(int(v) for v in f): i for i, f in enumerate(self.faces)}

    @cached_property
    def face_tets(self) -> list:
        """For each face, the list of adjacent tet indices."""
        adj = [[] for _ in range(self.n_f)]
        for t in range(self.n_t):
            for f in self.tet_faces[t]:
                adj[f].append(t)
        return adj

    @cached_property
    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @cached_property
    def face_normals(self) -> np.ndarray:
        """Unit normals by the right-hand rule on the sorted vertex cycle."""
        p = self.vertices[self.faces]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    @cached_property
    def incidence(self) -> "IncidenceOperators":
        return derive_incidence(self)

    @cached_property
    def boundary(self) -> "BoundaryStructure":
        return extract_boundary(self)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True)
class IncidenceOperators:
    """Signed integer matrices realizing grad, curl and div at the DOF level."""
    G: sp.csr_matrix            # (n_e, n_v) edge-vertex
    C: sp.csr_matrix            # (n_f, n_e) face-edge
    D: sp.csr_matrix            # (n_t, n_f) tet-face


@dataclass(frozen=True)
class BoundaryStructure:
    components: list            # list of int arrays of face ids
    external_index: int
    component_vertices: list    # list of int arrays
    component_edges: list       # list of int arrays
    face_component: dict        # face id -> component index
    face_owner: np.ndarray      # (n_f,) owning tet for boundary faces, -1 else

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def p(self) -> int:
        """Number of internal boundary components."""
        return len(self.components) - 1

    @cached_property
    def boundary_faces(self) -> np.ndarray:
        return np.sort(np.concatenate(self.components))

    @cached_property
    def boundary_edges(self) -> set:
        out = set()
        for ce in self.component_edges:
            out.update(int(e) for e in ce)
        return out

    @cached_property
    def boundary_vertices(self) -> set:
        out = set()
        for cv in self.component_vertices:
            out.update(int(v) for v in cv)
        return out

    def internal_components(self):
        return [r for r in range(len(self.components)) if r != self.external_index]


def _signed_volume(p):
    return np.linalg.det(np.stack([p[1] - p[0], p[2] - p[0], p[3] - p[0]],
                                  axis=-1)) / 6.0


def build_mesh(coords, tet_list) -> Mesh:
    """Assemble the oriented complex from vertex coordinates and tet tuples."""
    vertices = np.asarray(coords, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise MeshError("coords must be an (n_v, 3) array")
    if not np.all(np.isfinite(vertices)):
        raise MeshError("vertex coordinates must be finite")
    tets_in = np.asarray(tet_list, dtype=np.int64)
    if tets_in.ndim != 2 or tets_in.shape[1] != 4:
        raise MeshError("tets must be an (n_t, 4) array")
    n_v = len(vertices)
    if tets_in.size and (tets_in.min() < 0 or tets_in.max() >= n_v):
        raise MeshError("tet vertex index out of range")

    tets = np.sort(tets_in, axis=1)
    if np.any(np.diff(tets, axis=1) == 0):
        bad = int(np.where(np.any(np.diff(tets, axis=1) == 0, axis=1))[0][0])
        raise MeshError(f"degenerate tet {bad}: repeated vertex")
    seen = {}
    for t, row in enumerate(map(tuple, tets)):
        if row in seen:
            raise MeshError(f"duplicate tet {t} (same vertices as {seen[row]})")
        seen[row] = t

    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    svol = _signed_volume(np.transpose(vertices[tets], (1, 0, 2)))
    if np.any(np.abs(svol) < DEGENERACY_TOL * diag ** 3):
        bad = int(np.argmin(np.abs(svol)))
        raise MeshError(f"degenerate tet {bad}: volume below tolerance")
    tet_orient = np.where(svol > 0, 1, -1).astype(np.int64)
    volumes = np.abs(svol)

    edge_set = {}
    face_set = {}
    for row in tets:
        a, b, c, d = (int(v) for v in row)
        for (i, j) in LOCAL_EDGES:
            edge_set[(row[i], row[j])] = None
        for (i, j, k) in LOCAL_FACES:
            key = (row[i], row[j], row[k])
            face_set[key] = face_set.get(key, 0) + 1
    for key, cnt in face_set.items():
        if cnt > 2:
            raise MeshError(f"non-manifold face {key}: shared by {cnt} tets")

    edges = np.array(sorted((int(a), int(b)) for (a, b) in edge_set),
                     dtype=np.int64).reshape(-1, 2)
    faces = np.array(sorted(tuple(int(v) for v in f) for f in face_set),
                     dtype=np.int64).reshape(-1, 3)
    edge_index = {tuple(e): i for i, e in enumerate(map(tuple, edges))}
    face_index = {tuple(f): i for i, f in enumerate(map(tuple, faces))}

    tet_edges = np.empty((len(tets), 6), dtype=np.int64)
    tet_faces = np.empty((len(tets), 4), dtype=np.int64)
    for t, row in enumerate(tets):
        for le, (i, j) in enumerate(LOCAL_EDGES):
            tet_edges[t, le] = edge_index[(int(row[i]), int(row[j]))]
        for lf, (i, j, k) in enumerate(LOCAL_FACES):
            tet_faces[t, lf] = face_index[(int(row[i]), int(row[j]), int(row[k]))]

    # connectivity of the vertex-edge graph
    if len(tets):
        parent = np.arange(n_v)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (a, b) in edges:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
        roots = {find(int(v)) for v in range(n_v)}
        if len(roots) > 1:
            raise MeshError("complex is not connected")

    return Mesh(vertices=vertices, tets=tets, tet_orient=tet_orient,
                edges=edges, faces=faces, tet_edges=tet_edges,
                tet_faces=tet_faces, volumes=volumes)


def derive_incidence(m: Mesh) -> IncidenceOperators:
    """Signed incidence matrices G, C, D with C.G = 0 and D.C = 0 exactly."""
    n_e = m.n_e
    rows = np.repeat(np.arange(n_e), 2)
    cols = m.edges.ravel()
    data = np.tile(np.array([-1, 1], dtype=np.int64), n_e)
    G = sp.csr_matrix((data, (rows, cols)), shape=(n_e, m.n_v))

    # face cycle a->b->c->a: +1 on [a,b] and [b,c], -1 on [a,c]
    n_f = m.n_f
    crows = np.repeat(np.arange(n_f), 3)
    ab = m.faces[:, [0, 1]]
    bc = m.faces[:, [1, 2]]
    ac = m.faces[:, [0, 2]]
    eidx = m.edge_index
    ccols = np.array([[eidx[(int(a), int(b))] for a, b in ab],
                      [eidx[(int(a), int(b))] for a, b in bc],
                      [eidx[(int(a), int(b))] for a, b in ac]],
                     dtype=np.int64).T.ravel()
    cdata = np.tile(np.array([1, 1, -1], dtype=np.int64), n_f)
    C = sp.csr_matrix((cdata, (crows, ccols)), shape=(n_f, n_e))

    # D sign: +1 iff the face normal points out of the tet
    drows = np.repeat(np.arange(m.n_t), 4)
    dcols = m.tet_faces.ravel()
    base = np.array([(-1) ** k for k in _OMITTED], dtype=np.int64)
    ddata = (m.tet_orient[:, None] * base[None, :]).ravel()
    D = sp.csr_matrix((ddata, (drows, dcols)), shape=(m.n_t, m.n_f))
    return IncidenceOperators(G=G, C=C, D=D)


def extract_boundary(m: Mesh) -> BoundaryStructure:
    """Group boundary faces into connected components; identify the external one."""
    counts = np.zeros(m.n_f, dtype=np.int64)
    owner = np.full(m.n_f, -1, dtype=np.int64)
    for t in range(m.n_t):
        for f in m.tet_faces[t]:
            counts[f] += 1
            owner[f] = t
    bfaces = np.where(counts == 1)[0]
    if len(bfaces) == 0:
        raise MeshError("closed complex: empty boundary is unsupported")
    owner = np.where(counts == 1, owner, -1)

    # connect boundary faces through shared edges
    edge_faces = {}
    face_edge_ids = {}
    for f in bfaces:
        fa, fb, fc = (int(v) for v in m.faces[f])
        eids = [m.edge_index[(fa, fb)], m.edge_index[(fb, fc)],
                m.edge_index[(fa, fc)]]
        face_edge_ids[int(f)] = eids
        for e in eids:
            edge_faces.setdefault(e, []).append(int(f))

    comp_of = {}
    components = []
    for f0 in bfaces:
        f0 = int(f0)
        if f0 in comp_of:
            continue
        cid = len(components)
        stack = [f0]
        comp_of[f0] = cid
        members = []
        while stack:
            f = stack.pop()
            members.append(f)
            for e in face_edge_ids[f]:
                for f2 in edge_faces[e]:
                    if f2 not in comp_of:
                        comp_of[f2] = cid
                        stack.append(f2)
        components.append(np.array(sorted(members), dtype=np.int64))

    # closed-surface check: each boundary edge borders exactly two faces
    for e, fs in edge_faces.items():
        if len(fs) != 2:
            raise MeshError(
                f"boundary edge {e} belongs to {len(fs)} boundary faces; "
                "boundary is not a closed surface")

    comp_vertices = []
    comp_edges = []
    boxes = []
    for comp in components:
        vs = np.unique(m.faces[comp].ravel())
        es = np.unique(np.array([e for f in comp for e in face_edge_ids[int(f)]]))
        comp_vertices.append(vs)
        comp_edges.append(es)
        pts = m.vertices[vs]
        boxes.append((pts.min(axis=0), pts.max(axis=0)))

    external = 0
    if len(components) > 1:
        # the external component's bounding box contains all others
        for r, (lo, hi) in enumerate(boxes):
            if all(np.all(lo <= lo2 + 1e-12) and np.all(hi >= hi2 - 1e-12)
                   for (lo2, hi2) in boxes):
                external = r
                break
        else:
            sizes = [np.prod(hi - lo) for (lo, hi) in boxes]
            external = int(np.argmax(sizes))

    return BoundaryStructure(components=components, external_index=external,
                             component_vertices=comp_vertices,
                             component_edges=comp_edges,
                             face_component=comp_of, face_owner=owner)
