import numpy as np
import pytest

from curldiv import (FEFunction, build_L_star, build_N_star, component_fluxes,
                     curl_image_basis, verify_periods)
from curldiv.cli import compute_topology


def _gauged(topo, m):
    return build_N_star(topo.tree, topo.homology, m.n_e)


def test_cube_gives_12_plain_fields(cube1, topo_cube1):
    gb = _gauged(topo_cube1, cube1)
    assert gb.dim == 12
    assert gb.n_combined == 0


def test_single_tet_gives_3_fields(tet1):
    topo = compute_topology(tet1)
    gb = _gauged(topo, tet1)
    assert gb.dim == 3
    assert gb.n_combined == 0


def test_torus_one_combined_field(torus, topo_torus):
    gb = _gauged(topo_torus, torus)
    assert gb.dim == topo_torus.tree.n_Q - 1
    assert gb.n_combined == 1


def test_fields_supported_on_cotree_only(torus, topo_torus):
    gb = _gauged(topo_torus, torus)
    tree = set(int(e) for e in topo_torus.tree.tree_edges)
    rows = gb.fields.tocoo().row
    assert all(int(r) not in tree for r in rows)


def test_combined_field_supported_on_closing_edges(torus, topo_torus):
    gb = _gauged(topo_torus, torus)
    closing = set(int(e) for e in gb.closing_edges)
    col = gb.fields.tocsc()[:, :gb.n_combined].tocoo()
    assert all(int(r) in closing for r in col.row)


@pytest.mark.parametrize("fixture,mesh", [("topo_cube1", "cube1"),
                                          ("topo_torus", "torus"),
                                          ("topo_hollow", "hollow")])
def test_curls_in_W0h(fixture, mesh, request):
    topo = request.getfixturevalue(fixture)
    m = request.getfixturevalue(mesh)
    gb = _gauged(topo, m)
    S = curl_image_basis(gb, m)
    # exact zero divergence (D.C = 0 in integers)
    div = (m.incidence.D @ S).toarray()
    assert np.all(div == 0)
    # zero flux through every boundary component
    dense = S.toarray()
    scale = 1.0 + np.abs(dense).max()
    for col in range(dense.shape[1]):
        v = FEFunction("face", m, dense[:, col])
        fluxes = component_fluxes(m, topo.boundary, v)
        assert np.abs(fluxes).max() <= 1e-12 * scale


@pytest.mark.parametrize("fixture,mesh", [("topo_cube1", "cube1"),
                                          ("topo_torus", "torus"),
                                          ("topo_hollow", "hollow")])
def test_dimension_identity_and_rank(fixture, mesh, request):
    topo = request.getfixturevalue(fixture)
    m = request.getfixturevalue(mesh)
    gb = _gauged(topo, m)
    g = topo.homology.g
    p = topo.boundary.p
    assert gb.dim == topo.tree.n_Q - g
    assert gb.dim == m.n_f - m.n_t - p
    S = curl_image_basis(gb, m).toarray()
    assert np.linalg.matrix_rank(S) == gb.dim


def test_basis_fields_full_column_rank(torus, topo_torus):
    gb = _gauged(topo_torus, torus)
    assert np.linalg.matrix_rank(gb.fields.toarray()) == gb.dim


def test_verify_periods_torus(torus, topo_torus):
    gb = _gauged(topo_torus, torus)
    report = verify_periods(gb, topo_torus.homology)
    assert report["checked"] == 1
    assert report["max_abs_period"] <= 1e-10
    assert report["violations"] == []


def test_verify_periods_empty_for_cube(cube1, topo_cube1):
    gb = _gauged(topo_cube1, cube1)
    report = verify_periods(gb, topo_cube1.homology)
    assert report["checked"] == 0


def test_plain_fields_have_zero_periods(torus, topo_torus):
    # plain cotree fields avoid the closing edges, so periods vanish on them
    gb = _gauged(topo_torus, torus)
    closing = set(int(e) for e in gb.closing_edges)
    plain = gb.fields.tocsc()[:, gb.n_combined:].tocoo()
    assert all(int(r) not in closing for r in plain.row)


def test_L_star_counts(tet1, cube1):
    assert build_L_star(tet1).dim == 3
    assert build_L_star(cube1).dim == 7
    rb = build_L_star(cube1)
    assert rb.excluded == cube1.n_v - 1
    assert rb.excluded not in set(int(v) for v in rb.retained)


def test_L_star_gradients_full_rank(cube1):
    rb = build_L_star(cube1)
    G = cube1.incidence.G.toarray()[:, rb.retained]
    assert np.linalg.matrix_rank(G) == cube1.n_v - 1
