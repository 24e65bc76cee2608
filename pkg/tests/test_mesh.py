import numpy as np
import pytest

from cqwave.mesh import (
    LSHAPE_CORNERS,
    MeshError,
    MeshFormatError,
    TriangleMesh,
    generate_disk,
    generate_lshape,
    load_mesh,
    refine_uniform,
    save_mesh,
)


def test_disk_level0_counts():
    m = generate_disk(1.0, 0)
    assert (m.n_vertices, m.n_triangles, m.n_boundary_edges) == (7, 6, 6)
    m.validate()


@pytest.mark.parametrize("level", [1, 2, 3])
def test_disk_quality_and_area(level):
    m = generate_disk(3.0, level, base_rings=2)
    m.validate()
    assert m.min_angle() > 44.0
    # inscribed polygon area converges to pi R^2 from below
    n = m.n_boundary_edges
    assert m.area == pytest.approx(0.5 * n * 9.0 * np.sin(2 * np.pi / n), rel=1e-12)
    r = np.linalg.norm(m.vertices[m.boundary_vertices], axis=1)
    np.testing.assert_allclose(r, 3.0, rtol=1e-14)


def test_disk_h_halves_with_level():
    hs = [generate_disk(1.0, l, 2).h for l in (1, 2, 3)]
    assert hs[0] / hs[1] == pytest.approx(2.0, rel=0.1)
    assert hs[1] / hs[2] == pytest.approx(2.0, rel=0.1)


def test_boundary_normals_point_outward():
    m = generate_disk(2.0, 2)
    a = m.vertices[m.boundary_edges[:, 0]]
    b = m.vertices[m.boundary_edges[:, 1]]
    mid = 0.5 * (a + b)
    assert np.all(np.einsum("ij,ij->i", m.boundary_normals(), mid) > 0)


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_lshape(level):
    m = generate_lshape(level)
    m.validate()
    assert m.area == pytest.approx(12.0, rel=1e-14)
    assert m.min_angle() == pytest.approx(45.0)
    bv = m.vertices[m.boundary_vertices]
    for corner in LSHAPE_CORNERS:
        assert np.min(np.linalg.norm(bv - corner, axis=1)) < 1e-14


def test_refine_uniform_disk_projects_to_circle():
    m = generate_disk(1.5, 1)
    r = refine_uniform(m)
    r.validate()
    assert r.n_triangles == 4 * m.n_triangles
    assert r.n_boundary_edges == 2 * m.n_boundary_edges
    np.testing.assert_allclose(np.linalg.norm(r.vertices[r.boundary_vertices], axis=1), 1.5, rtol=1e-14)


def test_refine_uniform_preserves_polygon_area():
    m = generate_lshape(0)
    assert refine_uniform(m).area == pytest.approx(m.area, rel=1e-14)


def test_save_load_roundtrip(tmp_path):
    m = generate_lshape(1)
    p = tmp_path / "l.mesh"
    save_mesh(m, p)
    m2 = load_mesh(p)
    np.testing.assert_array_equal(m.vertices, m2.vertices)
    np.testing.assert_array_equal(m.triangles, m2.triangles)
    np.testing.assert_array_equal(m.boundary_edges, m2.boundary_edges)


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("3 1 3\n0 0\n1 0\n", 4),
        ("3 1 3\n0 0\n1 x\n0 1\n0 1 2\n0 1\n1 2\n2 0\n", 3),
        ("3 1 3\n0 0\n1 0\n0 1\n0 1 5\n0 1\n1 2\n2 0\n", 5),
        ("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n2 0\nextra\n", 9),
    ],
)
def test_load_reports_line_numbers(tmp_path, text, line):
    p = tmp_path / "bad.mesh"
    p.write_text(text)
    with pytest.raises(MeshFormatError) as err:
        load_mesh(p)
    assert err.value.lineno == line
    assert f":{line}:" in str(err.value)


def test_validate_rejects_clockwise_triangle():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    bad = TriangleMesh(v, np.array([[0, 2, 1]]), np.array([[0, 2], [2, 1], [1, 0]]))
    with pytest.raises(MeshError):
        bad.validate()


def test_validate_rejects_wrong_boundary():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    bad = TriangleMesh(v, np.array([[0, 1, 2]]), np.array([[0, 1], [1, 2]]))
    with pytest.raises(MeshError):
        bad.validate()


def test_generator_arguments():
    with pytest.raises(ValueError):
        generate_disk(-1.0, 1)
    with pytest.raises(ValueError):
        generate_lshape(-1)
