import numpy as np
import pytest

from src.geometry import (
    ElementLabel, boundary_point_set, build_slab_geometry, build_time_slice, classify_elements,
    count_interface_components, decompose_cut_element, element_point_set, face_point_set,
    reconstruct_interface, segment_rule, simpson_rule, snap_vertex_values, tangential_projector,
    triangle_rule
)
from src.levelset import circle_distance, get_case, init_from_function
from src.mesh import Rectangle, build_uniform_mesh
from src.utils.errors import GeometryError


def test_simpson_rule_is_exact_for_cubics():
    rule = simpson_rule(1.0, 0.5)
    assert np.allclose(rule.points, [1.0, 1.25, 1.5])
    assert rule.integrate(rule.points ** 3) == pytest.approx((1.5 ** 4 - 1.0) / 4.0)
    assert np.allclose(rule.normalized(), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        simpson_rule(0.0, 0.0)


def test_triangle_and_segment_rules():
    coords = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    points, weights = triangle_rule(coords)
    assert weights.sum() == pytest.approx(0.5)
    assert np.sum(weights * points[..., 0] ** 2) == pytest.approx(1.0 / 12.0)
    assert np.sum(weights * points[..., 0] ** 2 * points[..., 1] ** 2) == pytest.approx(1.0 / 180.0)

    endpoints = np.array([[[0.0, 0.0], [2.0, 0.0]]])
    points, weights = segment_rule(endpoints)
    assert weights.sum() == pytest.approx(2.0)
    assert np.sum(weights * points[..., 0] ** 5) == pytest.approx(64.0 / 6.0)


def test_element_and_boundary_point_sets(unit_mesh):
    points = element_point_set(unit_mesh, np.arange(unit_mesh.n_elements))
    assert points.integrate(np.ones(len(points))) == pytest.approx(1.0)
    boundary = boundary_point_set(unit_mesh)
    assert boundary.integrate(np.ones(len(boundary))) == pytest.approx(4.0)
    left = boundary.tags == "left"
    assert np.allclose(boundary.normals[left], [-1.0, 0.0])
    top = boundary.tags == "top"
    assert np.allclose(boundary.normals[top], [0.0, 1.0])
    # the divergence theorem for x on the unit square
    assert boundary.integrate(boundary.points[:, 0] * boundary.normals[:, 0]) == pytest.approx(1.0)


def test_face_point_set(unit_mesh):
    faces = face_point_set(unit_mesh, unit_mesh.interior_faces)
    towards = np.einsum("fd,fd->f", faces.normals,
                        unit_mesh.centroids[faces.elements[:, 1]] - unit_mesh.centroids[faces.elements[:, 0]])
    assert np.all(towards > 0.0)
    assert np.allclose(faces.weights.sum(axis=1), faces.lengths)
    nq = faces.weights.shape[1]
    physical = [
        unit_mesh.to_physical(np.repeat(faces.elements[:, side], nq), faces.reference[:, :, side].reshape(-1, 2))
        for side in (0, 1)
    ]
    assert np.allclose(physical[0], physical[1])
    assert np.allclose(faces.h, 0.1 * np.sqrt(2.0))
    with pytest.raises(ValueError):
        face_point_set(unit_mesh, unit_mesh.boundary_faces())


def test_classification(unit_mesh, drop):
    phi = init_from_function(unit_mesh, 1, drop)
    labels = classify_elements(phi)
    assert set(np.unique(labels)) == {ElementLabel.CUT, ElementLabel.PHASE1, ElementLabel.PHASE2}
    values = phi.vertex_values[unit_mesh.triangles]
    cut = labels == ElementLabel.CUT
    assert np.all((values[cut] > 0).any(axis=1) & (values[cut] < 0).any(axis=1))
    with pytest.raises(ValueError):
        classify_elements(init_from_function(unit_mesh, 2, drop))


def test_snapping_pushes_zeros_into_phase_one(unit_mesh):
    snapped = snap_vertex_values(unit_mesh, np.zeros(unit_mesh.n_vertices))
    assert np.all(snapped > 0.0)
    assert np.all(snapped < 1e-11)


def test_vertex_on_interface(unit_mesh):
    # x = 0.5 is a grid line, so a whole column of vertices has phi = 0
    time_slice = build_time_slice(init_from_function(unit_mesh, 1, lambda p: p[:, 0] - 0.5))
    assert time_slice.interface.total_length == pytest.approx(1.0)
    assert time_slice.decomposition.phase_area(1) == pytest.approx(0.5)
    assert time_slice.decomposition.phase_area(2) == pytest.approx(0.5)
    assert count_interface_components(time_slice.interface) == 1


def test_circle_interface(unit_mesh, drop):
    interface = reconstruct_interface(init_from_function(unit_mesh, 1, drop))
    assert interface.total_length == pytest.approx(2.0 * np.pi * 0.25, rel=3e-2)
    assert np.allclose(np.linalg.norm(interface.normals, axis=1), 1.0)
    # normals point from Omega_1 into the drop
    inward = np.einsum("nd,nd->n", interface.normals, np.array([0.5, 0.5]) - interface.midpoints)
    assert np.all(inward > 0.0)
    # segments are perpendicular to their normals
    tangent = interface.endpoints[:, 1] - interface.endpoints[:, 0]
    assert np.allclose(np.einsum("nd,nd->n", tangent, interface.normals), 0.0, atol=1e-12)
    assert count_interface_components(interface) == 1


def test_two_drops_have_two_components():
    case = get_case("drop_pair")
    mesh = build_uniform_mesh(Rectangle(*case.domain), 32, 8)
    interface = reconstruct_interface(init_from_function(mesh, 1, case.phi0))
    assert count_interface_components(interface) == 2


def test_decompose_cut_element():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    parts = decompose_cut_element(coords, np.array([-1.0, 1.0, 1.0]))
    assert len(parts) == 3
    areas = {}
    for triangle, phase in parts:
        e1, e2 = triangle[1] - triangle[0], triangle[2] - triangle[0]
        areas[phase] = areas.get(phase, 0.0) + 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    assert areas[2] == pytest.approx(0.125)
    assert areas[1] == pytest.approx(0.375)
    whole = decompose_cut_element(coords, np.array([1.0, 2.0, 3.0]))
    assert len(whole) == 1 and whole[0][1] == ElementLabel.PHASE1


def test_decomposition_covers_the_domain(unit_mesh, drop):
    time_slice = build_time_slice(init_from_function(unit_mesh, 2, drop))
    decomposition = time_slice.decomposition
    total = decomposition.phase_area(1) + decomposition.phase_area(2)
    assert total == pytest.approx(1.0)
    assert decomposition.phase_area(2) == pytest.approx(np.pi / 16.0, rel=5e-2)
    assert time_slice.bulk_points(2).integrate(np.ones(len(time_slice.bulk_points(2)))) == \
        pytest.approx(decomposition.phase_area(2))
    cut = time_slice.cut_elements[0]
    parts = decomposition.parts_of(cut)
    assert len(parts) == 3
    with pytest.raises(ValueError):
        time_slice.bulk_points(0)


def test_phase_value(unit_mesh, drop):
    time_slice = build_time_slice(init_from_function(unit_mesh, 2, drop))
    points = np.array([[0.5, 0.5], [0.05, 0.05]])
    elements, reference = unit_mesh.locate(points)
    assert list(time_slice.phase_value(elements, reference)) == [2, 1]


def test_tangential_projector():
    normal = np.array([0.6, 0.8])
    projector = tangential_projector(normal)
    assert np.allclose(projector @ normal, 0.0)
    assert np.allclose(projector @ projector, projector)
    assert np.allclose(projector, projector.T)
    assert tangential_projector(np.array([[1.0, 0.0], [0.0, 1.0]])).shape == (2, 2, 2)
    with pytest.raises(ValueError):
        tangential_projector(np.array([1.0, 1.0]))


def test_moving_slab_active_sets(unit_mesh):
    quadrature = simpson_rule(0.0, 0.1)
    fields = [init_from_function(unit_mesh, 2, circle_distance((0.5 + t, 0.5), 0.25), t)
              for t in quadrature.points]
    slab = build_slab_geometry(fields, quadrature, index=3)
    band, phase1, phase2 = slab.active_elements
    for time_slice in slab.slices:
        assert np.all(np.isin(time_slice.cut_elements, band))
    assert np.all(np.isin(band, phase1)) and np.all(np.isin(band, phase2))
    assert np.all(np.isin(unit_mesh.face_elements[slab.ghost_faces[0]], band))
    assert np.all(np.isin(unit_mesh.face_elements[slab.ghost_faces[2]], phase2))
    assert slab.dt == pytest.approx(0.1)
    assert slab.end.time == pytest.approx(0.1)
    slab.require_interface()


def test_empty_interface_is_reported(unit_mesh):
    quadrature = simpson_rule(0.0, 0.1)
    fields = [init_from_function(unit_mesh, 2, lambda p: np.ones(len(p)), t) for t in quadrature.points]
    slab = build_slab_geometry(fields, quadrature, index=7)
    with pytest.raises(GeometryError, match="slab 7"):
        slab.require_interface()
