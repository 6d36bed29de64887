import numpy as np
import pytest

from src.geometry import classify_elements, reconstruct_interface
from src.levelset import (
    AdvectedLevelSet, AnalyticVelocity, ConstantVelocity, LevelSetBackendFactory, NodalVelocity,
    PrescribedLevelSet, ZeroVelocity, advect, circle_distance, get_case, init_from_function,
    project_to_p1, redistance_to_interface, streamline_parameter, translate_case
)
from src.mesh import Rectangle, build_uniform_mesh
from src.spaces import lagrange_nodes, n_nodes


def test_init_from_function_sizes(unit_mesh, drop):
    p1 = init_from_function(unit_mesh, 1, drop)
    p2 = init_from_function(unit_mesh, 2, drop, t0=0.5)
    assert p1.coeffs.shape == (unit_mesh.n_vertices,)
    assert p2.coeffs.shape == (unit_mesh.n_vertices + unit_mesh.n_faces,)
    assert p2.time == 0.5
    assert np.allclose(project_to_p1(p2).coeffs, p1.coeffs)
    assert project_to_p1(p1) is p1


def test_level_set_rejects_bad_coefficients(unit_mesh, drop):
    phi = init_from_function(unit_mesh, 1, drop)
    with pytest.raises(ValueError):
        phi.with_coeffs(np.zeros(3), 0.0)
    with pytest.raises(ValueError):
        phi.with_coeffs(np.full(unit_mesh.n_vertices, np.nan), 0.0)


def test_p2_level_set_reproduces_quadratics(unit_mesh, rng):
    phi = init_from_function(unit_mesh, 2, lambda p: p[:, 0] ** 2 - p[:, 0] * p[:, 1])
    points = rng.uniform(0.0, 1.0, size=(20, 2))
    elements, reference = unit_mesh.locate(points)
    exact = points[:, 0] ** 2 - points[:, 0] * points[:, 1]
    assert np.allclose(phi.evaluate(elements, reference), exact)
    gradient = np.column_stack([2.0 * points[:, 0] - points[:, 1], -points[:, 0]])
    assert np.allclose(phi.gradient(elements, reference), gradient)


def test_streamline_parameter():
    tau = streamline_parameter(np.array([0.0, 1.0]), np.array([0.1, 0.1]), 0.2, c_sd=2.0)
    assert tau[0] == pytest.approx(2.0 * 0.1)
    assert tau[1] == pytest.approx(2.0 / np.sqrt(100.0 + 400.0))


def test_advect_without_velocity_keeps_level_set(unit_mesh, drop):
    phi = init_from_function(unit_mesh, 2, drop)
    fields = advect(phi, ZeroVelocity(), 0.0, 0.1, [0.0, 0.05, 0.1])
    assert [f.time for f in fields] == [0.0, 0.05, 0.1]
    for field in fields:
        assert np.allclose(field.coeffs, phi.coeffs)


def test_advect_translates_linear_level_set(unit_mesh):
    phi = init_from_function(unit_mesh, 2, lambda p: p[:, 0] - 0.5)
    fields = advect(phi, ConstantVelocity((1.0, 0.0)), 0.0, 0.1, [0.05, 0.1])
    nodes = lagrange_nodes(unit_mesh, 2)
    assert np.allclose(fields[0].coeffs, nodes[:, 0] - 0.55, atol=1e-10)
    assert np.allclose(fields[1].coeffs, nodes[:, 0] - 0.6, atol=1e-10)


def test_advect_rejects_targets_outside_slab(unit_mesh, drop):
    phi = init_from_function(unit_mesh, 1, drop)
    with pytest.raises(ValueError):
        advect(phi, ZeroVelocity(), 0.0, 0.1, [0.2])
    with pytest.raises(ValueError):
        advect(phi, ZeroVelocity(), 0.0, 0.1, [0.1, 0.05])


def test_redistance_keeps_signs_and_approximates_distance(unit_mesh):
    exact = circle_distance((0.5, 0.5), 0.27)
    phi = init_from_function(unit_mesh, 1, lambda p: 3.0 * exact(p) + 2.0 * exact(p) ** 2)
    result = redistance_to_interface(phi)
    assert np.array_equal(np.sign(result.coeffs), np.sign(phi.coeffs))
    h = unit_mesh.h_per_element.max()
    assert np.max(np.abs(result.coeffs - exact(unit_mesh.vertices))) < 0.5 * h


def test_redistance_moves_interface_by_second_order_only(unit_mesh):
    center = np.array([0.5, 0.5])
    exact = circle_distance(tuple(center), 0.27)
    phi = init_from_function(unit_mesh, 1, lambda p: 3.0 * exact(p) + 2.0 * exact(p) ** 2)
    result = redistance_to_interface(phi)
    before = reconstruct_interface(phi, classify_elements(phi)).endpoints.reshape(-1, 2)
    after = reconstruct_interface(result, classify_elements(result)).endpoints.reshape(-1, 2)
    h = unit_mesh.h_per_element.max()
    for points in (before, after):
        radius = np.linalg.norm(points - center, axis=1)
        assert np.max(np.abs(radius - 0.27)) < 2.0 * h ** 2


def test_redistance_without_interface_is_identity(unit_mesh):
    phi = init_from_function(unit_mesh, 1, lambda p: np.ones(len(p)))
    assert redistance_to_interface(phi) is phi


def test_nodal_velocity_interpolates(unit_mesh, rng):
    nodes = lagrange_nodes(unit_mesh, 2)
    values = np.column_stack([nodes[:, 1] ** 2, nodes[:, 0] * nodes[:, 1]])
    sampler = NodalVelocity(unit_mesh, 2, values)
    points = rng.uniform(0.0, 1.0, size=(10, 2))
    expected = np.column_stack([points[:, 1] ** 2, points[:, 0] * points[:, 1]])
    assert np.allclose(sampler.value(0.0, points), expected)
    gradient = sampler.gradient(0.0, points)
    assert np.allclose(gradient[:, 0, 1], 2.0 * points[:, 1])
    assert np.allclose(gradient[:, 1, 0], points[:, 1])
    with pytest.raises(ValueError):
        NodalVelocity(unit_mesh, 2, np.zeros((n_nodes(unit_mesh, 1), 2)))


def test_analytic_velocity_without_gradient():
    sampler = AnalyticVelocity(lambda t, p: np.zeros((len(p), 2)))
    assert sampler.value(0.0, np.zeros((3, 2))).shape == (3, 2)
    with pytest.raises(ValueError):
        sampler.gradient(0.0, np.zeros((3, 2)))


def test_backend_factory():
    assert set(LevelSetBackendFactory.get_available_backends()) == {"prescribed", "advected"}
    backend = LevelSetBackendFactory.create_backend("advected", c_sd=0.5)
    assert isinstance(backend, AdvectedLevelSet)
    with pytest.raises(ValueError, match="not supported"):
        LevelSetBackendFactory.create_backend("fast_marching")
    with pytest.raises(ValueError):
        AdvectedLevelSet(c_sd=0.0)


def test_prescribed_backend_interpolates_each_time(unit_mesh):
    case = get_case("stretching_circle")
    mesh = build_uniform_mesh(Rectangle(*case.domain), 8, 8)
    phi_n = init_from_function(mesh, 2, case.phi0)
    backend = PrescribedLevelSet(case.phi_exact)
    fields = backend.fields_for_slab(phi_n, [0.0, 0.5, 1.0], 1.0)
    assert fields[0] is phi_n
    assert [f.time for f in fields] == [0.0, 0.5, 1.0]
    nodes = lagrange_nodes(mesh, 2)
    assert np.allclose(fields[2].coeffs, case.phi_exact(1.0, nodes))


def test_advected_backend_needs_velocity(unit_mesh, drop):
    phi = init_from_function(unit_mesh, 2, drop)
    with pytest.raises(ValueError):
        AdvectedLevelSet().fields_for_slab(phi, [0.0, 0.05, 0.1], 0.1)


def test_backend_redistances_last_field(unit_mesh, drop):
    calls = []

    def redistance(phi):
        calls.append(phi.time)
        return phi

    phi = init_from_function(unit_mesh, 2, drop)
    backend = AdvectedLevelSet(redistance=redistance)
    backend.fields_for_slab(phi, [0.0, 0.05, 0.1], 0.1, ZeroVelocity())
    assert calls == [0.1]


def test_registered_cases():
    with pytest.raises(ValueError, match="not registered"):
        get_case("bubble")
    case = get_case("example1")
    points = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(case.phi(0.0, points), 0.0)
    with pytest.raises(ValueError):
        get_case("rising_drop").phi(0.1, points)


def test_example1_exact_solution_decays():
    case = get_case("example1")
    point = np.array([[0.5, 0.5]])
    assert case.w_exact(1.0, point)[0] == pytest.approx(0.25 * np.exp(-4.0))


def test_translate_case_moves_every_function():
    case = get_case("static_drop")
    moved = translate_case(case, (0.01, -0.02))
    centre = np.array([[0.51, 0.48]])
    assert moved.phi0(centre)[0] == pytest.approx(-0.25)
    assert moved.phi(0.3, centre)[0] == pytest.approx(-0.25)
    assert moved.drop_center == pytest.approx((0.51, 0.48))
    assert moved.metadata["offset_x"] == pytest.approx(0.01)
    assert case.phi0(np.array([[0.5, 0.5]]))[0] == pytest.approx(-0.25)
