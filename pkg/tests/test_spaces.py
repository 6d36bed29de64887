import numpy as np
import pytest
import scipy.sparse as sp

from src.geometry import face_point_set
from src.spaces import (
    DoubledSpace, ScalarSpace, SpaceTimeField, eval_basis, ghost_penalty_matrix, interpolate,
    interpolate_gradient, lagrange_nodes, reference_gradients, reference_values, spacetime_block,
    spacetime_dt, spacetime_eval, time_basis, time_basis_derivative, trace_at, transfer
)

P2_REFERENCE_NODES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])


@pytest.mark.parametrize("degree", [1, 2])
def test_partition_of_unity(degree, rng):
    reference = rng.dirichlet(np.ones(3), size=15)[:, 1:]
    assert np.allclose(reference_values(degree, reference).sum(axis=1), 1.0)
    assert np.allclose(reference_gradients(degree, reference).sum(axis=1), 0.0)


def test_p2_basis_is_nodal():
    assert np.allclose(reference_values(2, P2_REFERENCE_NODES), np.eye(6))


def test_quadratic_interpolation_is_exact(unit_mesh, rng):
    nodes = lagrange_nodes(unit_mesh, 2)
    coeffs = 1.0 + nodes[:, 0] * nodes[:, 1] - 2.0 * nodes[:, 1] ** 2
    points = rng.uniform(0.0, 1.0, size=(25, 2))
    elements, reference = unit_mesh.locate(points)
    exact = 1.0 + points[:, 0] * points[:, 1] - 2.0 * points[:, 1] ** 2
    assert np.allclose(interpolate(unit_mesh, 2, coeffs, elements, reference), exact)
    gradient = interpolate_gradient(unit_mesh, 2, coeffs, elements, reference)
    assert np.allclose(gradient, np.column_stack([points[:, 1], points[:, 0] - 4.0 * points[:, 1]]))


def test_eval_basis_outside_reference_triangle(unit_mesh):
    values, grads = eval_basis(unit_mesh, 1, 0, (0.25, 0.25))
    assert values.shape == (3,) and grads.shape == (3, 2)
    with pytest.raises(ValueError, match="outside the reference triangle"):
        eval_basis(unit_mesh, 1, 0, (0.8, 0.8))


def test_scalar_space_on_active_elements(unit_mesh):
    space = ScalarSpace(unit_mesh, 1, [0, 1])
    # two triangles of one cell share a diagonal
    assert space.n_dofs == 4
    assert space.dofs_of(np.array([0])).shape == (1, 3)
    with pytest.raises(ValueError, match="outside the active mesh"):
        space.dofs_of(np.array([5]))
    with pytest.raises(ValueError, match="not active"):
        space.eval_basis(5, (0.1, 0.1))
    with pytest.raises(ValueError):
        ScalarSpace(unit_mesh, 1, [])
    with pytest.raises(ValueError):
        ScalarSpace(unit_mesh, 3, [0])


def test_global_scatter_and_gather(unit_mesh):
    space = ScalarSpace(unit_mesh, 2, [0, 1, 2])
    coeffs = np.arange(space.n_dofs, dtype=float)
    full = space.to_global(coeffs)
    assert np.isnan(full).sum() == len(full) - space.n_dofs
    assert np.allclose(space.from_global(full), coeffs)

    wider = ScalarSpace(unit_mesh, 2, np.arange(10))
    moved = transfer(coeffs, wider, from_space=space)
    assert np.allclose(wider.to_global(moved)[space.node_ids], coeffs)
    assert np.count_nonzero(moved) == space.n_dofs - 1


def test_space_interpolates_functions(unit_mesh):
    space = ScalarSpace.full(unit_mesh, 2)
    coeffs = space.interpolate(lambda p: p[:, 0] ** 2)
    elements, reference = unit_mesh.locate(np.array([[0.33, 0.71]]))
    assert space.evaluate(coeffs, elements, reference)[0] == pytest.approx(0.33 ** 2)
    tabulation = space.tabulate(elements, reference)
    assert tabulation.gradient(coeffs)[0] == pytest.approx([0.66, 0.0])


def test_doubled_space_offsets(unit_mesh):
    first = ScalarSpace(unit_mesh, 2, np.arange(0, 20))
    second = ScalarSpace(unit_mesh, 2, np.arange(10, 40))
    doubled = DoubledSpace((first, second), components=2)
    assert doubled.n_dofs == 2 * (first.n_dofs + second.n_dofs)
    assert doubled.offset(1, 1) == first.n_dofs
    assert doubled.offset(2, 0) == 2 * first.n_dofs
    assert doubled.offset(2, 1) == 2 * first.n_dofs + second.n_dofs
    assert np.array_equal(doubled.double_valued_elements, np.arange(10, 20))
    with pytest.raises(ValueError):
        doubled.space(3)


def test_spacetime_field_in_time(unit_mesh):
    space = ScalarSpace.full(unit_mesh, 1)
    nodes = space.nodes()
    coeffs = np.stack([nodes[:, 0], np.ones(space.n_dofs)])
    field = SpaceTimeField(space, coeffs, t_n=1.0, dt=0.5)
    assert field.theta(1.25) == pytest.approx(0.5)
    # u = x + theta
    assert spacetime_eval(field, 1.25, [0.3, 0.4]) == pytest.approx(0.8)
    assert spacetime_dt(field, 1.1, [0.3, 0.4]) == pytest.approx(2.0)
    assert np.allclose(trace_at(field, 1.0), nodes[:, 0])
    assert np.allclose(trace_at(field, 1.5), nodes[:, 0] + 1.0)
    with pytest.raises(ValueError):
        trace_at(field, 1.2)
    with pytest.raises(ValueError, match="outside slab"):
        field.theta(2.0)
    with pytest.raises(ValueError):
        SpaceTimeField(space, np.zeros((3, space.n_dofs)), 0.0, 0.1)


def test_time_basis():
    assert np.allclose(time_basis(0.25, 1), [1.0, 0.25])
    assert np.allclose(time_basis(0.25, 0), [1.0])
    assert np.allclose(time_basis_derivative(0.5, 1), [0.0, 2.0])


def test_spacetime_block_is_kronecker_product():
    time_matrix = np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])
    spatial = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    block = spacetime_block(time_matrix, spatial)
    assert np.allclose(block.toarray(), np.kron(time_matrix, spatial.toarray()))


@pytest.mark.parametrize("degree,order", [(1, 1), (2, 1), (2, 2)])
def test_ghost_penalty_annihilates_global_polynomials(unit_mesh, degree, order):
    space = ScalarSpace.full(unit_mesh, degree)
    faces = face_point_set(unit_mesh, unit_mesh.interior_faces)
    penalty = ghost_penalty_matrix(space, faces, order, np.ones(len(faces.faces)))
    nodes = space.nodes()
    polynomial = nodes[:, 0] - 2.0 * nodes[:, 1] + (nodes[:, 0] * nodes[:, 1] if degree == 2 else 0.0)
    assert np.allclose(penalty @ polynomial, 0.0, atol=1e-9)
    assert abs(penalty - penalty.T).max() < 1e-12
    rough = np.sin(3.0 * nodes[:, 0]) + nodes[:, 1] ** 3
    assert rough @ (penalty @ rough) > 0.0


def test_ghost_penalty_without_faces(unit_mesh):
    space = ScalarSpace.full(unit_mesh, 1)
    faces = face_point_set(unit_mesh, unit_mesh.interior_faces[:0])
    penalty = ghost_penalty_matrix(space, faces, 1, np.ones(0))
    assert penalty.shape == (space.n_dofs, space.n_dofs)
    assert penalty.nnz == 0
