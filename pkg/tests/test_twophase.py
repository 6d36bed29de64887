from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from src.bench import run_case
from src.config import load_run_config
from src.geometry import boundary_point_set, build_time_slice
from src.levelset import PrescribedLevelSet, get_case, init_from_function
from src.linalg import SparseSystem
from src.mesh import Rectangle, build_uniform_mesh
from src.spaces import lagrange_nodes
from src.surfactant import SurfactantParams
from src.twophase import (
    CoupledAssembler, CoupledParams, EquationOfState, FlowLayout, FluidParams, NewtonParams,
    NitscheParams, SliceBasis, StabParams, TwoPhaseSolver, W_KEY, benchmark_quantities, default_walls,
    extend_traces, form_a, form_b, form_c, form_fGamma_jacobian, increment_norm, laplace_young_jump,
    p_key, pressure_gauge, restricted_nodal_velocity, stab_sp, stab_su, u_key, velocity_l2_norm
)
from src.twophase.newton import place_blocks
from src.utils.errors import ConvergenceError, EquationOfStateError, GeometryError

STOKES = FluidParams(rho1=1.0, rho2=1.0, mu1=1.0, mu2=1.0, convection=False)


def _basis(slab, layout, which=0):
    return SliceBasis(slab.slices[which], layout, boundary_point_set(slab.mesh))


def _dense(layout, blocks):
    system = SparseSystem(layout.n)
    place_blocks(system, layout, blocks, np.ones((1, 1)))
    return system.finalize().toarray()


def _block_indices(layout, keys):
    return np.concatenate([layout.offset(key) + np.arange(layout.sizes[key]) for key in keys])


def test_linear_equation_of_state():
    eos = EquationOfState(sigma0=2.0, beta=0.25)
    assert np.allclose(eos.sigma([0.0, 1.0]), [2.0, 1.5])
    assert np.allclose(eos.dsigma([0.0, 3.0]), -0.5)


def test_langmuir_equation_of_state():
    eos = EquationOfState(kind="langmuir", sigma0=1.0, beta=0.1, w_inf=2.0)
    w = np.array([0.5, 1.0])
    eps = 1e-6
    assert np.allclose(eos.dsigma(w), (eos.sigma(w + eps) - eos.sigma(w - eps)) / (2.0 * eps), rtol=1e-6)
    with pytest.raises(EquationOfStateError):
        eos.sigma([2.5])
    with pytest.raises(ValidationError):
        EquationOfState(kind="langmuir", sigma0=1.0, beta=0.1)


def test_nitsche_weights_and_penalties():
    fluid = FluidParams(rho1=1.0, rho2=1.0, mu1=10.0, mu2=1.0)
    nitsche = NitscheParams()
    omega1, omega2 = nitsche.weights(fluid)
    assert omega1 == pytest.approx(1.0 / 11.0)
    assert omega2 == pytest.approx(10.0 / 11.0)
    assert NitscheParams(omega1=0.3).weights(fluid) == pytest.approx((0.3, 0.7))
    h = np.array([0.1])
    assert nitsche.interface_penalty(fluid, h)[0] == pytest.approx(100.0 * 20.0 / 11.0 / 0.1)
    assert nitsche.boundary_penalty(fluid, h)[0] == pytest.approx(100.0 * 10.0 / 0.1)
    with pytest.raises(ValidationError):
        FluidParams(rho1=1.0, rho2=1.0, mu1=0.0, mu2=1.0)
    with pytest.raises(ValidationError):
        CoupledParams(time_degree=3)


def test_flow_layout_numbering(drop_slab, make_layout):
    layout = make_layout(drop_slab)
    keys = [u_key(1, 0), u_key(1, 1), u_key(2, 0), u_key(2, 1), p_key(1), p_key(2), W_KEY, ("gauge",)]
    offsets = [layout.offset(key) for key in keys]
    assert offsets == sorted(offsets) and offsets[0] == 0
    sizes = layout.summary()
    assert layout.n == 2 * (2 * sizes["u1"] + 2 * sizes["u2"] + sizes["p1"] + sizes["p2"] + sizes["w"]) + 2
    x = layout.pack({p_key(2): np.ones(layout.sizes[p_key(2)])})
    assert layout.block(x, p_key(2)).shape == (2, sizes["p2"])
    assert layout.block(x, p_key(1)).sum() == 0.0
    assert layout.velocity_coeffs(x, 1).shape == (2, sizes["u1"], 2)
    with pytest.raises(ValueError):
        layout.check(np.zeros(layout.n + 1))
    with pytest.raises(KeyError):
        make_layout(drop_slab, with_surfactant=False).offset(W_KEY)
    with pytest.raises(ValueError):
        FlowLayout(layout.pressure, layout.pressure, None, 1)


def test_viscous_form_is_symmetric(drop_slab, make_layout):
    layout = make_layout(drop_slab, k=0, with_surfactant=False)
    fluid = FluidParams(rho1=1.0, rho2=1.0, mu1=3.0, mu2=0.5)
    matrix = _dense(layout, form_a(_basis(drop_slab, layout), fluid, NitscheParams(), default_walls()))
    assert np.allclose(matrix, matrix.T, atol=1e-10 * np.abs(matrix).max())


def test_constant_pressure_is_orthogonal_to_divergence(drop_slab, make_layout):
    layout = make_layout(drop_slab, k=0, with_surfactant=False)
    fluid = FluidParams(rho1=1.0, rho2=1.0, mu1=3.0, mu2=0.5)
    matrix = _dense(layout, form_b(_basis(drop_slab, layout), fluid, NitscheParams()))
    ones = layout.pack({p_key(1): np.ones(layout.sizes[p_key(1)]), p_key(2): np.ones(layout.sizes[p_key(2)])})
    assert np.allclose(ones @ matrix, 0.0, atol=1e-12)


def test_linear_matrix_pairs_divergence_and_gradient(drop_slab, make_layout):
    layout = make_layout(drop_slab, with_surfactant=False)
    assembler = CoupledAssembler(drop_slab, layout, STOKES, EquationOfState(sigma0=1.0), default_walls(),
                                 NitscheParams(), StabParams(), None,
                                 {phase: np.zeros((layout.velocity[phase - 1].n_dofs, 2)) for phase in (1, 2)})
    assert assembler.is_linear
    matrix = assembler.linear.toarray()
    velocity = _block_indices(layout, [u_key(p, c) for p in (1, 2) for c in (0, 1)])
    pressure = _block_indices(layout, [p_key(1), p_key(2)])
    gradient = matrix[np.ix_(velocity, pressure)]
    divergence = matrix[np.ix_(pressure, velocity)]
    assert np.abs(divergence).max() > 0.0
    assert np.allclose(gradient, -divergence.T)


def test_form_B_leaves_stabilization_to_the_linear_matrix(drop_slab, make_layout):
    layout = make_layout(drop_slab, k=0, with_surfactant=False)
    assembler = CoupledAssembler(drop_slab, layout, STOKES, EquationOfState(sigma0=1.0), default_walls(),
                                 NitscheParams(), StabParams(), None,
                                 {phase: np.zeros((layout.velocity[phase - 1].n_dofs, 2)) for phase in (1, 2)})
    block = assembler.form_B().finalize().toarray()
    velocity = _block_indices(layout, [u_key(p, c) for p in (1, 2) for c in (0, 1)])
    pressure = _block_indices(layout, [p_key(1), p_key(2)])
    assert np.count_nonzero(block[np.ix_(pressure, pressure)]) == 0
    assert np.count_nonzero(assembler.linear.toarray()[np.ix_(pressure, pressure)]) > 0
    # k = 0 has no time-derivative term, so mass + a is symmetric
    momentum = block[np.ix_(velocity, velocity)]
    assert np.allclose(momentum, momentum.T, atol=1e-10 * np.abs(momentum).max())


@pytest.mark.parametrize("eos", [
    EquationOfState(sigma0=1.0, beta=0.5),
    EquationOfState(kind="langmuir", sigma0=1.0, beta=0.5, w_inf=4.0),
], ids=["linear", "langmuir"])
def test_coupled_jacobian_matches_finite_differences(drop_slab, make_layout, rng, eos):
    layout = make_layout(drop_slab)
    fluid = FluidParams(rho1=1.0, rho2=2.0, mu1=1.0, mu2=0.5, convection=True)
    u_minus = {phase: np.zeros((layout.velocity[phase - 1].n_dofs, 2)) for phase in (1, 2)}
    assembler = CoupledAssembler(drop_slab, layout, fluid, eos, default_walls(), NitscheParams(), StabParams(),
                                 SurfactantParams(), u_minus, np.ones(layout.surfactant.n_dofs))
    assert not assembler.is_linear
    eps = 1e-6
    worst = 0.0
    for _ in range(3):
        x = 0.1 * rng.normal(size=layout.n)
        jacobian = assembler.assemble_DF(x)
        assert np.allclose(jacobian.rhs, assembler.assemble_F(x))
        matrix = jacobian.finalize()
        for _ in range(5):
            direction = rng.normal(size=layout.n)
            central = (assembler.assemble_F(x + eps * direction)
                       - assembler.assemble_F(x - eps * direction)) / (2.0 * eps)
            exact = matrix @ direction
            worst = max(worst, np.linalg.norm(exact - central) / np.linalg.norm(exact))
    assert worst <= 1e-6


def test_constant_tension_has_no_surfactant_jacobian(drop_slab, make_layout):
    layout = make_layout(drop_slab)
    blocks = form_fGamma_jacobian(_basis(drop_slab, layout), STOKES, NitscheParams(),
                                  EquationOfState(sigma0=1.0, beta=0.0), np.ones(layout.surfactant.n_dofs))
    assert blocks
    assert all(abs(matrix).max() == 0.0 for matrix in blocks.values())


def test_ghost_penalties_annihilate_polynomials(drop_slab, make_layout):
    layout = make_layout(drop_slab, with_surfactant=False)
    stab = StabParams(c_p=1.0, c_u1=1.0, c_u2=1.0)
    for phase in (1, 2):
        pressure = stab_sp(drop_slab, layout, STOKES, stab)[(p_key(phase), p_key(phase))]
        nodes = layout.space(p_key(phase)).nodes()
        assert np.allclose(pressure @ (2.0 * nodes[:, 0] - nodes[:, 1]), 0.0, atol=1e-10)

        key = u_key(phase, 1)
        velocity = stab_su(drop_slab, layout, STOKES, stab)[(key, key)]
        nodes = layout.space(key).nodes()
        quadratic = nodes[:, 0] ** 2 - 3.0 * nodes[:, 0] * nodes[:, 1] + nodes[:, 1]
        assert np.allclose(velocity @ quadratic, 0.0, atol=1e-9)


def test_pressure_gauge_rows(drop_slab, make_layout):
    layout = make_layout(drop_slab, with_surfactant=False)
    fluid = FluidParams(rho1=1.0, rho2=1.0, mu1=2.0, mu2=0.5)
    system = SparseSystem(layout.n)
    pressure_gauge(system, layout, drop_slab, fluid)
    matrix = system.finalize()
    assert abs(matrix - matrix.T).max() == 0.0
    decomposition = drop_slab.end.decomposition
    expected = decomposition.phase_area(1) / 2.0 + decomposition.phase_area(2) / 0.5
    for mode in range(layout.modes):
        row = matrix.getrow(layout.offset(("gauge",)) + mode)
        assert row.sum() == pytest.approx(expected)
        allowed = np.concatenate([
            layout.offset(p_key(phase)) + mode * layout.pressure[phase - 1].n_dofs
            + np.arange(layout.pressure[phase - 1].n_dofs) for phase in (1, 2)
        ])
        assert np.all(np.isin(row.indices, allowed))


def test_convection_of_a_linear_field(drop_slab, make_layout):
    layout = make_layout(drop_slab, k=0, with_surfactant=False)
    fluid = FluidParams(rho1=2.0, rho2=3.0, mu1=1.0, mu2=1.0)
    basis = _basis(drop_slab, layout)
    advecting, advected = {}, {}
    for phase in (1, 2):
        nodes = layout.velocity[phase - 1].nodes()
        advecting[phase] = np.column_stack([np.ones(len(nodes)), np.zeros(len(nodes))])
        advected[phase] = np.column_stack([nodes[:, 0], np.zeros(len(nodes))])
    blocks = form_c(basis, fluid, advecting, advected)
    decomposition = drop_slab.start.decomposition
    for phase in (1, 2):
        assert blocks[u_key(phase, 0)].sum() == pytest.approx(fluid.rho(phase) * decomposition.phase_area(phase))
        assert np.allclose(blocks[u_key(phase, 1)], 0.0)


def test_increment_norm_scales_pressure(drop_slab, make_layout):
    layout = make_layout(drop_slab, with_surfactant=False)
    delta = layout.pack({p_key(1): np.ones(layout.sizes[p_key(1)]), p_key(2): np.ones(layout.sizes[p_key(2)])})
    norm = increment_norm(layout, delta, NewtonParams(length_scale=0.5), EquationOfState(sigma0=2.0))
    assert norm == pytest.approx(0.25)


def test_extend_traces():
    first = np.array([np.nan, 1.0, np.nan])
    second = np.array([2.0, 2.0, np.nan])
    extended = extend_traces({1: first, 2: second})
    assert np.allclose(extended[1], [2.0, 1.0, 0.0])
    assert np.allclose(extended[2], [2.0, 2.0, 0.0])


def test_restricted_nodal_velocity():
    mesh = build_uniform_mesh(Rectangle(0.0, 1.0, 0.0, 1.0), 1, 1)
    nodes = lagrange_nodes(mesh, 2)
    phi = init_from_function(mesh, 2, lambda p: p[:, 0] - 0.5)
    first, second = np.full((len(nodes), 2), 1.0), np.full((len(nodes), 2), 2.0)
    right = nodes[:, 0] > 0.5
    velocity = restricted_nodal_velocity({1: first, 2: second}, phi)
    assert np.allclose(velocity[:, 0], np.where(right, 1.0, 2.0))

    gap = np.flatnonzero(right)[0]
    first[gap] = np.nan
    assert np.allclose(restricted_nodal_velocity({1: first, 2: second}, phi)[gap], 2.0)
    second[gap] = np.nan
    assert np.allclose(restricted_nodal_velocity({1: first, 2: second}, phi)[gap], 0.0)
    with pytest.raises(ValueError):
        restricted_nodal_velocity({1: first, 2: second}, init_from_function(mesh, 1, lambda p: p[:, 0]))


def test_benchmark_quantities_of_a_circle(unit_mesh, drop):
    record = benchmark_quantities(None, build_time_slice(init_from_function(unit_mesh, 2, drop)))
    assert record["area"] == pytest.approx(np.pi / 16.0, rel=5e-2)
    assert record["x_c"] == pytest.approx(0.5, abs=1e-10)
    assert record["y_c"] == pytest.approx(0.5, abs=1e-10)
    assert 0.95 < record["circularity"] <= 1.0 + 1e-12
    assert record["components"] == 1
    assert record["rise_velocity"] == 0.0
    with pytest.raises(GeometryError):
        benchmark_quantities(None, build_time_slice(init_from_function(unit_mesh, 2, lambda p: np.ones(len(p)))))


def _static_drop_run(nx, sigma0=24.5, **fluid_changes):
    case = get_case("static_drop")
    mesh = build_uniform_mesh(Rectangle(*case.domain), nx, nx)
    fluid = STOKES.model_copy(update=fluid_changes)
    solver = TwoPhaseSolver(mesh, case, fluid, EquationOfState(sigma0=sigma0),
                            coupled=CoupledParams(with_surfactant=False),
                            backend=PrescribedLevelSet(case.phi_exact))
    return solver.run([0.0, 0.01])


def test_static_drop_pressure_jump():
    result = _static_drop_run(10)
    state = result.final
    assert state.iterations == 1
    assert len(result.records) == 2
    end = state.slab.end
    # sigma / R = 98
    assert 61.0 < laplace_young_jump(state, end) < 135.0
    gauge = 0.0
    for phase in (1, 2):
        points = end.bulk_points(phase)
        gauge += points.integrate(state.pressure[phase].evaluate(end.time, points.elements, points.reference))
    assert gauge == pytest.approx(0.0, abs=1e-6)
    assert velocity_l2_norm(state, end) < 12.0
    assert result.column("area_error")[-1] < 1e-12


def test_static_drop_response_is_linear_in_tension():
    unit = _static_drop_run(10, sigma0=1.0).final
    scaled = _static_drop_run(10).final
    assert laplace_young_jump(scaled, scaled.slab.end) == \
        pytest.approx(24.5 * laplace_young_jump(unit, unit.slab.end), rel=1e-8)


@pytest.mark.slow
def test_static_drop_pressure_jump_at_h_one_fortieth():
    coarse = _static_drop_run(20).final
    fine = _static_drop_run(40).final
    jump = laplace_young_jump(fine, fine.slab.end)
    assert jump == pytest.approx(98.0, rel=0.05)
    assert abs(jump - 98.0) <= abs(laplace_young_jump(coarse, coarse.slab.end) - 98.0)
    assert velocity_l2_norm(fine, fine.slab.end) < velocity_l2_norm(coarse, coarse.slab.end)


def test_newton_reports_non_convergence():
    case = replace(get_case("static_drop"),
                   initial_velocity=lambda p: np.column_stack([p[:, 1] - 0.5, np.zeros(len(p))]))
    mesh = build_uniform_mesh(Rectangle(*case.domain), 10, 10)
    solver = TwoPhaseSolver(mesh, case, STOKES.model_copy(update={"convection": True}),
                            EquationOfState(sigma0=1.0), newton=NewtonParams(max_iter=1),
                            coupled=CoupledParams(with_surfactant=False),
                            backend=PrescribedLevelSet(case.phi_exact))
    with pytest.raises(ConvergenceError) as info:
        solver.run([0.0, 0.01])
    assert info.value.slab_index == 0
    assert len(info.value.residual_history) == 2


def _short_rising_drop(**overrides):
    base = {"nx": 10, "ny": 20, "refine_levels": 0, "t_final": 0.05}
    return run_case(load_run_config("rising_drop", overrides={**base, **overrides}),
                    show_progress=False, write=False)


def test_coupled_run_conserves_surfactant_mass():
    records = _short_rising_drop().records
    assert len(records) == 3
    mass = records["mass"].to_numpy()
    assert mass[0] > 0.0
    assert records["conservation_error"].max() <= 1e-10 * mass[0]


def test_geometry_update_moves_the_first_slab():
    lagged = _short_rising_drop().records
    updated = _short_rising_drop(geometry_updates=1).records
    # the frozen trace of a fluid at rest leaves the first slab in place
    assert lagged["y_c"].iloc[1] == pytest.approx(lagged["y_c"].iloc[0], abs=1e-12)
    assert updated["y_c"].iloc[1] > updated["y_c"].iloc[0]
    # the lag costs at most about one slab of rise
    dt = lagged["t"].iloc[1] - lagged["t"].iloc[0]
    rise = max(lagged["rise_velocity"].max(), updated["rise_velocity"].max())
    assert abs(updated["y_c"].iloc[-1] - lagged["y_c"].iloc[-1]) <= 2.0 * dt * rise
    assert updated["conservation_error"].max() <= 1e-10 * updated["mass"].iloc[0]


@pytest.mark.slow
@pytest.mark.parametrize("beta, expected, rel", [
    (0.0, {"c_min": 0.9015, "u2_c_max": 0.2417, "y_c_final": 1.0817}, 0.06),
    (0.5, {"c_min": 0.8632, "u2_c_max": 0.2239, "y_c_final": 1.0473}, 0.06),
], ids=["clean", "surfactant"])
def test_rising_drop_characteristic_values(beta, expected, rel):
    # h_outer = 1/20, h_inner = 1/40
    overrides = {"nx": 20, "ny": 40, "eos": {"beta": beta}}
    if beta == 0.0:
        overrides["with_surfactant"] = False
    result = run_case(load_run_config("rising_drop", overrides=overrides), show_progress=False, write=False)
    for name, value in expected.items():
        assert result.summary[name] == pytest.approx(value, rel=rel)
    if beta:
        assert result.summary["max_conservation_error"] <= 1e-10 * result.records["mass"].iloc[0]


@pytest.mark.slow
def test_shear_flow_elongation_grows_with_beta():
    perimeters = []
    for beta in (0.0, 0.25, 0.5):
        config = load_run_config("shear_flow", overrides={"eos": {"beta": beta}})
        records = run_case(config, show_progress=False, write=False).records
        perimeters.append(records["perimeter"].iloc[-1])
        assert records["conservation_error"].max() <= 1e-10 * records["mass"].iloc[0]
        assert records["area_error"].max() <= 1e-3
    assert perimeters[0] < perimeters[1] < perimeters[2]


@pytest.mark.slow
@pytest.mark.parametrize("beta, components", [(0.0, 1), (0.6, 2)])
def test_drop_pair_topology(beta, components):
    config = load_run_config("drop_pair", overrides={"eos": {"beta": beta}})
    result = run_case(config, show_progress=False, write=False)
    assert result.summary["final_components"] == components
