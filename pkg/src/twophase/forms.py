"""
Spatial forms of the two-phase problem at one time slice

Every form returns spatial blocks keyed by field: matrices under
(test key, trial key) and vectors under the test key, with keys
("u", phase, component), ("p", phase) and ("w",) as in FlowLayout. The
space-time assembler combines them with time-mode matrices.
"""
import logging
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.geometry.interface import tangential_projector
from src.geometry.quadrature import PointSet
from src.geometry.slab import TimeSlice
from src.linalg.sparse_system import scatter_matrix, scatter_vector
from src.spaces.scalar_space import Tabulation
from src.twophase.eos import EquationOfState
from src.twophase.layout import FlowLayout
from src.twophase.params import FluidParams, NitscheParams, WallCondition
from src.utils.errors import GeometryError

logger = logging.getLogger(__name__)

MatrixBlocks = Dict[Tuple[tuple, tuple], sp.csr_matrix]
VectorBlocks = Dict[tuple, np.ndarray]

PHASES = (1, 2)
COMPONENTS = (0, 1)


def phase_sign(phase: int) -> float:
    """+1 for phase 1 and -1 for phase 2, so that jump(v) = sum_i s_i v_i"""
    return 1.0 if phase == 1 else -1.0


def u_key(phase: int, component: int) -> tuple:
    return ("u", phase, component)


def p_key(phase: int) -> tuple:
    return ("p", phase)


W_KEY = ("w",)


class SliceBasis:
    """
    Cached basis tabulations of the layout spaces on the point sets of one slice

    Point sets: "bulk1", "bulk2" (phase parts of the cut mesh), "interface"
    and "boundary" (domain boundary, owned by phase 1).
    """

    def __init__(self, time_slice: TimeSlice, layout: FlowLayout, boundary: PointSet):
        self.time_slice = time_slice
        self.layout = layout
        self._points = {
            "bulk1": time_slice.bulk_points(1),
            "bulk2": time_slice.bulk_points(2),
            "interface": time_slice.interface_points,
            "boundary": boundary,
        }
        self._tabs: Dict[Tuple[tuple, str], Tabulation] = {}

    @property
    def time(self) -> float:
        return self.time_slice.time

    def points(self, kind: str) -> PointSet:
        return self._points[kind]

    def tab(self, field: str, phase: Optional[int], kind: str) -> Tabulation:
        key = ((field, phase), kind)
        if key not in self._tabs:
            space = self.layout.space(u_key(phase, 0) if field == "u" else
                                      p_key(phase) if field == "p" else W_KEY)
            points = self._points[kind]
            try:
                self._tabs[key] = space.tabulate(points.elements, points.reference)
            except ValueError as exc:
                if kind == "boundary":
                    raise GeometryError(
                        f"Domain boundary leaves the phase-1 active mesh at t={self.time:.6g}; "
                        f"the drop touches the wall"
                    ) from exc
                raise
        return self._tabs[key]

    def h(self, kind: str) -> np.ndarray:
        return self.time_slice.mesh.h_per_element[self._points[kind].elements]


def _scatter(test: Tabulation, trial: Tabulation, local: np.ndarray, shape) -> sp.csr_matrix:
    return scatter_matrix(test.dofs, trial.dofs, local, shape)


def _shape(layout: FlowLayout, test_key: tuple, trial_key: tuple) -> Tuple[int, int]:
    return layout.space(test_key).n_dofs, layout.space(trial_key).n_dofs


def _accumulate(blocks: dict, key, value) -> None:
    if key in blocks:
        blocks[key] = blocks[key] + value
    else:
        blocks[key] = value


def bulk_mass(basis: SliceBasis, fluid: FluidParams) -> MatrixBlocks:
    """(rho u, v) on both phases, one block per velocity component"""
    blocks: MatrixBlocks = {}
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        tab = basis.tab("u", phase, f"bulk{phase}")
        local = fluid.rho(phase) * points.weights[:, None, None] * tab.values[:, :, None] * tab.values[:, None, :]
        for component in COMPONENTS:
            key = u_key(phase, component)
            _accumulate(blocks, (key, key), _scatter(tab, tab, local, _shape(basis.layout, key, key)))
    return blocks


def _viscous(basis: SliceBasis, fluid: FluidParams, blocks: MatrixBlocks) -> None:
    # 2 mu eps(phi_b e_r) : eps(phi_a e_l) = mu (delta_lr grad phi_a . grad phi_b + d_l phi_b d_r phi_a)
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        tab = basis.tab("u", phase, f"bulk{phase}")
        scale = fluid.mu(phase) * points.weights
        laplace = np.einsum("nad,nbd->nab", tab.grads, tab.grads)
        for l in COMPONENTS:
            for r in COMPONENTS:
                local = np.einsum("na,nb->nab", tab.grads[:, :, r], tab.grads[:, :, l])
                if l == r:
                    local = local + laplace
                key_l, key_r = u_key(phase, l), u_key(phase, r)
                _accumulate(blocks, (key_l, key_r),
                            _scatter(tab, tab, scale[:, None, None] * local,
                                     _shape(basis.layout, key_l, key_r)))


def _flux(tab: Tabulation, normals: np.ndarray, mu: float, m: int, r: int) -> np.ndarray:
    """Component m of 2 mu eps(phi_b e_r) n for every basis function b, shape (n, b)"""
    normal_derivative = np.einsum("nbd,nd->nb", tab.grads, normals)
    flux = tab.grads[:, :, m] * normals[:, r, None]
    if m == r:
        flux = flux + normal_derivative
    return mu * flux


def _interface_nitsche(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                       blocks: MatrixBlocks) -> None:
    points = basis.points("interface")
    if len(points) == 0:
        return
    weights = nitsche.weights(fluid)
    penalty = nitsche.interface_penalty(fluid, basis.h("interface"))
    n = points.normals
    for test_phase in PHASES:
        test = basis.tab("u", test_phase, "interface")
        s_test, w_test, mu_test = phase_sign(test_phase), weights[test_phase - 1], fluid.mu(test_phase)
        for trial_phase in PHASES:
            trial = basis.tab("u", trial_phase, "interface")
            s_trial, w_trial = phase_sign(trial_phase), weights[trial_phase - 1]
            mu_trial = fluid.mu(trial_phase)
            for l in COMPONENTS:
                for r in COMPONENTS:
                    consistency = -w_trial * s_test * np.einsum(
                        "na,nb->nab", test.values, _flux(trial, n, mu_trial, l, r))
                    symmetry = -w_test * s_trial * np.einsum(
                        "na,nb->nab", _flux(test, n, mu_test, r, l), trial.values)
                    local = consistency + symmetry
                    if l == r:
                        local = local + s_test * s_trial * penalty[:, None, None] * np.einsum(
                            "na,nb->nab", test.values, trial.values)
                    key_l, key_r = u_key(test_phase, l), u_key(trial_phase, r)
                    _accumulate(blocks, (key_l, key_r),
                                _scatter(test, trial, points.weights[:, None, None] * local,
                                         _shape(basis.layout, key_l, key_r)))


def _wall_masks(points: PointSet, walls: Dict[str, WallCondition]) -> Dict[str, np.ndarray]:
    masks = {"no_slip": np.zeros(len(points), dtype=bool), "slip": np.zeros(len(points), dtype=bool)}
    for tag in np.unique(points.tags) if len(points) else []:
        condition = walls.get(str(tag), WallCondition())
        masks[condition.kind] |= points.tags == tag
    return masks


def _boundary_data(points: PointSet, walls: Dict[str, WallCondition], t: float) -> np.ndarray:
    g = np.zeros((len(points), 2))
    for tag in np.unique(points.tags) if len(points) else []:
        pick = points.tags == tag
        g[pick] = walls.get(str(tag), WallCondition()).values(t, points.points[pick])
    return g


def _boundary_nitsche(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                      walls: Dict[str, WallCondition], blocks: MatrixBlocks) -> None:
    points = basis.points("boundary")
    if len(points) == 0:
        return
    tab = basis.tab("u", 1, "boundary")
    n = points.normals
    masks = _wall_masks(points, walls)
    penalty = nitsche.boundary_penalty(fluid, basis.h("boundary"))
    normal_derivative = np.einsum("nbd,nd->nb", tab.grads, n)
    values = tab.values
    mu = fluid.mu1
    for l in COMPONENTS:
        for r in COMPONENTS:
            # full vector conditions
            local = -np.einsum("na,nb->nab", values, _flux(tab, n, mu, l, r))
            local -= np.einsum("na,nb->nab", _flux(tab, n, mu, r, l), values)
            if l == r:
                local += penalty[:, None, None] * np.einsum("na,nb->nab", values, values)
            local *= masks["no_slip"][:, None, None]
            # normal component only
            nn = (n[:, l] * n[:, r] * masks["slip"])[:, None, None]
            slip = -2.0 * mu * (np.einsum("na,nb->nab", values, normal_derivative)
                                + np.einsum("na,nb->nab", normal_derivative, values))
            slip += penalty[:, None, None] * np.einsum("na,nb->nab", values, values)
            local += nn * slip
            key_l, key_r = u_key(1, l), u_key(1, r)
            _accumulate(blocks, (key_l, key_r),
                        _scatter(tab, tab, points.weights[:, None, None] * local,
                                 _shape(basis.layout, key_l, key_r)))


def form_a(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
           walls: Dict[str, WallCondition]) -> MatrixBlocks:
    """
    Viscous form with Nitsche coupling at the interface and Nitsche walls

    (2 mu eps(u), eps(v)) - ({2 mu eps(u) n}, [v]) - ([u], {2 mu eps(v) n})
    + (lambda_Gamma [u], [v]) on Gamma, plus the analogous terms of phase 1 on
    no-slip walls and their normal-component version on slip walls.
    """
    blocks: MatrixBlocks = {}
    _viscous(basis, fluid, blocks)
    _interface_nitsche(basis, fluid, nitsche, blocks)
    _boundary_nitsche(basis, fluid, nitsche, walls, blocks)
    return blocks


def form_b(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams) -> MatrixBlocks:
    """
    b(v, q) = (div v, q) - ([v . n], {q})_Gamma - (v . n, q)_boundary

    Rows are pressure test functions, columns velocity components.
    """
    blocks: MatrixBlocks = {}
    layout = basis.layout
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        u_tab, p_tab = basis.tab("u", phase, f"bulk{phase}"), basis.tab("p", phase, f"bulk{phase}")
        for r in COMPONENTS:
            local = points.weights[:, None, None] * np.einsum("na,nb->nab", p_tab.values, u_tab.grads[:, :, r])
            key = (p_key(phase), u_key(phase, r))
            _accumulate(blocks, key, _scatter(p_tab, u_tab, local, _shape(layout, *key)))

    points = basis.points("interface")
    if len(points) > 0:
        weights = nitsche.weights(fluid)
        for p_phase in PHASES:
            p_tab = basis.tab("p", p_phase, "interface")
            for u_phase in PHASES:
                u_tab = basis.tab("u", u_phase, "interface")
                scale = -phase_sign(u_phase) * weights[p_phase - 1] * points.weights
                for r in COMPONENTS:
                    local = (scale * points.normals[:, r])[:, None, None] * np.einsum(
                        "na,nb->nab", p_tab.values, u_tab.values)
                    key = (p_key(p_phase), u_key(u_phase, r))
                    _accumulate(blocks, key, _scatter(p_tab, u_tab, local, _shape(layout, *key)))

    points = basis.points("boundary")
    if len(points) > 0:
        u_tab, p_tab = basis.tab("u", 1, "boundary"), basis.tab("p", 1, "boundary")
        for r in COMPONENTS:
            local = -(points.weights * points.normals[:, r])[:, None, None] * np.einsum(
                "na,nb->nab", p_tab.values, u_tab.values)
            key = (p_key(1), u_key(1, r))
            _accumulate(blocks, key, _scatter(p_tab, u_tab, local, _shape(layout, *key)))
    return blocks


def form_l(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
           walls: Dict[str, WallCondition]) -> VectorBlocks:
    """
    (f, v) - (g, 2 mu eps(v) n) + (lambda_boundary g, v) - (g . n, q)

    The wall terms follow the condition of each side: slip walls only see g . n.
    """
    layout = basis.layout
    t = basis.time
    blocks: VectorBlocks = {}
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        tab = basis.tab("u", phase, f"bulk{phase}")
        force = fluid.body_force(phase, t, points.points)
        for l in COMPONENTS:
            local = (points.weights * force[:, l])[:, None] * tab.values
            _accumulate(blocks, u_key(phase, l),
                        scatter_vector(tab.dofs, local, layout.space(u_key(phase, l)).n_dofs))

    points = basis.points("boundary")
    if len(points) == 0:
        return blocks
    g = _boundary_data(points, walls, t)
    if not np.any(g):
        return blocks
    tab = basis.tab("u", 1, "boundary")
    n = points.normals
    masks = _wall_masks(points, walls)
    penalty = nitsche.boundary_penalty(fluid, basis.h("boundary"))
    mu = fluid.mu1
    normal_derivative = np.einsum("nad,nd->na", tab.grads, n)
    g_grad = np.einsum("nd,nad->na", g, tab.grads)
    g_normal = np.einsum("nd,nd->n", g, n)
    n_dofs = layout.space(u_key(1, 0)).n_dofs
    for l in COMPONENTS:
        no_slip = (-mu * (g[:, l, None] * normal_derivative + g_grad * n[:, l, None])
                   + (penalty * g[:, l])[:, None] * tab.values)
        slip = (g_normal * n[:, l])[:, None] * (-2.0 * mu * normal_derivative + penalty[:, None] * tab.values)
        local = masks["no_slip"][:, None] * no_slip + masks["slip"][:, None] * slip
        _accumulate(blocks, u_key(1, l), scatter_vector(tab.dofs, points.weights[:, None] * local, n_dofs))
    p_tab = basis.tab("p", 1, "boundary")
    _accumulate(blocks, p_key(1), scatter_vector(
        p_tab.dofs, -(points.weights * g_normal)[:, None] * p_tab.values, layout.space(p_key(1)).n_dofs))
    return blocks


def _phase_velocity(basis: SliceBasis, phase: int, coeffs: np.ndarray, kind: str):
    tab = basis.tab("u", phase, kind)
    return tab, tab.evaluate(coeffs), tab.gradient(coeffs)


def form_c(basis: SliceBasis, fluid: FluidParams, advecting: Dict[int, np.ndarray],
           advected: Optional[Dict[int, np.ndarray]] = None) -> VectorBlocks:
    """
    rho ((a . grad) b, v) on both phases

    Args:
        basis: Slice tabulations
        fluid: Densities
        advecting: Phase -> (n_space, 2) spatial coefficients of a
        advected: Phase -> coefficients of b; defaults to ``advecting``
    """
    advected = advecting if advected is None else advected
    blocks: VectorBlocks = {}
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        tab, a_values, _ = _phase_velocity(basis, phase, advecting[phase], f"bulk{phase}")
        b_grads = tab.gradient(advected[phase])
        convective = np.einsum("nk,nlk->nl", a_values, b_grads)
        n_dofs = basis.layout.space(u_key(phase, 0)).n_dofs
        for l in COMPONENTS:
            local = (fluid.rho(phase) * points.weights * convective[:, l])[:, None] * tab.values
            _accumulate(blocks, u_key(phase, l), scatter_vector(tab.dofs, local, n_dofs))
    return blocks


def form_c_jacobian(basis: SliceBasis, fluid: FluidParams, velocity: Dict[int, np.ndarray]) -> MatrixBlocks:
    """Derivative of rho ((u . grad) u, v): c(du, u, v) + c(u, du, v)"""
    blocks: MatrixBlocks = {}
    for phase in PHASES:
        points = basis.points(f"bulk{phase}")
        if len(points) == 0:
            continue
        tab, values, grads = _phase_velocity(basis, phase, velocity[phase], f"bulk{phase}")
        scale = fluid.rho(phase) * points.weights
        advective = np.einsum("nk,nbk->nb", values, tab.grads)
        mass = np.einsum("na,nb->nab", tab.values, tab.values)
        for l in COMPONENTS:
            for r in COMPONENTS:
                local = grads[:, l, r][:, None, None] * mass
                if l == r:
                    local = local + np.einsum("na,nb->nab", tab.values, advective)
                key = (u_key(phase, l), u_key(phase, r))
                _accumulate(blocks, key, _scatter(tab, tab, scale[:, None, None] * local,
                                                  _shape(basis.layout, *key)))
    return blocks


def _surface_weights(fluid: FluidParams, nitsche: NitscheParams) -> Dict[int, float]:
    # <v> = omega2 v1 + omega1 v2
    omega1, omega2 = nitsche.weights(fluid)
    return {1: omega2, 2: omega1}


def _interface_surfactant(basis: SliceBasis, w_coeffs: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if w_coeffs is None:
        return None
    return basis.tab("w", None, "interface").evaluate(w_coeffs)


def form_fGamma(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams, eos: EquationOfState,
                w_coeffs: Optional[np.ndarray] = None) -> VectorBlocks:
    """
    Surface tension (sigma(w) P_Gamma, grad_Gamma <v>) on the interface

    Without a surfactant field the clean-interface tension sigma0 is used.
    P_Gamma : grad_Gamma v = sum_lk P_lk d_k v_l, so no curvature is formed.

    Raises:
        EquationOfStateError: If a Langmuir tension is evaluated at w >= w_inf
    """
    points = basis.points("interface")
    blocks: VectorBlocks = {}
    if len(points) == 0:
        return blocks
    w_values = _interface_surfactant(basis, w_coeffs)
    sigma = np.full(len(points), eos.sigma0) if w_values is None else eos.sigma(w_values)
    projector = tangential_projector(points.normals)
    for phase, weight in _surface_weights(fluid, nitsche).items():
        tab = basis.tab("u", phase, "interface")
        n_dofs = basis.layout.space(u_key(phase, 0)).n_dofs
        for l in COMPONENTS:
            tangential = np.einsum("nk,nak->na", projector[:, l, :], tab.grads)
            local = (weight * sigma * points.weights)[:, None] * tangential
            _accumulate(blocks, u_key(phase, l), scatter_vector(tab.dofs, local, n_dofs))
    return blocks


def form_fGamma_jacobian(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                         eos: EquationOfState, w_coeffs: np.ndarray) -> MatrixBlocks:
    """Derivative of the surface-tension term in w: sigma'(w) dw"""
    points = basis.points("interface")
    blocks: MatrixBlocks = {}
    if len(points) == 0:
        return blocks
    w_tab = basis.tab("w", None, "interface")
    dsigma = eos.dsigma(w_tab.evaluate(w_coeffs))
    projector = tangential_projector(points.normals)
    for phase, weight in _surface_weights(fluid, nitsche).items():
        tab = basis.tab("u", phase, "interface")
        for l in COMPONENTS:
            tangential = np.einsum("nk,nak->na", projector[:, l, :], tab.grads)
            local = (weight * dsigma * points.weights)[:, None, None] * np.einsum(
                "na,nb->nab", tangential, w_tab.values)
            key = (u_key(phase, l), W_KEY)
            _accumulate(blocks, key, _scatter(tab, w_tab, local, _shape(basis.layout, *key)))
    return blocks


def interface_average_velocity(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                               velocity: Dict[int, np.ndarray]) -> np.ndarray:
    """{u} = omega1 u1 + omega2 u2 at the interface points"""
    weights = nitsche.weights(fluid)
    return sum(weights[phase - 1] * basis.tab("u", phase, "interface").evaluate(velocity[phase])
               for phase in PHASES)


def surfactant_transport(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                         velocity: Dict[int, np.ndarray], w_coeffs: np.ndarray) -> VectorBlocks:
    """-(w, {u} . grad r) on the interface"""
    points = basis.points("interface")
    if len(points) == 0:
        return {}
    w_tab = basis.tab("w", None, "interface")
    average = interface_average_velocity(basis, fluid, nitsche, velocity)
    advective = np.einsum("nad,nd->na", w_tab.grads, average)
    local = -(points.weights * w_tab.evaluate(w_coeffs))[:, None] * advective
    return {W_KEY: scatter_vector(w_tab.dofs, local, basis.layout.space(W_KEY).n_dofs)}


def surfactant_transport_jacobian(basis: SliceBasis, fluid: FluidParams, nitsche: NitscheParams,
                                  velocity: Dict[int, np.ndarray], w_coeffs: np.ndarray) -> MatrixBlocks:
    """Derivatives of -(w, {u} . grad r) in w and in both phase velocities"""
    points = basis.points("interface")
    if len(points) == 0:
        return {}
    layout = basis.layout
    w_tab = basis.tab("w", None, "interface")
    average = interface_average_velocity(basis, fluid, nitsche, velocity)
    advective = np.einsum("nad,nd->na", w_tab.grads, average)
    blocks: MatrixBlocks = {
        (W_KEY, W_KEY): _scatter(w_tab, w_tab, -points.weights[:, None, None] * np.einsum(
            "na,nb->nab", advective, w_tab.values), _shape(layout, W_KEY, W_KEY)),
    }
    w_values = w_tab.evaluate(w_coeffs)
    weights = nitsche.weights(fluid)
    for phase in PHASES:
        tab = basis.tab("u", phase, "interface")
        scale = -weights[phase - 1] * points.weights * w_values
        for r in COMPONENTS:
            local = scale[:, None, None] * np.einsum("na,nb->nab", w_tab.grads[:, :, r], tab.values)
            key = (W_KEY, u_key(phase, r))
            blocks[key] = _scatter(w_tab, tab, local, _shape(layout, *key))
    return blocks
