from .lagrange import (
    reference_values, reference_gradients, reference_hessians, element_dofs, lagrange_nodes,
    n_nodes, physical_basis, physical_hessians, eval_basis, interpolate, interpolate_gradient
)
from .scalar_space import ScalarSpace, DoubledSpace, Tabulation, restrict
from .spacetime import (
    SpaceTimeField, spacetime_eval, spacetime_dt, trace_at, transfer, time_basis,
    time_basis_derivative, spacetime_block
)
from .face_jumps import normal_derivative_jumps, ghost_penalty_matrix

__all__ = [
    'reference_values', 'reference_gradients', 'reference_hessians', 'element_dofs',
    'lagrange_nodes', 'n_nodes', 'physical_basis', 'physical_hessians', 'eval_basis',
    'interpolate', 'interpolate_gradient',
    'ScalarSpace', 'DoubledSpace', 'Tabulation', 'restrict',
    'SpaceTimeField', 'spacetime_eval', 'spacetime_dt', 'trace_at', 'transfer', 'time_basis',
    'time_basis_derivative', 'spacetime_block',
    'normal_derivative_jumps', 'ghost_penalty_matrix'
]
