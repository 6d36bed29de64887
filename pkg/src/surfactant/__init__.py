from .params import SurfactantParams
from .assembly import (
    SurfactantAssembler, assemble_conservative, assemble_nonconservative, stab_sw,
    interface_mass, surface_stiffness, transport_matrix, surface_divergence,
    normal_gradient_stabilization, face_stabilization, interface_load, interface_integral,
    slab_source_integral
)
from .solver import SurfactantSolver, SurfactantState, solve_slab
from .metrics import conservation_error, l2_interface_error

__all__ = [
    'SurfactantParams', 'SurfactantAssembler', 'assemble_conservative', 'assemble_nonconservative',
    'stab_sw', 'interface_mass', 'surface_stiffness', 'transport_matrix', 'surface_divergence',
    'normal_gradient_stabilization', 'face_stabilization', 'interface_load', 'interface_integral',
    'slab_source_integral', 'SurfactantSolver', 'SurfactantState', 'solve_slab',
    'conservation_error', 'l2_interface_error'
]
