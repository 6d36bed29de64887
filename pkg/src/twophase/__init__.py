from .params import (
    FluidParams, WallCondition, NitscheParams, StabParams, NewtonParams, CoupledParams, default_walls
)
from .eos import EquationOfState
from .layout import FlowLayout
from .forms import (
    SliceBasis, bulk_mass, form_a, form_b, form_l, form_c, form_c_jacobian, form_fGamma,
    form_fGamma_jacobian, surfactant_transport, surfactant_transport_jacobian, u_key, p_key, W_KEY
)
from .stabilization import stab_sp, stab_su
from .newton import CoupledAssembler, newton_solve, pressure_gauge, increment_norm
from .state import FlowState, extend_traces, restricted_nodal_velocity
from .benchmarks import benchmark_quantities, laplace_young_jump, velocity_l2_norm
from .solver import TwoPhaseSolver, TwoPhaseResult, MarchState

__all__ = [
    'FluidParams', 'WallCondition', 'NitscheParams', 'StabParams', 'NewtonParams', 'CoupledParams',
    'default_walls', 'EquationOfState', 'FlowLayout',
    'SliceBasis', 'bulk_mass', 'form_a', 'form_b', 'form_l', 'form_c', 'form_c_jacobian',
    'form_fGamma', 'form_fGamma_jacobian', 'surfactant_transport', 'surfactant_transport_jacobian',
    'u_key', 'p_key', 'W_KEY',
    'stab_sp', 'stab_su',
    'CoupledAssembler', 'newton_solve', 'pressure_gauge', 'increment_norm',
    'FlowState', 'extend_traces', 'restricted_nodal_velocity',
    'benchmark_quantities', 'laplace_young_jump', 'velocity_l2_norm',
    'TwoPhaseSolver', 'TwoPhaseResult', 'MarchState'
]
