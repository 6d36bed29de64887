from .cases import BenchCase, CaseFactory
from .output import (
    write_csv, write_interface_vtk, write_fields_vtk, write_manifest, phase_cells
)
from .runner import (
    RunResult, run_case, run_surfactant_case, make_backend, resolved_parameters, summarize_flow,
    summarize_surfactant
)
from .convergence import convergence_study, error_spread, observed_orders, robustness_sweep

__all__ = [
    'BenchCase', 'CaseFactory',
    'write_csv', 'write_interface_vtk', 'write_fields_vtk', 'write_manifest', 'phase_cells',
    'RunResult', 'run_case', 'run_surfactant_case', 'make_backend', 'resolved_parameters', 'summarize_flow',
    'summarize_surfactant',
    'convergence_study', 'error_spread', 'observed_orders', 'robustness_sweep'
]
