from .level_set import LevelSetField, init_from_function, project_to_p1
from .velocity import (
    VelocitySampler, AnalyticVelocity, ZeroVelocity, ConstantVelocity, NodalVelocity
)
from .advection import advect, assemble_transport, streamline_parameter
from .backends import (
    LevelSetBackend, PrescribedLevelSet, AdvectedLevelSet, LevelSetBackendFactory
)
from .cases import AnalyticCase, CASES, get_case, translate_case, circle_distance
from .redistance import redistance_to_interface

__all__ = [
    'LevelSetField', 'init_from_function', 'project_to_p1',
    'VelocitySampler', 'AnalyticVelocity', 'ZeroVelocity', 'ConstantVelocity', 'NodalVelocity',
    'advect', 'assemble_transport', 'streamline_parameter',
    'LevelSetBackend', 'PrescribedLevelSet', 'AdvectedLevelSet', 'LevelSetBackendFactory',
    'AnalyticCase', 'CASES', 'get_case', 'translate_case', 'circle_distance',
    'redistance_to_interface'
]
