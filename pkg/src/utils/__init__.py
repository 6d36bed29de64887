from .common import setup_logging, log_duration
from .errors import (
    CutFlowError, SingularSystemError, ConvergenceError, GeometryError, EquationOfStateError
)

__all__ = [
    'setup_logging', 'log_duration',
    'CutFlowError', 'SingularSystemError', 'ConvergenceError', 'GeometryError',
    'EquationOfStateError'
]
