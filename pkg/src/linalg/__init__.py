from .sparse_system import SparseSystem, dump_matrix, scatter_matrix, scatter_vector
from .solver import lu_solve, condition_estimate

__all__ = ['SparseSystem', 'dump_matrix', 'scatter_matrix', 'scatter_vector', 'lu_solve', 'condition_estimate']
