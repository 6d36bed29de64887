import logging
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from src.linalg.sparse_system import SparseSystem
from src.utils.errors import SingularSystemError

logger = logging.getLogger(__name__)

# Above this size the failing pivot row is not located with a dense factorization
DENSE_DIAGNOSIS_LIMIT = 2000
RESIDUAL_FACTOR = 1e-10


def lu_solve(system: Union[SparseSystem, Tuple[sp.spmatrix, np.ndarray]],
             context: str = "") -> np.ndarray:
    """
    Solve a square nonsymmetric sparse system with SuperLU

    Partial pivoting with COLAMD column ordering; the ordering is deterministic
    so repeated solves of the same matrix give bitwise-identical results.

    Args:
        system: SparseSystem or (matrix, rhs) pair
        context: Text attached to errors (e.g. the slab index)

    Returns:
        Solution vector

    Raises:
        SingularSystemError: zero pivot, or the residual check fails
    """
    if isinstance(system, SparseSystem):
        matrix, rhs = system.finalize(), system.rhs
    else:
        matrix, rhs = system
    matrix = sp.csc_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"Matrix must be square, got shape {matrix.shape}")
    if rhs.shape != (n,):
        raise ValueError(f"Right-hand side has shape {rhs.shape}, expected ({n},)")
    if n == 0:
        return np.zeros(0)

    try:
        lu = splu(matrix, permc_spec="COLAMD", options={"SymmetricMode": False})
    except RuntimeError as exc:
        row = _locate_singular_row(matrix)
        raise SingularSystemError(row, None, context or str(exc)) from exc

    x = lu.solve(rhs)
    norm_a = abs(matrix).sum(axis=1).max()
    residual = np.abs(matrix @ x - rhs).max()
    bound = RESIDUAL_FACTOR * (norm_a * np.abs(x).max() + np.abs(rhs).max())
    if not np.all(np.isfinite(x)) or residual > bound:
        condition = condition_estimate(matrix, lu)
        raise SingularSystemError(
            _locate_singular_row(matrix), condition,
            f"{context + ': ' if context else ''}residual {residual:.3e} exceeds {bound:.3e}"
        )
    logger.debug("Solved system of size %d (nnz %d), residual %.2e", n, matrix.nnz, residual)
    return x


def condition_estimate(matrix: sp.spmatrix, lu=None) -> Optional[float]:
    """1-norm condition estimate ||A||_1 ||A^-1||_1"""
    matrix = sp.csc_matrix(matrix)
    try:
        if lu is None:
            lu = splu(matrix, permc_spec="COLAMD")
        n = matrix.shape[0]
        inverse = LinearOperator(
            (n, n), matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="T"), dtype=float
        )
        return float(onenormest(matrix) * onenormest(inverse))
    except (RuntimeError, ValueError):
        return None


def _locate_singular_row(matrix: sp.spmatrix) -> int:
    """First row of U with a vanishing pivot in a dense LU; -1 when too large to check"""
    n = matrix.shape[0]
    if n > DENSE_DIAGNOSIS_LIMIT:
        return -1
    dense = matrix.toarray()
    _, _, upper = scipy.linalg.lu(dense)
    diagonal = np.abs(np.diag(upper))
    scale = max(np.abs(dense).max(), 1.0)
    small = np.flatnonzero(diagonal <= 1e-13 * scale)
    return int(small[0]) if small.size else -1
