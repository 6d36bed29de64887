import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class SparseSystem:
    """
    Triplet accumulation buffer for a square sparse system plus its right-hand side

    Entries are appended as (row, column, value) triplets, either one at a time or
    as whole blocks, and summed when the system is finalized into CSR storage.
    """

    def __init__(self, n: int, dof_map: Optional[dict] = None):
        if n < 0:
            raise ValueError(f"System dimension must be non-negative, got {n}")
        self.n = int(n)
        self.rhs = np.zeros(self.n)
        self.dof_map = dof_map or {}
        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._vals: List[np.ndarray] = []
        self._matrix: Optional[sp.csr_matrix] = None

    def add(self, i: int, j: int, v: float) -> None:
        self.add_entries(np.array([i]), np.array([j]), np.array([v], dtype=float))

    def add_entries(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> None:
        """Append triplets; duplicates are summed on finalize"""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("Triplet arrays must have equal length")
        if rows.size == 0:
            return
        if rows.min() < 0 or cols.min() < 0 or rows.max() >= self.n or cols.max() >= self.n:
            raise ValueError(
                f"Triplet index out of range for system of size {self.n}: "
                f"rows [{rows.min()}, {rows.max()}], cols [{cols.min()}, {cols.max()}]"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("Non-finite value added to sparse system")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(vals)
        self._matrix = None

    def add_block(self, row_offset: int, col_offset: int,
                  block: Union[sp.spmatrix, np.ndarray], scale: float = 1.0) -> None:
        """
        Insert a (sparse or dense) block with its top-left corner at the given offsets

        Args:
            row_offset: First global row of the block
            col_offset: First global column of the block
            block: Block matrix
            scale: Factor applied to every entry
        """
        coo = sp.coo_matrix(block)
        if coo.nnz == 0:
            return
        self.add_entries(coo.row + row_offset, coo.col + col_offset, scale * coo.data)

    def add_rhs(self, index: Union[int, np.ndarray], values: Union[float, np.ndarray]) -> None:
        np.add.at(self.rhs, np.asarray(index, dtype=np.int64), values)

    def finalize(self) -> sp.csr_matrix:
        """Sum duplicate triplets and return the matrix in CSR form with sorted columns"""
        if self._matrix is None:
            if self._rows:
                rows = np.concatenate(self._rows)
                cols = np.concatenate(self._cols)
                vals = np.concatenate(self._vals)
            else:
                rows = cols = np.zeros(0, dtype=np.int64)
                vals = np.zeros(0)
            matrix = sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()
            matrix.sum_duplicates()
            matrix.sort_indices()
            self._matrix = matrix
            logger.debug("Finalized %dx%d system with %d stored entries", self.n, self.n, matrix.nnz)
        return self._matrix

    @property
    def matrix(self) -> sp.csr_matrix:
        return self.finalize()

    def dump(self, path: Union[str, Path]) -> Path:
        """Write the matrix in coordinate text format, one 'i j v' per line"""
        return dump_matrix(self.finalize(), path)


def dump_matrix(matrix: sp.spmatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = sp.coo_matrix(matrix)
    with path.open("w") as handle:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            handle.write(f"{i} {j} {v:.17g}\n")
    return path


def scatter_matrix(test_dofs: np.ndarray, trial_dofs: np.ndarray, local: np.ndarray,
                   shape: tuple) -> sp.csr_matrix:
    """
    Sum per-point local matrices into a global sparse matrix

    Args:
        test_dofs: (n, a) global row index of each local test function
        trial_dofs: (n, b) global column index of each local trial function
        local: (n, a, b) local contributions
        shape: Global matrix shape
    """
    n, a = test_dofs.shape
    b = trial_dofs.shape[1]
    rows = np.broadcast_to(test_dofs[:, :, None], (n, a, b)).ravel()
    cols = np.broadcast_to(trial_dofs[:, None, :], (n, a, b)).ravel()
    matrix = sp.coo_matrix((local.ravel(), (rows, cols)), shape=shape).tocsr()
    matrix.sum_duplicates()
    return matrix


def scatter_vector(dofs: np.ndarray, local: np.ndarray, size: int) -> np.ndarray:
    """Sum per-point local vectors (n, a) into a global vector"""
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=size).astype(float)
