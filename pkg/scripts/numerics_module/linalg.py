"""Block-sparse linear algebra: block CSR storage, block ILU(0) and BiCGStab.

Vectors that belong to a block matrix are "block vectors": numpy arrays of shape
``(num_rows, block_size)``. Solvers work on the flattened form.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .errors import FactorizationError

logger = logging.getLogger(__name__)


class BlockCSR:
    """Square block matrix in compressed sparse row layout with dense blocks."""

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, blocks: np.ndarray):
        """Initialize from raw CSR arrays.

        Args:
            indptr: Row offsets, length ``num_rows + 1``
            indices: Block column index of every stored block
            blocks: Dense blocks, shape ``(nnzb, b, b)``

        Raises:
            ValueError: unsorted columns, missing diagonal block or shape mismatch
        """
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.blocks = np.asarray(blocks, dtype=float)

        if self.blocks.ndim != 3 or self.blocks.shape[1] != self.blocks.shape[2]:
            raise ValueError(f"blocks must have shape (nnzb, b, b), got {self.blocks.shape}")
        if len(self.indices) != len(self.blocks) or self.indptr[-1] != len(self.blocks):
            raise ValueError("indptr, indices and blocks disagree on the number of blocks")

        self.diagonal_positions = np.empty(self.num_rows, dtype=np.int64)
        for row in range(self.num_rows):
            cols = self.indices[self.indptr[row]:self.indptr[row + 1]]
            if np.any(np.diff(cols) <= 0):
                raise ValueError(f"column indices of block row {row} are not strictly increasing")
            hit = np.flatnonzero(cols == row)
            if len(hit) == 0:
                raise ValueError(f"block row {row} has no diagonal block")
            self.diagonal_positions[row] = self.indptr[row] + hit[0]

    @classmethod
    def from_pattern(cls, num_rows: int, pairs: np.ndarray, block_size: int) -> "BlockCSR":
        """Zero matrix with the diagonal plus both orientations of every pair.

        Args:
            num_rows: Number of block rows
            pairs: Array of shape ``(m, 2)`` with off-diagonal couplings
            block_size: Size of the dense blocks
        """
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate([np.arange(num_rows), pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([np.arange(num_rows), pairs[:, 1], pairs[:, 0]])
        keys = np.unique(rows * num_rows + cols)
        rows, cols = np.divmod(keys, num_rows)

        indptr = np.zeros(num_rows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        blocks = np.zeros((len(cols), block_size, block_size))
        return cls(indptr, cols, blocks)

    @property
    def num_rows(self) -> int:
        return len(self.indptr) - 1

    @property
    def block_size(self) -> int:
        return self.blocks.shape[1]

    @property
    def nnzb(self) -> int:
        return len(self.blocks)

    def position(self, row: int, col: int) -> int:
        """Storage position of block (row, col); -1 when not stored."""
        start, end = self.indptr[row], self.indptr[row + 1]
        hit = np.searchsorted(self.indices[start:end], col)
        if hit < end - start and self.indices[start + hit] == col:
            return int(start + hit)
        return -1

    def positions(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Vectorized ``position`` for pairs that are known to be stored."""
        return np.array([self.position(r, c) for r, c in zip(rows, cols)], dtype=np.int64)

    def copy(self) -> "BlockCSR":
        return BlockCSR(self.indptr.copy(), self.indices.copy(), self.blocks.copy())

    def zeros_like(self) -> "BlockCSR":
        return BlockCSR(self.indptr, self.indices, np.zeros_like(self.blocks))

    def to_scipy(self) -> sp.bsr_matrix:
        n = self.num_rows * self.block_size
        return sp.bsr_matrix((self.blocks, self.indices, self.indptr), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()


def spmv(matrix: BlockCSR, x: np.ndarray) -> np.ndarray:
    """Block matrix times block vector.

    Raises:
        ValueError: ``x`` does not have ``num_rows`` block entries
    """
    x = np.asarray(x, dtype=float)
    expected = (matrix.num_rows, matrix.block_size)
    if x.shape != expected and x.shape != (expected[0] * expected[1],):
        raise ValueError(f"vector of shape {x.shape} does not match block matrix {expected}")
    y = matrix.to_scipy() @ x.reshape(-1)
    return y.reshape(x.shape)


@dataclass
class ILU0Factors:
    """Block ILU(0) factors: A ≈ L·D·Ũ with unit block-triangular L and Ũ."""

    lower: sp.csr_matrix
    upper: sp.csr_matrix
    diagonal_inverse: np.ndarray
    num_blocks: int

    @property
    def block_size(self) -> int:
        return self.diagonal_inverse.shape[1]


def ilu0_factor(matrix: BlockCSR) -> ILU0Factors:
    """Incomplete block LU factorization without fill.

    Raises:
        FactorizationError: a pivot block is singular
    """
    n, b = matrix.num_rows, matrix.block_size
    indptr, indices = matrix.indptr, matrix.indices
    blocks = matrix.blocks.copy()
    diag = matrix.diagonal_positions
    row_lookup = [
        dict(zip(indices[indptr[i]:indptr[i + 1]].tolist(), range(indptr[i], indptr[i + 1])))
        for i in range(n)
    ]
    diagonal_inverse = np.empty((n, b, b))

    for i in range(n):
        lookup = row_lookup[i]
        for ik in range(indptr[i], diag[i]):
            k = indices[ik]
            blocks[ik] = blocks[ik] @ diagonal_inverse[k]
            for kj in range(diag[k] + 1, indptr[k + 1]):
                ij = lookup.get(indices[kj])
                if ij is not None:
                    blocks[ij] -= blocks[ik] @ blocks[kj]
        try:
            pivot_inverse = np.linalg.inv(blocks[diag[i]])
        except np.linalg.LinAlgError:
            raise FactorizationError(i) from None
        if not np.all(np.isfinite(pivot_inverse)):
            raise FactorizationError(i)
        diagonal_inverse[i] = pivot_inverse

    rows = np.repeat(np.arange(n), np.diff(indptr))
    is_lower = indices < rows
    is_upper = indices > rows
    scaled_upper = np.einsum("kij,kjl->kil", diagonal_inverse[rows[is_upper]], blocks[is_upper])
    return ILU0Factors(
        lower=_strict_triangle(n, b, rows[is_lower], indices[is_lower], blocks[is_lower]),
        upper=_strict_triangle(n, b, rows[is_upper], indices[is_upper], scaled_upper),
        diagonal_inverse=diagonal_inverse,
        num_blocks=matrix.nnzb,
    )


def _strict_triangle(n: int, b: int, rows, cols, blocks) -> sp.csr_matrix:
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, np.asarray(rows) + 1, 1)
    shape = (n * b, n * b)
    if len(blocks) == 0:
        return sp.csr_matrix(shape)
    bsr = sp.bsr_matrix((blocks, np.asarray(cols), np.cumsum(indptr)), shape=shape)
    return bsr.tocsr()


def ilu0_apply(factors: ILU0Factors, r: np.ndarray) -> np.ndarray:
    """Solve L·D·Ũ z = r by block forward/backward substitution."""
    r = np.asarray(r, dtype=float)
    b = factors.block_size
    y = _unit_triangular_solve(factors.lower, r.reshape(-1), lower=True)
    w = np.einsum("kij,kj->ki", factors.diagonal_inverse, y.reshape(-1, b))
    z = _unit_triangular_solve(factors.upper, w.reshape(-1), lower=False)
    return z.reshape(r.shape)


def _unit_triangular_solve(matrix: sp.csr_matrix, rhs: np.ndarray, lower: bool) -> np.ndarray:
    if matrix.nnz == 0:
        return rhs.copy()
    return spsolve_triangular(matrix, rhs, lower=lower, unit_diagonal=True)


@dataclass
class LinearSolveResult:
    """Outcome of an iterative solve; ``residual_norm`` is the recomputed ‖b − Ax‖₂."""

    x: np.ndarray
    iterations: int
    converged: bool
    residual_norm: float
    breakdowns: int = 0


Operator = Callable[[np.ndarray], np.ndarray]


def as_operator(matrix: Any) -> Operator:
    """Wrap a BlockCSR, a scipy/numpy matrix or a callable as ``x -> A x`` on flat vectors."""
    if isinstance(matrix, BlockCSR):
        scipy_matrix = matrix.to_scipy()
        return lambda x: scipy_matrix @ x
    if callable(matrix):
        return matrix
    return lambda x: matrix @ x


def bicgstab(
    operator: Any,
    b: np.ndarray,
    preconditioner: Operator | None = None,
    tol: float = 1e-3,
    maxiter: int = 200,
    x0: np.ndarray | None = None,
) -> LinearSolveResult:
    """Right-preconditioned stabilized bi-conjugate gradients.

    Converges when ‖b − Ax‖₂ / ‖b‖₂ < tol. A breakdown (vanishing ρ or ω) restarts
    the recurrence from the current iterate once; a second breakdown ends the solve
    unconverged.

    Args:
        operator: Matrix or callable applying A
        b: Right-hand side (any shape; solved in flattened form)
        preconditioner: Callable applying M⁻¹, identity when omitted
        tol: Relative residual tolerance
        maxiter: Iteration limit
        x0: Initial guess, zero when omitted

    Returns:
        LinearSolveResult with the solution in the shape of ``b``
    """
    apply_a = as_operator(operator)
    apply_m = preconditioner if preconditioner is not None else (lambda v: v)
    shape = np.shape(b)
    b = np.asarray(b, dtype=float).reshape(-1)
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).reshape(-1).copy()

    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return LinearSolveResult(np.zeros(shape), 0, True, 0.0)

    target = tol * b_norm
    r = b - apply_a(x)
    if np.linalg.norm(r) < target:
        return LinearSolveResult(x.reshape(shape), 0, True, float(np.linalg.norm(r)))

    breakdowns = 0
    iterations = 0
    converged = False
    fresh = True
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    p = np.zeros_like(b)
    v = np.zeros_like(b)

    while iterations < maxiter:
        iterations += 1
        rho_new = r_hat @ r
        if abs(rho_new) <= 1e-30 * np.linalg.norm(r_hat) * np.linalg.norm(r):
            breakdowns += 1
            if breakdowns > 1:
                break
            logger.debug("bicgstab breakdown (rho) at iteration %d, restarting", iterations)
            r = b - apply_a(x)
            r_hat, rho, alpha, omega, fresh = r.copy(), 1.0, 1.0, 1.0, True
            continue

        if fresh:
            p = r.copy()
            fresh = False
        else:
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)

        p_hat = apply_m(p)
        v = apply_a(p_hat)
        denominator = r_hat @ v
        if denominator == 0.0:
            breakdowns += 1
            if breakdowns > 1:
                break
            r = b - apply_a(x)
            r_hat, rho, alpha, omega, fresh = r.copy(), 1.0, 1.0, 1.0, True
            continue
        alpha = rho_new / denominator
        s = r - alpha * v

        if np.linalg.norm(s) < target:
            x = x + alpha * p_hat
            r = b - apply_a(x)
            if np.linalg.norm(r) < target:
                converged = True
                break
            # recursive residual drifted; continue from the true one
            r_hat, rho, alpha, omega, fresh = r.copy(), 1.0, 1.0, 1.0, True
            continue

        s_hat = apply_m(s)
        t = apply_a(s_hat)
        tt = t @ t
        omega = (t @ s) / tt if tt > 0.0 else 0.0
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        rho = rho_new

        if np.linalg.norm(r) < target:
            r = b - apply_a(x)
            if np.linalg.norm(r) < target:
                converged = True
                break
            r_hat, rho, alpha, omega, fresh = r.copy(), 1.0, 1.0, 1.0, True
            continue

        if omega == 0.0:
            breakdowns += 1
            if breakdowns > 1:
                break
            logger.debug("bicgstab breakdown (omega) at iteration %d, restarting", iterations)
            r = b - apply_a(x)
            r_hat, rho, alpha, omega, fresh = r.copy(), 1.0, 1.0, 1.0, True

    residual_norm = float(np.linalg.norm(b - apply_a(x)))
    return LinearSolveResult(x.reshape(shape), iterations, converged, residual_norm, breakdowns)
