"""Dense linear-algebra kernels shared by the solver stack.

Everything here is a pure function of its inputs. Matrices are plain
2-d float64 ndarrays; vectors are 1-d.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

# Singular values below RANK_TOL * sigma_max are treated as zero in
# rank-revealing factorizations.
RANK_TOL = 1e-12

# Symmetry is required up to this level, relative to the matrix scale.
SYMMETRY_TOL = 1e-10

# Accepted relative backward error for symmetric indefinite solves.
SOLVE_TOL = 1e-8


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def as_vector(v, length: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if length is not None and v.size != length:
        raise ValueError(f"expected vector of length {length}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def least_squares_min_norm(M, rhs) -> tuple[np.ndarray, float]:
    """Minimum-Euclidean-norm minimizer of ||M u - rhs|| and the attained residual norm.

    Uses an SVD-based rank-revealing solve so the minimal-norm solution is
    returned even when M is rank deficient (normal equations would not
    guarantee that).
    """
    M = as_matrix(M)
    rhs = as_vector(rhs, M.shape[0])
    sol, _, _, _ = scipy.linalg.lstsq(M, rhs, cond=RANK_TOL, lapack_driver="gelsd")
    residual = float(np.linalg.norm(M @ sol - rhs))
    return sol, residual


def solve_symmetric_indefinite(K, rhs) -> np.ndarray:
    """Solve K v = rhs for symmetric (possibly indefinite) K.

    Uses a pivoted symmetric factorization (LAPACK ``sysv``).  If the
    factorization breaks down or the backward error is unacceptable, one
    retry is made with a diagonal regularization following the sign
    pattern of the diagonal: the augmented matrices this kernel sees are
    quasi-definite away from breakdown, so negative diagonal entries get
    -delta and the rest +delta.
    """
    K = as_matrix(K)
    n = K.shape[0]
    if K.shape[1] != n:
        raise ValueError("matrix must be square")
    scale = 1.0 + np.max(np.abs(K))
    if np.max(np.abs(K - K.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric to working tolerance")
    rhs = as_vector(rhs, n)

    v = _try_sym_solve(K, rhs)
    if v is not None:
        return v

    delta = 1e-10 * (1.0 + np.max(np.abs(np.diag(K))))
    signs = np.where(np.diag(K) < 0.0, -1.0, 1.0)
    K_reg = K + np.diag(delta * signs)
    v = _try_sym_solve(K_reg, rhs, check_against=K)
    if v is None:
        raise np.linalg.LinAlgError(
            "symmetric indefinite solve failed (singular to working precision)"
        )
    return v


def _try_sym_solve(K, rhs, check_against=None) -> np.ndarray | None:
    target = K if check_against is None else check_against
    try:
        with warnings.catch_warnings():
            # late-iteration augmented systems are legitimately ill
            # conditioned; acceptance is decided by the residual below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            v = scipy.linalg.solve(K, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(v)):
        return None
    if np.linalg.norm(target @ v - rhs) > SOLVE_TOL * (1.0 + np.linalg.norm(rhs)):
        return None
    return v


def is_positive_semidefinite(M, tol: float = 1e-10) -> bool:
    """True iff the smallest eigenvalue of symmetric M is >= -tol."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = 1.0 + np.max(np.abs(M))
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    eigmin = float(np.linalg.eigvalsh(M)[0])
    return eigmin >= -tol


def spectral_norm(M) -> float:
    """Largest singular value of M."""
    M = as_matrix(M)
    return float(np.linalg.norm(M, 2))
