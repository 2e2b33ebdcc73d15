"""Primal active-set solver for equality-form convex QPs, plus the
crossover machinery built on top of it.

The working set is the set of variables pinned at their zero bound.  Each
outer iteration solves the equality-constrained QP on the free variables
through its KKT system, walks toward that minimizer with a ratio test
against the zero bounds ("first blocking bound" = smallest ratio, lowest
index on ties), and at an equality-constrained minimizer releases the
pinned variable with the most negative multiplier (Dantzig rule, lowest
index on ties).  One working-set change counts as one iteration.

Phase 1 finds a nonnegative least-squares point of the equality system;
a residual there means the problem (or a crossover sub-problem built from
a wrong prediction) is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import linalg
from .model import StandardQP

FEAS_TOL = 1e-9          # relative equality feasibility accepted from phase 1
CONSISTENT_TOL = 1e-9    # relative KKT residual below which an EQP solve counts as exact
CYCLE_FACTOR = 10        # working-set changes allowed: CYCLE_FACTOR * n


class ActiveSetError(RuntimeError):
    """Solve failure: carries status 'infeasible', 'unbounded' or 'cycle-limit'."""

    def __init__(self, status: str, message: str = ""):
        super().__init__(message or status)
        self.status = status


@dataclass(frozen=True)
class Subproblem:
    """Reduced problem left after fixing a predicted-active set at zero.

    ``qp`` is None when every variable was fixed and b = 0, in which case
    the sub-problem is trivially solved by the empty vector.
    """

    qp: StandardQP | None
    kept_indices: tuple
    parent_n: int
    full_row_rank: bool


@dataclass(frozen=True)
class CrossoverScore:
    feasibility_error: float
    objective_error: float
    active_set_iterations: int
    lifted_point: np.ndarray


def extract_subproblem(qp: StandardQP, active) -> Subproblem:
    """Remove the predicted-active variables and their columns/rows."""
    active = frozenset(int(i) for i in active)
    if any(i < 0 or i >= qp.n for i in active):
        raise ValueError("active indices out of range")
    kept = tuple(i for i in range(qp.n) if i not in active)
    if not kept:
        if np.linalg.norm(qp.b, np.inf) > 0:
            raise ValueError("all variables fixed at zero but b is nonzero")
        return Subproblem(qp=None, kept_indices=(), parent_n=qp.n, full_row_rank=False)
    if len(kept) < qp.m:
        raise ValueError("reduced problem has fewer variables than constraints")
    idx = np.asarray(kept)
    A_red = qp.A[:, idx]
    reduced = StandardQP(
        H=qp.H[np.ix_(idx, idx)],
        A=A_red,
        b=qp.b,
        c=qp.c[idx],
        name=f"{qp.name}-sub",
    )
    tol = 1e-10 * max(1.0, np.linalg.norm(A_red, 2))
    full_rank = bool(np.linalg.matrix_rank(A_red, tol=tol) == qp.m)
    return Subproblem(qp=reduced, kept_indices=kept, parent_n=qp.n, full_row_rank=full_rank)


def feasible_point(A, b) -> np.ndarray:
    """Nonnegative least-squares point of Ax = b; raises if the residual shows
    the system has no nonnegative solution."""
    A = linalg.as_matrix(A)
    b = linalg.as_vector(b, A.shape[0])
    x, residual = scipy.optimize.nnls(A, b)
    if residual > FEAS_TOL * (1.0 + np.linalg.norm(b)):
        raise ActiveSetError("infeasible", f"equality system residual {residual:.2e}")
    return x


def _project_start(qp: StandardQP, start) -> np.ndarray:
    """Push a caller-supplied start toward the feasible set.

    The equality residual does not need to vanish here: the first
    restricted-QP step restores Ax = b exactly, so clipping after the
    affine correction is enough.  A start too far outside falls back to
    the phase-1 point."""
    x0 = np.maximum(linalg.as_vector(start, qp.n), 0.0)
    corr, _ = linalg.least_squares_min_norm(qp.A, qp.b - qp.A @ x0)
    x0 = np.maximum(x0 + corr, 0.0)
    if np.linalg.norm(qp.A @ x0 - qp.b) > 0.1 * (1.0 + np.linalg.norm(qp.b)):
        return feasible_point(qp.A, qp.b)
    return x0


def _eqp_target(qp: StandardQP, free: np.ndarray):
    """Minimizer of the QP restricted to the free variables (others at zero).

    Returns (x_hat_free, y, consistent).  When the stationarity system has
    no solution the restricted problem is unbounded below and the caller
    must take a descent ray instead.
    """
    nf = free.size
    m = qp.m
    H_ff = qp.H[np.ix_(free, free)]
    A_f = qp.A[:, free]
    K = np.block([[H_ff, A_f.T], [A_f, np.zeros((m, m))]])
    rhs = np.concatenate([-qp.c[free], qp.b])
    try:
        sol = linalg.solve_symmetric_indefinite(K, rhs)
        residual = 0.0
    except np.linalg.LinAlgError:
        sol, residual = linalg.least_squares_min_norm(K, rhs)
    consistent = residual <= CONSISTENT_TOL * (1.0 + np.linalg.norm(rhs))
    x_hat = sol[:nf]
    y = -sol[nf:]
    return x_hat, y, consistent


def _descent_ray(qp: StandardQP, free: np.ndarray, g_free: np.ndarray) -> np.ndarray:
    """Direction of unboundedness: in null(A_free) and null(H_ff) with
    negative slope against the gradient.  An inconsistent restricted
    system with no ray means the equality system itself is the problem,
    so report infeasibility when that is the cause."""
    stack = np.vstack([qp.A[:, free], qp.H[np.ix_(free, free)]])
    _, sv, Vt = np.linalg.svd(stack)
    tol = max(1.0, sv[0] if sv.size else 1.0) * linalg.RANK_TOL * max(stack.shape)
    rank = int(np.sum(sv > tol))
    null_basis = Vt[rank:].T
    d = -null_basis @ (null_basis.T @ g_free) if null_basis.size else np.zeros(free.size)
    if np.linalg.norm(d) <= 1e-12 * (1.0 + np.linalg.norm(g_free)):
        feasible_point(qp.A, qp.b)  # raises 'infeasible' when that is the cause
        raise ActiveSetError("cycle-limit", "restricted problem stalled without a ray")
    return d


def active_set_solve(qp: StandardQP, start=None) -> tuple[np.ndarray, int]:
    """Solve the equality-form convex QP; returns (x_star, working-set changes)."""
    n = qp.n
    x = feasible_point(qp.A, qp.b) if start is None else _project_start(qp, start)
    zero_tol = 1e-10 * (1.0 + float(np.max(x, initial=0.0)))
    working = set(np.flatnonzero(x <= zero_tol).tolist())
    x = x.copy()
    x[list(working)] = 0.0

    changes = 0
    max_changes = CYCLE_FACTOR * n
    # each pass either moves, adds, removes, or terminates; the pass budget
    # is a safety net on top of the working-set change limit
    for _ in range(2 * max_changes + n + 10):
        free = np.asarray(sorted(set(range(n)) - working), dtype=int)
        g = qp.H @ x + qp.c

        if free.size == 0:
            y, _ = linalg.least_squares_min_norm(qp.A.T, g)
            d_free = np.zeros(0)
            at_minimizer = True
        else:
            x_hat, y, consistent = _eqp_target(qp, free)
            if consistent:
                d_free = x_hat - x[free]
                at_minimizer = np.linalg.norm(d_free, np.inf) <= 1e-10 * (1.0 + np.linalg.norm(x[free], np.inf))
            else:
                d_free = _descent_ray(qp, free, g[free])
                at_minimizer = False
                # a ray has no target point: walk it to the first blocking bound
                blocking = _ratio_blocking(x, free, d_free, cap=None)
                if blocking is None:
                    raise ActiveSetError("unbounded", "objective decreases along a feasible ray")
                alpha, j = blocking
                x[free] += alpha * d_free
                x[j] = 0.0
                working.add(j)
                changes += 1
                if changes > max_changes:
                    raise ActiveSetError("cycle-limit", f"exceeded {max_changes} working-set changes")
                continue

        if at_minimizer:
            z = g - qp.A.T @ y
            mult_tol = 1e-9 * (1.0 + np.linalg.norm(g, np.inf))
            candidates = sorted(working)
            if not candidates:
                return _finalize(qp, x, changes)
            z_w = z[candidates]
            worst = int(np.argmin(z_w))
            if z_w[worst] >= -mult_tol:
                return _finalize(qp, x, changes)
            working.discard(candidates[worst])
            changes += 1
            if changes > max_changes:
                raise ActiveSetError("cycle-limit", f"exceeded {max_changes} working-set changes")
            continue

        blocking = _ratio_blocking(x, free, d_free, cap=1.0)
        if blocking is None:
            x[free] += d_free
        else:
            alpha, j = blocking
            x[free] += alpha * d_free
            x[j] = 0.0
            working.add(j)
            changes += 1
            if changes > max_changes:
                raise ActiveSetError("cycle-limit", f"exceeded {max_changes} working-set changes")

    raise ActiveSetError("cycle-limit", "iteration budget exhausted")


def _finalize(qp: StandardQP, x, changes):
    if np.linalg.norm(qp.A @ x - qp.b) > 1e-7 * (1.0 + np.linalg.norm(qp.b)):
        feasible_point(qp.A, qp.b)  # raises 'infeasible' when that is the cause
        raise ActiveSetError("cycle-limit", "terminated away from the equality set")
    return x, changes


def _ratio_blocking(x, free, d_free, cap):
    """Smallest ratio to a zero bound along d; None when the full step fits.

    Returns (alpha, blocking index in the parent numbering)."""
    neg = d_free < 0
    if not np.any(neg):
        return None
    ratios = -x[free[neg]] / d_free[neg]
    ratios = np.maximum(ratios, 0.0)
    k = int(np.argmin(ratios))
    alpha = float(ratios[k])
    if cap is not None and alpha >= cap:
        return None
    return alpha, int(free[neg][k])


def crossover_scores(qp: StandardQP, active, x_sub, x_ref, iterations: int = 0) -> CrossoverScore:
    """Score a crossover result against the full problem.

    Feasibility error is the scaled equality residual of the sub-problem
    solution against the full right-hand side; objective error is the
    scaled difference between the reduced objective at x_sub and the full
    objective at the reference optimum.  The lifted point (zeros on the
    fixed set, x_sub elsewhere) is returned for downstream checks.
    """
    active = frozenset(int(i) for i in active)
    kept = [i for i in range(qp.n) if i not in active]
    x_sub = linalg.as_vector(x_sub, len(kept))
    x_ref = linalg.as_vector(x_ref, qp.n)

    idx = np.asarray(kept, dtype=int)
    A_kept = qp.A[:, idx] if idx.size else np.zeros((qp.m, 0))
    fea = float(np.linalg.norm(A_kept @ x_sub - qp.b, np.inf)) / (1.0 + np.linalg.norm(qp.b, np.inf))

    obj_sub = float(qp.c[idx] @ x_sub + 0.5 * x_sub @ (qp.H[np.ix_(idx, idx)] @ x_sub)) if idx.size else 0.0
    obj_ref = qp.objective(x_ref)
    obj = abs(obj_sub - obj_ref) / (1.0 + abs(obj_ref))

    lifted = np.zeros(qp.n)
    lifted[idx] = x_sub
    return CrossoverScore(
        feasibility_error=fea,
        objective_error=obj,
        active_set_iterations=iterations,
        lifted_point=lifted,
    )
