"""Constructive perturbation results.

Three building blocks:

* a closed-form perturbation making the perturbed central path pass through
  a given optimal pair exactly at a chosen gap value,
* a band check certifying that a given perturbation keeps the pair strictly
  feasible with complementarity products inside a relaxed band, and
* the least-squares construction of a point for the shifted problem that
  preserves the optimal active/inactive sets (and hence the tripartition),
  together with the norm threshold on ||lambda|| under which preservation
  is guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import StandardQP, Tripartition, relative_residual, Iterate, Perturbation

# Entries at or below this are treated as exactly zero when partitioning a
# solution pair into active/inactive sets.
ZERO_TOL = 1e-8

# A solution pair must satisfy the KKT system to this relative tolerance
# before the preserving construction applies.
SOLUTION_TOL = 1e-8


def _check_complementary(x_star, s_star):
    x_star = linalg.as_vector(x_star)
    s_star = linalg.as_vector(s_star, x_star.size)
    if np.any(x_star < -ZERO_TOL) or np.any(s_star < -ZERO_TOL):
        raise ValueError("pair must be componentwise nonnegative")
    # an entry at or below ZERO_TOL counts as zero, so products scale with
    # the magnitude of the nonzero partner
    tol = ZERO_TOL * max(1.0, float(np.max(np.abs(x_star))), float(np.max(np.abs(s_star))))
    if np.max(np.abs(x_star * s_star)) > tol:
        raise ValueError("pair is not complementary")
    return x_star, s_star


def perfect_perturbation(x_star, s_star, mu_hat: float) -> np.ndarray:
    """Perturbation putting (x*, s*) on the perturbed central path at gap mu_hat.

    Componentwise root of lam^2 + (x_i + s_i) lam - mu_hat = 0, evaluated in
    the cancellation-free form 2 mu_hat / (t + sqrt(t^2 + 4 mu_hat)).
    """
    x_star, s_star = _check_complementary(x_star, s_star)
    if mu_hat <= 0:
        raise ValueError("mu_hat must be positive")
    t = x_star + s_star
    return 2.0 * mu_hat / (t + np.sqrt(t * t + 4.0 * mu_hat))


def relaxed_band_check(x_star, s_star, lam, mu_hat: float, xi: float) -> bool:
    """True iff (x* + lam, s* + lam) > 0 and every product lies in [xi mu, mu / xi]."""
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    x_star = linalg.as_vector(x_star)
    s_star = linalg.as_vector(s_star, x_star.size)
    lam = linalg.as_vector(lam, x_star.size)
    if np.any(lam <= 0):
        raise ValueError("lam must be componentwise positive")
    p = x_star + lam
    q = s_star + lam
    if np.any(p <= 0) or np.any(q <= 0):
        return False
    prod = p * q
    return bool(np.all(prod >= xi * mu_hat) and np.all(prod <= mu_hat / xi))


@dataclass(frozen=True)
class PreservingPoint:
    """Shifted-space point (p_hat, y_hat, q_hat) built from a solution pair.

    p_hat and q_hat have disjoint supports by construction, so their
    products vanish exactly.  ``sets_preserved`` reports whether the
    strict parts stayed strictly positive, i.e. whether the point carries
    the same active/inactive sets as the originating solution.
    """

    p_hat: np.ndarray
    y_hat: np.ndarray
    q_hat: np.ndarray
    u_hat: np.ndarray
    v_hat: np.ndarray
    ls_residual: float
    bound_2W_lambda: float
    feasibility_error: float
    sets_preserved: bool

    def tripartition(self) -> Tripartition:
        """Index sets read off the point with thresholds at the relaxed bounds."""
        n = self.p_hat.size
        I = frozenset(np.flatnonzero(self.p_hat > 0).tolist())
        S = frozenset(np.flatnonzero(self.q_hat > 0).tolist())
        T = frozenset(range(n)) - I - S
        return Tripartition(S=S, I=I, T=T)


def _partition_sets(x_star, s_star):
    act_x = np.flatnonzero(x_star <= ZERO_TOL)      # primal active
    inact_x = np.flatnonzero(x_star > ZERO_TOL)     # primal inactive
    act_s = np.flatnonzero(s_star <= ZERO_TOL)      # dual active
    inact_s = np.flatnonzero(s_star > ZERO_TOL)     # dual inactive
    return act_x, inact_x, act_s, inact_s


def _assemble_M_W(qp: StandardQP, act_x, inact_x, act_s, inact_s):
    A, H = qp.A, qp.H
    m = qp.m
    M = np.block([
        [A[:, inact_x], np.zeros((m, m))],
        [-H[np.ix_(act_s, inact_x)], A[:, act_s].T],
    ])
    W = np.block([
        [A[:, act_x], np.zeros((m, act_s.size))],
        [-H[np.ix_(act_s, act_x)], np.eye(act_s.size)],
    ])
    return M, W


def preserving_point(qp: StandardQP, x_star, y_star, s_star, lam) -> PreservingPoint:
    """Least-squares construction of a set-preserving point for the shifted problem.

    With (act, inact) the primal partition of x* and (act_s, inact_s) the dual
    partition of s*, solve

        M [u; v] = W [lam_act; lam_act_s]     (minimal-norm least squares)

    and set p_hat on inact, y_hat = y* + v_hat, q_hat on inact_s following the
    construction; the remaining components are exactly zero.  The equality
    infeasibility of the result for the shifted data is bounded by
    2 ||W|| ||lam||, returned as ``bound_2W_lambda``.
    """
    x_star, s_star = _check_complementary(x_star, s_star)
    y_star = linalg.as_vector(y_star, qp.m)
    lam = linalg.as_vector(lam, qp.n)
    if np.any(lam < 0):
        raise ValueError("lam must be componentwise nonnegative")
    res = relative_residual(qp, Iterate(x_star, y_star, s_star), Perturbation.zeros(qp.n))
    if res > SOLUTION_TOL:
        raise ValueError(f"pair does not solve the problem to tolerance (residual {res:.2e})")

    act_x, inact_x, act_s, inact_s = _partition_sets(x_star, s_star)
    M, W = _assemble_M_W(qp, act_x, inact_x, act_s, inact_s)
    lam_pair = np.concatenate([lam[act_x], lam[act_s]])
    rhs = W @ lam_pair
    uv, ls_residual = linalg.least_squares_min_norm(M, rhs)
    u_hat = uv[: inact_x.size]
    v_hat = uv[inact_x.size:]

    n = qp.n
    p_hat = np.zeros(n)
    p_hat[inact_x] = x_star[inact_x] + lam[inact_x] + u_hat
    y_hat = y_star + v_hat
    q_hat = np.zeros(n)
    q_hat[inact_s] = (
        s_star[inact_s]
        + lam[inact_s]
        - qp.H[np.ix_(inact_s, act_x)] @ lam[act_x]
        - qp.A[:, inact_s].T @ v_hat
        + qp.H[np.ix_(inact_s, inact_x)] @ u_hat
    )

    preserved = bool(np.all(p_hat[inact_x] > 0) and np.all(q_hat[inact_s] > 0))
    bound = 2.0 * linalg.spectral_norm(W) * float(np.linalg.norm(lam))

    b_hat = qp.b + qp.A @ lam
    c_hat = qp.c + lam - qp.H @ lam
    primal_err = float(np.linalg.norm(qp.A @ p_hat - b_hat))
    dual_err = float(np.linalg.norm(qp.A.T @ y_hat + q_hat - qp.H @ p_hat - c_hat))

    return PreservingPoint(
        p_hat=p_hat,
        y_hat=y_hat,
        q_hat=q_hat,
        u_hat=u_hat,
        v_hat=v_hat,
        ls_residual=ls_residual,
        bound_2W_lambda=bound,
        feasibility_error=max(primal_err, dual_err),
        sets_preserved=preserved,
    )


def lambda_hat_threshold(qp: StandardQP, x_star, s_star) -> float:
    """Norm threshold under which the preserving construction keeps the sets.

    Evaluates the two-term minimum

        min( v / (2 ||M+ W||),
             v / (||H_SA|| + 2 (||A_S'|| + ||H_SI||) ||M+ W||) )

    with v the smallest entry of (x* on I, s* on S) and all matrix norms
    spectral.  When I and S are both empty the minimum is vacuous and the
    threshold is +inf.
    """
    x_star, s_star = _check_complementary(x_star, s_star)
    act_x, inact_x, act_s, inact_s = _partition_sets(x_star, s_star)
    strict = np.concatenate([x_star[inact_x], s_star[inact_s]])
    if strict.size == 0:
        return np.inf
    v = float(np.min(strict))

    M, W = _assemble_M_W(qp, act_x, inact_x, act_s, inact_s)
    MpW = np.linalg.pinv(M, rcond=linalg.RANK_TOL) @ W
    norm_MpW = linalg.spectral_norm(MpW) if MpW.size else 0.0

    H_SA = qp.H[np.ix_(inact_s, act_x)]
    H_SI = qp.H[np.ix_(inact_s, inact_x)]
    A_S_T = qp.A[:, inact_s].T
    norm_H_SA = linalg.spectral_norm(H_SA) if H_SA.size else 0.0
    norm_H_SI = linalg.spectral_norm(H_SI) if H_SI.size else 0.0
    norm_A_S = linalg.spectral_norm(A_S_T) if A_S_T.size else 0.0

    terms = []
    if norm_MpW > 0:
        terms.append(v / (2.0 * norm_MpW))
    den = norm_H_SA + 2.0 * (norm_A_S + norm_H_SI) * norm_MpW
    if den > 0:
        terms.append(v / den)
    return float(min(terms)) if terms else np.inf
