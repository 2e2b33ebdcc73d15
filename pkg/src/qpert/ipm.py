"""Infeasible primal-dual path-following interior point method with
controlled perturbations.

Each iteration solves the perturbed Newton system through the augmented
(symmetric indefinite) form

    [ -H - (X+L)^{-1}(S+P)   A' ] [dx]   = - [ Rd - (X+L)^{-1} Rmu ]
    [  A                     0  ] [dy]       [ Rp                  ]

    ds = -(X+L)^{-1} (Rmu + (S+P) dx),

takes a fixed fraction of the step to the nearest relaxed bound in the
primal and dual spaces separately, updates the three-set active-set
predictor, and then shrinks the perturbations while keeping
x + lam > 0 and s + phi > 0 strictly.  Running with zero initial
perturbations gives the plain unperturbed method: every lam/phi term
vanishes identically and the same code path is the classical algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .model import (
    Iterate,
    Perturbation,
    StandardQP,
    mu_lambda,
    relative_residual,
)
from .predict import PredictionState, update_prediction

CONVERGED = "converged"
ITERATION_LIMIT = "iteration-limit"
NUMERICAL_FAILURE = "numerical-failure"

# Line-segment parameter used when perturbations cannot simply be scaled
# down because the iterate has gone below zero; the floor factor keeps
# x + lam strictly positive afterwards.
SEGMENT_T = 0.9
POSITIVITY_FLOOR = 1.01

# Stop when the relative residual has not improved tenfold over this many
# iterations; the proof-of-concept Newton systems go singular when pushed
# far past convergence.
STAGNATION_WINDOW = 30

# A gap below tolerance only counts as convergence when the equality
# residuals have also come down; on infeasible data the perturbed gap can
# vanish while Ax - b stays order one.
EQUALITY_GATE = 1e-2


class NumericalFailure(RuntimeError):
    """Raised internally when positivity or a factorization cannot be maintained."""


@dataclass(frozen=True)
class SolveOptions:
    initial_perturbation: float = 1e-3    # scalar eps0; lam0 = phi0 = eps0 * e
    alpha_bar: float = 0.9995             # fraction of the step to the boundary
    mu_tolerance: float = 1e-3            # stop once mu_lambda falls below this
    max_iterations: int = 100
    prediction_threshold: float = 1e-5    # C in the active-set predictor
    # lam <- fraction * lam while the iterate stays interior; must shrink
    # slower than the gap or the perturbation is gone before it can act
    shrink_fraction: float = 0.9

    def __post_init__(self):
        if self.initial_perturbation < 0:
            raise ValueError("initial_perturbation must be >= 0")
        if not 0.0 < self.alpha_bar < 1.0:
            raise ValueError("alpha_bar must lie in (0, 1)")
        if self.mu_tolerance <= 0:
            raise ValueError("mu_tolerance must be positive")
        if self.prediction_threshold <= 0:
            raise ValueError("prediction_threshold must be positive")
        if not 0.0 < self.shrink_fraction < 1.0:
            raise ValueError("shrink_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class IterationRecord:
    mu_lambda: float          # perturbed gap at the new iterate
    mu: float                 # plain gap x's / n at the new iterate
    residual: float           # relative KKT residual at the new iterate
    alpha_p: float
    alpha_d: float
    sigma: float
    lambda_inf: float         # ||lam||_inf in force during the step
    predicted_active: frozenset


@dataclass(frozen=True)
class SolveReport:
    final_iterate: Iterate
    final_perturbation: Perturbation
    iterations: int
    trace: tuple
    status: str
    prediction: PredictionState

    @property
    def predicted_active(self) -> frozenset:
        return self.prediction.active


def mehrotra_start(qp: StandardQP) -> Iterate:
    """Starting point from min-norm least-squares solves plus centering shifts.

    x~ solves Ax = b in the min-norm sense, y~ fits A'y ~ c + Hx~, and
    s~ = c - A'y~ + Hx~.  The shifts first remove negativity
    (dx = max(-1.5 min x~, 0), same for s~) and then add the centering
    increment 0.5 (x~+dx e)'(s~+ds e) / sum(s~+ds), guarded when the
    denominator vanishes and floored so both x0 and s0 end strictly
    positive.
    """
    x_t, _ = linalg.least_squares_min_norm(qp.A, qp.b)
    y_t, _ = linalg.least_squares_min_norm(qp.A.T, qp.c + qp.H @ x_t)
    s_t = qp.c - qp.A.T @ y_t + qp.H @ x_t

    dx = max(-1.5 * float(np.min(x_t)), 0.0)
    ds = max(-1.5 * float(np.min(s_t)), 0.0)
    xs = float((x_t + dx) @ (s_t + ds))
    sum_s = float(np.sum(s_t + ds))
    sum_x = float(np.sum(x_t + dx))

    dx_hat = dx + 0.5 * xs / sum_s if sum_s > 1e-12 else dx + 1.0
    ds_hat = ds + 0.5 * xs / sum_x if sum_x > 1e-12 else ds + 1.0
    # degenerate least-squares starts can leave a component exactly at zero
    if float(np.min(x_t)) + dx_hat <= 0.0:
        dx_hat = dx + 1.0
    if float(np.min(s_t)) + ds_hat <= 0.0:
        ds_hat = ds + 1.0

    return Iterate(x=x_t + dx_hat, y=y_t, s=s_t + ds_hat)


def centering_sigma(mu_l: float) -> float:
    """Centering parameter min(0.1, 100 mu)."""
    if mu_l < 0:
        raise ValueError("mu must be nonnegative")
    return min(0.1, 100.0 * mu_l)


def newton_step(qp: StandardQP, it: Iterate, pert: Perturbation, sigma: float):
    """One perturbed Newton direction (dx, dy, ds) via the augmented system."""
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    p = it.x + pert.lam
    q = it.s + pert.phi
    if np.any(p <= 0) or np.any(q <= 0):
        raise NumericalFailure("iterate is not interior to the relaxed bounds")

    n, m = qp.n, qp.m
    mu_l = float(p @ q) / n
    Rp = qp.A @ it.x - qp.b
    Rd = qp.A.T @ it.y + it.s - qp.H @ it.x - qp.c
    Rmu = p * q - sigma * mu_l

    K = np.zeros((n + m, n + m))
    K[:n, :n] = -qp.H
    K[:n, :n] -= np.diag(q / p)
    K[:n, n:] = qp.A.T
    K[n:, :n] = qp.A
    rhs = np.concatenate([-(Rd - Rmu / p), -Rp])

    sol = linalg.solve_symmetric_indefinite(K, rhs)
    dx = sol[:n]
    dy = sol[n:]
    ds = -(Rmu + q * dx) / p
    return dx, dy, ds


def step_lengths(it: Iterate, pert: Perturbation, dx, ds, alpha_bar: float):
    """Fraction-to-boundary step lengths (alpha_p, alpha_d) for the relaxed bounds."""
    alpha_p = _fraction_to_boundary(it.x + pert.lam, dx, alpha_bar)
    alpha_d = _fraction_to_boundary(it.s + pert.phi, ds, alpha_bar)
    return alpha_p, alpha_d


def _fraction_to_boundary(gap, step, alpha_bar):
    neg = step < 0
    if not np.any(neg):
        return 1.0
    ratio = float(np.min(-gap[neg] / step[neg]))
    return min(alpha_bar * ratio, 1.0)


def shrink_perturbations(pert: Perturbation, next_it: Iterate, shrink_fraction: float) -> Perturbation:
    """Shrink (lam, phi) after a step, keeping x + lam > 0 and s + phi > 0.

    While the iterate is strictly positive the perturbation is scaled by
    the fixed fraction; once some component has gone below zero the new
    perturbation is a point on the segment between the old one and
    -min(x) e, floored componentwise so positivity survives.
    """
    if not 0.0 < shrink_fraction < 1.0:
        raise ValueError("shrink_fraction must lie in (0, 1)")
    lam = _shrink_one(pert.lam, next_it.x, shrink_fraction)
    phi = _shrink_one(pert.phi, next_it.s, shrink_fraction)
    return Perturbation(lam=lam, phi=phi)


def _shrink_one(lam, v, fraction):
    if not np.any(lam):
        if np.any(v <= 0):
            raise NumericalFailure("cannot maintain positivity with zero perturbation")
        return lam
    low = float(np.min(v))
    if low > 0:
        new = fraction * lam
    else:
        segment = (1.0 - SEGMENT_T) * lam + SEGMENT_T * (-low)
        new = np.maximum(segment, POSITIVITY_FLOOR * (-low))
    if np.any(v + new <= 0):
        raise NumericalFailure("cannot maintain positivity while shrinking perturbations")
    return new


def solve(qp: StandardQP, opts: SolveOptions = SolveOptions(), callback=None) -> SolveReport:
    """Run the perturbed method from a Mehrotra start until mu_lambda drops
    below tolerance or a safety stop fires.

    With ``initial_perturbation=0`` this is exactly the unperturbed
    algorithm.  ``callback(k, iterate, pert)`` is invoked after each
    update, before perturbation shrinking.
    """
    n = qp.n
    pert = Perturbation.uniform(opts.initial_perturbation, n)
    it = mehrotra_start(qp)
    pred = PredictionState.fresh(n)
    trace: list[IterationRecord] = []
    status = ITERATION_LIMIT

    for k in range(opts.max_iterations):
        mu_l = mu_lambda(it, pert)
        sigma = centering_sigma(mu_l)
        try:
            dx, dy, ds = newton_step(qp, it, pert, sigma)
        except (NumericalFailure, np.linalg.LinAlgError):
            status = NUMERICAL_FAILURE
            break
        alpha_p, alpha_d = step_lengths(it, pert, dx, ds, opts.alpha_bar)
        it = Iterate(x=it.x + alpha_p * dx, y=it.y + alpha_d * dy, s=it.s + alpha_d * ds)
        pred = update_prediction(pred, it.x, it.s, opts.prediction_threshold)
        if callback is not None:
            callback(k, it, pert)

        new_mu_l = mu_lambda(it, pert)
        trace.append(IterationRecord(
            mu_lambda=new_mu_l,
            mu=float(it.x @ it.s) / n,
            residual=relative_residual(qp, it, pert),
            alpha_p=alpha_p,
            alpha_d=alpha_d,
            sigma=sigma,
            lambda_inf=float(np.max(pert.lam)) if n else 0.0,
            predicted_active=pred.active,
        ))

        if new_mu_l < opts.mu_tolerance and _equality_ok(qp, it):
            status = CONVERGED
            break
        if len(trace) > STAGNATION_WINDOW and \
                trace[-1].residual > 0.1 * trace[-1 - STAGNATION_WINDOW].residual:
            status = ITERATION_LIMIT
            break
        try:
            pert = shrink_perturbations(pert, it, opts.shrink_fraction)
        except NumericalFailure:
            status = NUMERICAL_FAILURE
            break

    return SolveReport(
        final_iterate=it,
        final_perturbation=pert,
        iterations=len(trace),
        trace=tuple(trace),
        status=status,
        prediction=pred,
    )


def _equality_ok(qp: StandardQP, it: Iterate) -> bool:
    Rp = qp.A @ it.x - qp.b
    Rd = qp.A.T @ it.y + it.s - qp.H @ it.x - qp.c
    rp = np.linalg.norm(Rp, np.inf) / (1.0 + np.linalg.norm(qp.b, np.inf))
    rd = np.linalg.norm(Rd, np.inf) / (1.0 + np.linalg.norm(qp.c, np.inf))
    return max(rp, rd) < EQUALITY_GATE


def solve_fixed_iterations(qp: StandardQP, opts: SolveOptions, iterations: int,
                           callback=None) -> SolveReport:
    """Run exactly ``iterations`` steps (no gap-based stop), for synchronized
    comparisons between the perturbed and unperturbed methods."""
    fixed = replace(opts, mu_tolerance=np.finfo(float).tiny, max_iterations=iterations)
    return solve(qp, fixed, callback=callback)
