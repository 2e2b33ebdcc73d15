"""Problem and iterate representations for equality-form convex QPs.

The core problem is

    min 0.5 x'Hx + c'x   s.t.  Ax = b,  x >= 0,

with H symmetric positive semidefinite and A of full row rank.  Relaxing
the bounds to x >= -lambda, s >= -phi gives the perturbed problem family;
the shifted view (p, q) = (x + lambda, s + lambda) turns that family back
into the standard form with data (H, A, b + A*lambda, c + (I - H)*lambda).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg

# Default zero tolerance for index-set membership: entries below this are
# treated as active / at bound, both in ground-truth extraction and in the
# online predictor.
SET_TOL = 1e-5

# Tolerances used when validating problem data.
H_SYMMETRY_TOL = 1e-10
H_PSD_TOL = 1e-8
RANK_TOL_FACTOR = 1e-10

# Relative tolerance under which an iterate counts as satisfying the
# equality constraints (the exact strictly-feasible set is unreachable
# for infeasible-start iterates).
FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class StandardQP:
    """Equality-form convex QP data (H, A, b, c)."""

    H: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "qp"

    def __post_init__(self):
        H = linalg.as_matrix(self.H)
        A = linalg.as_matrix(self.A)
        n = H.shape[0]
        if H.shape[1] != n:
            raise ValueError("H must be square")
        if A.shape[1] != n:
            raise ValueError(f"A has {A.shape[1]} columns, expected {n}")
        if A.shape[0] > n:
            raise ValueError("more constraints than variables (m > n)")
        scale = 1.0 + np.max(np.abs(H))
        if np.max(np.abs(H - H.T)) > H_SYMMETRY_TOL * scale:
            raise ValueError("H is not symmetric to tolerance")
        b = linalg.as_vector(self.b, A.shape[0])
        c = linalg.as_vector(self.c, n)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.c @ x + 0.5 * x @ (self.H @ x))


def validate_problem(qp: StandardQP) -> None:
    """Load-time validation: H PSD to 1e-8 and A of full row rank.

    These checks are O(n^3) so they run when a problem enters the system
    (parsing, generation, CLI), not on every construction.
    """
    if not linalg.is_positive_semidefinite(qp.H, tol=H_PSD_TOL):
        raise ValueError(f"{qp.name}: H is not positive semidefinite to tolerance")
    tol = RANK_TOL_FACTOR * max(1.0, linalg.spectral_norm(qp.A))
    if np.linalg.matrix_rank(qp.A, tol=tol) < qp.m:
        raise ValueError(f"{qp.name}: A does not have full row rank")


@dataclass(frozen=True)
class Iterate:
    """Primal-dual triple (x, y, s)."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", linalg.as_vector(self.x))
        object.__setattr__(self, "y", linalg.as_vector(self.y))
        object.__setattr__(self, "s", linalg.as_vector(self.s, self.x.size))

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Perturbation:
    """Nonnegative bound relaxations: primal lam, dual phi."""

    lam: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        lam = linalg.as_vector(self.lam)
        phi = linalg.as_vector(self.phi, lam.size)
        if np.any(lam < 0) or np.any(phi < 0):
            raise ValueError("perturbations must be componentwise nonnegative")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "phi", phi)

    @staticmethod
    def zeros(n: int) -> "Perturbation":
        return Perturbation(np.zeros(n), np.zeros(n))

    @staticmethod
    def uniform(eps: float, n: int) -> "Perturbation":
        return Perturbation(np.full(n, float(eps)), np.full(n, float(eps)))


@dataclass(frozen=True)
class Tripartition:
    """Disjoint index sets (S, I, T) covering range(n).

    S holds the dual-inactive indices (s* > 0), I the primal-inactive
    ones (x* > 0) and T the common-zero remainder.
    """

    S: frozenset
    I: frozenset
    T: frozenset

    @property
    def n(self) -> int:
        return len(self.S) + len(self.I) + len(self.T)


def kkt_residuals(qp: StandardQP, it: Iterate, pert: Perturbation):
    """Return (Rp, Rd, comp) for the perturbed KKT system.

    Rp = Ax - b, Rd = A'y + s - Hx - c, comp_i = (x_i + lam_i)(s_i + phi_i).
    """
    if it.n != qp.n or it.y.size != qp.m or pert.lam.size != qp.n:
        raise ValueError("dimension mismatch between problem, iterate and perturbation")
    Rp = qp.A @ it.x - qp.b
    Rd = qp.A.T @ it.y + it.s - qp.H @ it.x - qp.c
    comp = (it.x + pert.lam) * (it.s + pert.phi)
    return Rp, Rd, comp


def shifted_problem(qp: StandardQP, lam) -> StandardQP:
    """Shifted-data view of the perturbed problem: (H, A, b + A lam, c + (I - H) lam)."""
    lam = linalg.as_vector(lam, qp.n)
    if np.any(lam < 0):
        raise ValueError("lam must be componentwise nonnegative")
    b_hat = qp.b + qp.A @ lam
    c_hat = qp.c + lam - qp.H @ lam
    return replace(qp, b=b_hat, c=c_hat)


def mu_lambda(it: Iterate, pert: Perturbation) -> float:
    """Perturbed duality gap (x + lam)'(s + phi) / n."""
    if pert.lam.size != it.n:
        raise ValueError("dimension mismatch")
    return float((it.x + pert.lam) @ (it.s + pert.phi)) / it.n


def in_symmetric_neighbourhood(
    qp: StandardQP, it: Iterate, pert: Perturbation, gamma: float
) -> bool:
    """Membership in the symmetric neighbourhood of the perturbed central path.

    Requires every product (x_i + lam_i)(s_i + phi_i) to lie in
    [gamma * mu, mu / gamma] and the equality residuals to vanish to
    FEASIBILITY_TOL relative.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    p = it.x + pert.lam
    q = it.s + pert.phi
    if np.any(p <= 0) or np.any(q <= 0):
        return False
    Rp, Rd, comp = kkt_residuals(qp, it, pert)
    if np.linalg.norm(Rp, np.inf) > FEASIBILITY_TOL * (1.0 + np.linalg.norm(qp.b, np.inf)):
        return False
    if np.linalg.norm(Rd, np.inf) > FEASIBILITY_TOL * (1.0 + np.linalg.norm(qp.c, np.inf)):
        return False
    mu = float(np.mean(comp))
    return bool(np.all(comp >= gamma * mu) and np.all(comp <= mu / gamma))


def relative_residual(qp: StandardQP, it: Iterate, pert: Perturbation) -> float:
    """Infinity norm of (Rp, Rd, comp) over 1 + max(||b||_inf, ||c||_inf)."""
    Rp, Rd, comp = kkt_residuals(qp, it, pert)
    num = max(
        np.linalg.norm(Rp, np.inf) if Rp.size else 0.0,
        np.linalg.norm(Rd, np.inf),
        np.linalg.norm(comp, np.inf),
    )
    den = 1.0 + max(np.linalg.norm(qp.b, np.inf), np.linalg.norm(qp.c, np.inf))
    return float(num / den)


def optimal_partition(x_star, s_star, tol: float = SET_TOL) -> Tripartition:
    """Tripartition of a complementary pair: I = {x* > tol}, S = {s* > tol}, T rest.

    Raises if I and S overlap, which signals the pair is not complementary
    at the given tolerance.
    """
    x_star = linalg.as_vector(x_star)
    s_star = linalg.as_vector(s_star, x_star.size)
    if np.any(x_star < -tol) or np.any(s_star < -tol):
        raise ValueError("pair has negative components beyond tolerance")
    I = frozenset(np.flatnonzero(x_star > tol).tolist())
    S = frozenset(np.flatnonzero(s_star > tol).tolist())
    if I & S:
        raise ValueError(f"pair is not complementary at tolerance {tol}: overlap {sorted(I & S)}")
    T = frozenset(range(x_star.size)) - I - S
    return Tripartition(S=S, I=I, T=T)


def c2_constant(n: int, gamma: float) -> float:
    """Neighbourhood constant sqrt(n / gamma) + n from the iterate-distance bound."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return float(np.sqrt(n / gamma) + n)
